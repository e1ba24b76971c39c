use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use crate::error::MpError;

/// Significand storage. Little-endian 64-bit limbs, left-aligned so the
/// leading significand bit is bit 63 of the last limb.
pub(crate) type Limbs = SmallVec<[u64; 8]>;
type Scratch = SmallVec<[u64; 18]>;

pub const MIN_PREC: u32 = 2;
pub const MAX_PREC: u32 = 1 << 16;

/// Largest accepted exponent `e` of a value `f·2^e` with `f ∈ [1/2, 1)`.
pub const EXP_MAX: i64 = 1 << 30;
/// Smallest accepted exponent.
pub const EXP_MIN: i64 = -(1 << 30);

/// The four basic operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    pub fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Sub => '-',
            Op::Mul => '*',
            Op::Div => '/',
        }
    }
}

/// A binary floating-point number with an explicit significand width.
///
/// Nonzero values are `±f·2^exp` with `f ∈ [1/2, 1)` carried as exactly
/// `prec` bits. Zero is unique: positive sign, exponent 0, empty significand.
/// Derived equality is bit identity (precision, sign, exponent, significand).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MpReal {
    prec: u32,
    neg: bool,
    exp: i64,
    limbs: Limbs,
}

#[inline]
pub(crate) fn limbs_for(prec: u32) -> usize {
    prec.div_ceil(64) as usize
}

pub(crate) fn check_prec(prec: u32) -> Result<(), MpError> {
    if (MIN_PREC..=MAX_PREC).contains(&prec) {
        Ok(())
    } else {
        Err(MpError::InvalidPrecision(prec))
    }
}

#[inline(always)]
fn limb(mag: &[u64], i: i64) -> u64 {
    if i >= 0 && (i as usize) < mag.len() {
        mag[i as usize]
    } else {
        0
    }
}

/// 64 bits of `mag` starting at bit `pos`; bits outside the slice read as 0.
#[inline(always)]
fn read64(mag: &[u64], pos: i64) -> u64 {
    let w = pos.div_euclid(64);
    let s = pos.rem_euclid(64) as u32;
    if s == 0 {
        limb(mag, w)
    } else {
        (limb(mag, w) >> s) | (limb(mag, w + 1) << (64 - s))
    }
}

#[inline]
fn bit_at(mag: &[u64], pos: i64) -> bool {
    pos >= 0 && (limb(mag, pos / 64) >> (pos % 64)) & 1 == 1
}

/// Whether any bit strictly below `pos` is set.
#[inline]
fn any_below(mag: &[u64], pos: i64) -> bool {
    if pos <= 0 {
        return false;
    }
    let w = (pos / 64) as usize;
    let s = (pos % 64) as u32;
    let full = w.min(mag.len());
    if mag[..full].iter().any(|&x| x != 0) {
        return true;
    }
    s > 0 && w < mag.len() && mag[w] & ((1u64 << s) - 1) != 0
}

/// Round `mag · 2^scale` (plus a positive quantity below one unit of `mag`
/// when `sticky` is set) to `prec` bits, nearest with ties to even.
pub(crate) fn round_mag(
    mag: &[u64],
    sticky: bool,
    scale: i64,
    prec: u32,
    neg: bool,
) -> Result<MpReal, MpError> {
    let Some(top) = mag.iter().rposition(|&w| w != 0) else {
        debug_assert!(!sticky, "sticky bits below an exact zero");
        return Ok(MpReal::zero_unchecked(prec));
    };
    let bitlen = top as i64 * 64 + 64 - i64::from(mag[top].leading_zeros());
    let n = limbs_for(prec);
    let lo = bitlen - 64 * n as i64;
    let mut r: Limbs = SmallVec::from_elem(0, n);
    for (i, w) in r.iter_mut().enumerate() {
        *w = read64(mag, lo + 64 * i as i64);
    }
    let extra = 64 * n as u32 - prec;
    let (round_bit, below) = if extra > 0 {
        let rb = (r[0] >> (extra - 1)) & 1 == 1;
        let mask = (1u64 << (extra - 1)) - 1;
        (rb, r[0] & mask != 0 || any_below(mag, lo))
    } else {
        (bit_at(mag, lo - 1), any_below(mag, lo - 1))
    };
    if extra > 0 {
        r[0] &= !((1u64 << extra) - 1);
    }
    let mut exp = scale + bitlen;
    let lsb = (r[0] >> extra) & 1 == 1;
    if round_bit && (sticky || below || lsb) {
        let mut carry = 1u64 << extra;
        for w in r.iter_mut() {
            let (s, c) = w.overflowing_add(carry);
            *w = s;
            carry = u64::from(c);
            if carry == 0 {
                break;
            }
        }
        if carry != 0 {
            r[n - 1] = 1 << 63;
            exp += 1;
        }
    }
    if exp > EXP_MAX {
        return Err(MpError::Overflow(exp));
    }
    if exp < EXP_MIN {
        return Err(MpError::Underflow(exp));
    }
    Ok(MpReal {
        prec,
        neg,
        exp,
        limbs: r,
    })
}

fn cmp_limbs_top_aligned(a: &[u64], b: &[u64]) -> Ordering {
    let n = a.len().max(b.len());
    for i in 0..n {
        let x = if i < a.len() { a[a.len() - 1 - i] } else { 0 };
        let y = if i < b.len() { b[b.len() - 1 - i] } else { 0 };
        match x.cmp(&y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}

impl MpReal {
    pub(crate) fn zero_unchecked(prec: u32) -> Self {
        MpReal {
            prec,
            neg: false,
            exp: 0,
            limbs: match limbs_for(prec) {
                n @ 0..=8 => SmallVec::from_buf_and_len([0; 8], n),
                n => SmallVec::from_elem(0, n),
            },
        }
    }

    /// Canonical zero at `prec` bits.
    pub fn zero(prec: u32) -> Result<Self, MpError> {
        check_prec(prec)?;
        Ok(Self::zero_unchecked(prec))
    }

    pub fn from_u64(v: u64, prec: u32) -> Result<Self, MpError> {
        check_prec(prec)?;
        round_mag(&[v], false, 0, prec, false)
    }

    pub fn from_i64(v: i64, prec: u32) -> Result<Self, MpError> {
        check_prec(prec)?;
        round_mag(&[v.unsigned_abs()], false, 0, prec, v < 0)
    }

    /// Exact conversion of a finite `f64`, rounded if `prec < 53`.
    pub fn from_f64(v: f64, prec: u32) -> Result<Self, MpError> {
        check_prec(prec)?;
        if !v.is_finite() {
            return Err(MpError::NonFinite);
        }
        let bits = v.to_bits();
        let neg = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        if m == 0 {
            return Ok(Self::zero_unchecked(prec));
        }
        round_mag(&[m], false, e, prec, neg)
    }

    /// Assemble from raw parts. `limbs` must be left-aligned with the top bit
    /// set and no bits below the precision; zero is passed as all-zero limbs.
    pub fn from_parts(prec: u32, neg: bool, exp: i64, limbs: &[u64]) -> Result<Self, MpError> {
        check_prec(prec)?;
        let n = limbs_for(prec);
        let bad = |why: &str| MpError::parse(&format!("{limbs:x?}"), why);
        if limbs.len() != n {
            return Err(bad("wrong limb count"));
        }
        if limbs.iter().all(|&w| w == 0) {
            if neg || exp != 0 {
                return Err(bad("zero must be +0 with exponent 0"));
            }
            return Ok(Self::zero_unchecked(prec));
        }
        if limbs[n - 1] >> 63 != 1 {
            return Err(bad("significand not normalized"));
        }
        let extra = 64 * n as u32 - prec;
        if extra > 0 && limbs[0] & ((1u64 << extra) - 1) != 0 {
            return Err(bad("bits set below the precision"));
        }
        if !(EXP_MIN..=EXP_MAX).contains(&exp) {
            return Err(MpError::Overflow(exp));
        }
        Ok(MpReal {
            prec,
            neg,
            exp,
            limbs: SmallVec::from_slice(limbs),
        })
    }

    #[inline]
    pub fn precision(&self) -> u32 {
        self.prec
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.limbs[self.limbs.len() - 1] == 0
    }

    #[inline]
    pub fn is_negative(&self) -> bool {
        self.neg
    }

    /// Exponent `e` in `|x| = f·2^e`, `f ∈ [1/2, 1)`. Zero reports 0.
    #[inline]
    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// Little-endian significand limbs, left-aligned (bit 63 of the last limb
    /// is the leading bit).
    #[inline]
    pub fn significand_limbs(&self) -> &[u64] {
        &self.limbs
    }

    /// Bit `i` of the significand counted from the most significant (i = 0).
    pub fn significand_bit(&self, i: u32) -> bool {
        if i >= self.prec {
            return false;
        }
        let n = self.limbs.len();
        let pos = 64 * n as i64 - 1 - i64::from(i);
        bit_at(&self.limbs, pos)
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        if !r.is_zero() {
            r.neg = !r.neg;
        }
        r
    }

    pub fn abs(&self) -> Self {
        let mut r = self.clone();
        r.neg = false;
        r
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_2exp(&self, k: i64) -> Result<Self, MpError> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let exp = self.exp + k;
        if exp > EXP_MAX {
            return Err(MpError::Overflow(exp));
        }
        if exp < EXP_MIN {
            return Err(MpError::Underflow(exp));
        }
        let mut r = self.clone();
        r.exp = exp;
        Ok(r)
    }

    /// Re-round to another precision (exact when widening).
    pub fn to_precision(&self, prec: u32) -> Result<Self, MpError> {
        check_prec(prec)?;
        if prec == self.prec {
            return Ok(self.clone());
        }
        let n = self.limbs.len() as i64;
        round_mag(&self.limbs, false, self.exp - 64 * n, prec, self.neg)
    }

    /// Numeric comparison; precisions may differ.
    pub fn compare(&self, other: &MpReal) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => {
                return if other.neg {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (false, true) => {
                return if self.neg {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            _ => {}
        }
        match (self.neg, other.neg) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            (false, false) => self.cmp_abs(other),
            (true, true) => other.cmp_abs(self),
        }
    }

    /// Comparison of magnitudes.
    pub fn cmp_abs(&self, other: &MpReal) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self
                .exp
                .cmp(&other.exp)
                .then_with(|| cmp_limbs_top_aligned(&self.limbs, &other.limbs)),
        }
    }

    /// `⌊x⌋` for `0 ≤ x < 2^64`; `None` for negative or larger values.
    pub fn floor_u64(&self) -> Option<u64> {
        if self.is_zero() {
            return Some(0);
        }
        if self.neg {
            return None;
        }
        if self.exp <= 0 {
            return Some(0);
        }
        if self.exp > 64 {
            return None;
        }
        let top = self.limbs[self.limbs.len() - 1];
        Some(if self.exp == 64 {
            top
        } else {
            top >> (64 - self.exp)
        })
    }

    /// Nearest `f64` (ties to even). Values outside the normal `f64` range
    /// saturate to infinity or flush toward zero.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let n = self.limbs.len() as i64;
        let r = match round_mag(&self.limbs, false, self.exp - 64 * n, 53, self.neg) {
            Ok(r) => r,
            Err(MpError::Overflow(_)) => return if self.neg { f64::NEG_INFINITY } else { f64::INFINITY },
            Err(_) => return if self.neg { -0.0 } else { 0.0 },
        };
        let m = (r.limbs[0] >> 11) as f64;
        let v = ldexp(m, r.exp - 53);
        if self.neg {
            -v
        } else {
            v
        }
    }

    fn check_same_prec(&self, other: &MpReal) -> Result<(), MpError> {
        if self.prec == other.prec {
            Ok(())
        } else {
            Err(MpError::PrecisionMismatch {
                left: self.prec,
                right: other.prec,
            })
        }
    }

    /// One correctly rounded basic operation.
    pub fn op(&self, other: &MpReal, which: Op) -> Result<MpReal, MpError> {
        match which {
            Op::Add => self.add(other),
            Op::Sub => self.sub(other),
            Op::Mul => self.mul(other),
            Op::Div => self.div(other),
        }
    }

    #[inline]
    pub fn add(&self, other: &MpReal) -> Result<MpReal, MpError> {
        self.check_same_prec(other)?;
        add_signed(self, other, other.neg)
    }

    #[inline]
    pub fn sub(&self, other: &MpReal) -> Result<MpReal, MpError> {
        self.check_same_prec(other)?;
        add_signed(self, other, !other.neg)
    }

    pub fn mul(&self, other: &MpReal) -> Result<MpReal, MpError> {
        self.check_same_prec(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero_unchecked(self.prec));
        }
        match self.limbs.len() {
            1 => mul_fixed::<1, 2>(self, other),
            2 => mul_fixed::<2, 4>(self, other),
            3 => mul_fixed::<3, 6>(self, other),
            4 => mul_fixed::<4, 8>(self, other),
            5 => mul_fixed::<5, 10>(self, other),
            6 => mul_fixed::<6, 12>(self, other),
            7 => mul_fixed::<7, 14>(self, other),
            8 => mul_fixed::<8, 16>(self, other),
            _ => self.mul_wide(other),
        }
    }

    fn mul_wide(&self, other: &MpReal) -> Result<MpReal, MpError> {
        let n = self.limbs.len();
        let a = &self.limbs;
        let b = &other.limbs;
        let mut prod: Scratch = SmallVec::from_elem(0, 2 * n);
        for i in 0..n {
            let ai = u128::from(a[i]);
            if ai == 0 {
                continue;
            }
            let mut carry = 0u128;
            for j in 0..n {
                let t = ai * u128::from(b[j]) + u128::from(prod[i + j]) + carry;
                prod[i + j] = t as u64;
                carry = t >> 64;
            }
            prod[i + n] = carry as u64;
        }
        let scale = self.exp + other.exp - 128 * n as i64;
        round_mag(&prod, false, scale, self.prec, self.neg != other.neg)
    }

    pub fn div(&self, other: &MpReal) -> Result<MpReal, MpError> {
        self.check_same_prec(other)?;
        if other.is_zero() {
            return Err(MpError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero_unchecked(self.prec));
        }
        let neg = self.neg != other.neg;
        let n = self.limbs.len();
        if n == 1 {
            let num = u128::from(self.limbs[0]) << 64;
            let den = u128::from(other.limbs[0]);
            let (q1, r1) = (num / den, num % den);
            let low = r1 << 64;
            let (q2, r2) = (low / den, low % den);
            let mag = [q2 as u64, q1 as u64, (q1 >> 64) as u64];
            return round_mag(&mag, r2 != 0, self.exp - other.exp - 128, self.prec, neg);
        }
        use num_integer::Integer;
        use num_traits::Zero;
        let k = 64 * n + 64;
        let num = crate::decimal::limbs_to_biguint(&self.limbs) << k;
        let den = crate::decimal::limbs_to_biguint(&other.limbs);
        let (q, r) = num.div_rem(&den);
        round_mag(
            &q.to_u64_digits(),
            !r.is_zero(),
            self.exp - other.exp - k as i64,
            self.prec,
            neg,
        )
    }

    /// Dump of (precision, sign, exponent, significand) for golden files:
    /// `p<prec>:<+|->:<exp>:<limbs as big-endian hex>`; zero is `p<prec>:+:0:0`.
    pub fn to_hex_dump(&self) -> String {
        let sign = if self.neg { '-' } else { '+' };
        if self.is_zero() {
            return format!("p{}:+:0:0", self.prec);
        }
        let mut hex = String::with_capacity(16 * self.limbs.len());
        for w in self.limbs.iter().rev() {
            hex.push_str(&format!("{w:016x}"));
        }
        format!("p{}:{}:{}:{}", self.prec, sign, self.exp, hex)
    }

    pub fn from_hex_dump(s: &str) -> Result<MpReal, MpError> {
        let bad = |why: &str| MpError::parse(s, why);
        let mut parts = s.trim().split(':');
        let (Some(p), Some(sign), Some(e), Some(hex), None) = (
            parts.next(),
            parts.next(),
            parts.next(),
            parts.next(),
            parts.next(),
        ) else {
            return Err(bad("expected p<prec>:<sign>:<exp>:<hex>"));
        };
        let prec: u32 = p
            .strip_prefix('p')
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("bad precision field"))?;
        check_prec(prec)?;
        let neg = match sign {
            "+" => false,
            "-" => true,
            _ => return Err(bad("bad sign field")),
        };
        let exp: i64 = e.parse().map_err(|_| bad("bad exponent field"))?;
        if hex == "0" {
            return MpReal::from_parts(prec, neg, exp, &vec![0; limbs_for(prec)]);
        }
        let n = limbs_for(prec);
        if hex.len() != 16 * n {
            return Err(bad("significand has the wrong length"));
        }
        let mut limbs = vec![0u64; n];
        for (i, chunk) in hex.as_bytes().chunks(16).enumerate() {
            let text = std::str::from_utf8(chunk).map_err(|_| bad("non-ascii"))?;
            limbs[n - 1 - i] = u64::from_str_radix(text, 16).map_err(|_| bad("bad hex digit"))?;
        }
        MpReal::from_parts(prec, neg, exp, &limbs)
    }
}

fn ldexp(mut v: f64, mut e: i64) -> f64 {
    if e > 2100 {
        return f64::INFINITY;
    }
    if e < -2200 {
        return 0.0;
    }
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e as i32)
}

/// `a + (±b)` where `b_neg` is the sign to use for `b`. Same precision assumed.
fn add_signed(a: &MpReal, b: &MpReal, b_neg: bool) -> Result<MpReal, MpError> {
    if b.is_zero() {
        return Ok(a.clone());
    }
    if a.is_zero() {
        let mut r = b.clone();
        r.neg = b_neg;
        return Ok(r);
    }
    let ord = a
        .exp
        .cmp(&b.exp)
        .then_with(|| a.limbs.iter().rev().cmp(b.limbs.iter().rev()));
    let (big, small, big_neg, small_neg) = if ord == Ordering::Less {
        (b, a, b_neg, a.neg)
    } else {
        (a, b, a.neg, b_neg)
    };
    let subtract = big_neg != small_neg;
    if subtract && ord == Ordering::Equal {
        return Ok(MpReal::zero_unchecked(a.prec));
    }
    let n = big.limbs.len();
    let prec = a.prec;
    match n {
        1 => add_fixed::<1, 3>(big, small, subtract, big_neg, prec),
        2 => add_fixed::<2, 4>(big, small, subtract, big_neg, prec),
        3 => add_fixed::<3, 5>(big, small, subtract, big_neg, prec),
        4 => add_fixed::<4, 6>(big, small, subtract, big_neg, prec),
        5 => add_fixed::<5, 7>(big, small, subtract, big_neg, prec),
        6 => add_fixed::<6, 8>(big, small, subtract, big_neg, prec),
        7 => add_fixed::<7, 9>(big, small, subtract, big_neg, prec),
        8 => add_fixed::<8, 10>(big, small, subtract, big_neg, prec),
        _ => add_wide(big, small, subtract, big_neg, prec),
    }
}

fn add_wide(big: &MpReal, small: &MpReal, subtract: bool, big_neg: bool, prec: u32) -> Result<MpReal, MpError> {
    let n = big.limbs.len();
    // buf = big · 2^64 with one guard limb below and one carry limb above.
    let mut buf: Scratch = SmallVec::from_elem(0, n + 2);
    buf[1..=n].copy_from_slice(&big.limbs);
    let d = big.exp - small.exp;
    let shift = 64 - d;
    let mut sm: Scratch = SmallVec::from_elem(0, n + 2);
    if d < 64 * (n as i64 + 1) {
        for (i, w) in sm.iter_mut().enumerate() {
            *w = read64(&small.limbs, 64 * i as i64 - shift);
        }
    }
    let lost = shift < 0 && any_below(&small.limbs, -shift);
    if subtract {
        let mut borrow = false;
        for i in 0..n + 2 {
            let (s1, b1) = buf[i].overflowing_sub(sm[i]);
            let (s2, b2) = s1.overflowing_sub(u64::from(borrow));
            buf[i] = s2;
            borrow = b1 || b2;
        }
        debug_assert!(!borrow);
        if lost {
            for w in buf.iter_mut() {
                let (s, b) = w.overflowing_sub(1);
                *w = s;
                if !b {
                    break;
                }
            }
        }
    } else {
        let mut carry = false;
        for i in 0..n + 2 {
            let (s1, c1) = buf[i].overflowing_add(sm[i]);
            let (s2, c2) = s1.overflowing_add(u64::from(carry));
            buf[i] = s2;
            carry = c1 || c2;
        }
        debug_assert!(!carry);
    }
    round_mag(&buf, lost, big.exp - 64 * n as i64 - 64, prec, big_neg)
}


/// Fixed-width variant of [`round_mag`] for `N`-limb results read from an
/// `M`-limb buffer whose top set bit lies in one of the two highest limbs.
/// Anything else (deep cancellation) goes through the slice version. The
/// rounding decision is computed without data-dependent branches.
#[inline(always)]
fn round_fixed<const N: usize, const M: usize>(
    mag: &[u64; M],
    sticky: bool,
    scale: i64,
    prec: u32,
    neg: bool,
) -> Result<MpReal, MpError> {
    let top = if mag[M - 1] != 0 { M - 1 } else { M - 2 };
    let bitlen = top * 64 + 64 - mag[top].leading_zeros() as usize;
    if mag[top] == 0 || bitlen <= 64 * N {
        return round_mag(mag, sticky, scale, prec, neg);
    }
    let lo = bitlen - 64 * N;
    let w = lo / 64;
    let s = (lo % 64) as u32;
    let mut r = [0u64; 8];
    for i in 0..N {
        let high = if w + i + 1 < M { mag[w + i + 1] } else { 0 };
        r[i] = (mag[w + i] >> s) | ((high << 1) << (63 - s));
    }
    let extra = 64 * N as u32 - prec;
    // the round bit is bit `extra - 1` of r[0], i.e. bit `rpos` of mag
    let rpos = lo + extra as usize - 1;
    let (rw, rs) = (rpos / 64, rpos % 64);
    let round_bit = (mag[rw] >> rs) & 1;
    let below = mag[..rw].iter().fold(u64::from(sticky), |acc, &x| acc | x) | (mag[rw] & ((1u64 << rs) - 1));
    let lsb = (r[0] >> extra) & 1;
    let up = round_bit & (u64::from(below != 0) | lsb);
    r[0] &= !((1u64 << extra) - 1);
    let mut carry = up << extra;
    for w in r[..N].iter_mut() {
        let t = u128::from(*w) + u128::from(carry);
        *w = t as u64;
        carry = (t >> 64) as u64;
    }
    let mut exp = scale + bitlen as i64;
    if carry != 0 {
        r[N - 1] = 1 << 63;
        exp += 1;
    }
    if exp > EXP_MAX {
        return Err(MpError::Overflow(exp));
    }
    if exp < EXP_MIN {
        return Err(MpError::Underflow(exp));
    }
    Ok(MpReal {
        prec,
        neg,
        exp,
        limbs: SmallVec::from_buf_and_len(r, N),
    })
}

#[inline(always)]
fn add_fixed<const N: usize, const M: usize>(
    big: &MpReal,
    small: &MpReal,
    subtract: bool,
    big_neg: bool,
    prec: u32,
) -> Result<MpReal, MpError> {
    let mut buf = [0u64; M];
    buf[1..=N].copy_from_slice(&big.limbs[..N]);
    // small · 2^64, zero-extended far enough that the shifted reads below
    // never leave the array
    let mut t = [0u64; 20];
    t[1..=N].copy_from_slice(&small.limbs[..N]);
    let d = (big.exp - small.exp) as u64;
    let mut sm = [0u64; M];
    let lost = if d < 64 * (N as u64 + 1) {
        let q = (d / 64) as usize;
        let r = (d % 64) as u32;
        let src = &t[q..q + M + 1];
        for i in 0..M {
            sm[i] = (src[i] >> r) | ((src[i + 1] << 1) << (63 - r));
        }
        // bits of small·2^64 below bit d; small limb i sits at word i + 1
        q > 0
            && (t[q] & ((1u64 << r) - 1) != 0 || small.limbs[..q - 1].iter().any(|&x| x != 0))
    } else {
        true
    };
    if subtract {
        // with bits lost below the buffer, compute buf - sm - 1 and let the
        // sticky flag stand for the remaining fraction
        let mut borrow = u64::from(lost);
        for i in 0..M {
            let t = u128::from(buf[i]).wrapping_sub(u128::from(sm[i]) + u128::from(borrow));
            buf[i] = t as u64;
            borrow = (t >> 127) as u64;
        }
    } else {
        let mut carry = 0u64;
        for i in 0..M {
            let t = u128::from(buf[i]) + u128::from(sm[i]) + u128::from(carry);
            buf[i] = t as u64;
            carry = (t >> 64) as u64;
        }
    }
    round_fixed::<N, M>(&buf, lost, big.exp - 64 * N as i64 - 64, prec, big_neg)
}

#[inline(always)]
fn mul_fixed<const N: usize, const M: usize>(a: &MpReal, b: &MpReal) -> Result<MpReal, MpError> {
    let a_l = &a.limbs[..N];
    let b_l = &b.limbs[..N];
    let mut prod = [0u64; M];
    for i in 0..N {
        let ai = u128::from(a_l[i]);
        let mut carry = 0u128;
        for j in 0..N {
            let t = ai * u128::from(b_l[j]) + u128::from(prod[i + j]) + carry;
            prod[i + j] = t as u64;
            carry = t >> 64;
        }
        prod[i + N] = carry as u64;
    }
    let scale = a.exp + b.exp - 128 * N as i64;
    round_fixed::<N, M>(&prod, false, scale, a.prec, a.neg != b.neg)
}

impl fmt::Debug for MpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MpReal({} = {})", self.to_hex_dump(), self.to_decimal(self.round_trip_digits()))
    }
}

impl fmt::Display for MpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(self.round_trip_digits()))
    }
}
