//! Decimal and rational conversions.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::MpError;
use crate::real::{check_prec, limbs_for, round_mag, MpReal};

/// Decimal exponents beyond this are rejected instead of expanded.
const MAX_DEC_EXP: i64 = 100_000;

pub(crate) fn limbs_to_biguint(limbs: &[u64]) -> BigUint {
    let mut words = Vec::with_capacity(limbs.len() * 2);
    for &w in limbs {
        words.push(w as u32);
        words.push((w >> 32) as u32);
    }
    BigUint::new(words)
}

/// An exact decimal literal `±digits[.digits][e±digits]` as `num / den`.
pub fn parse_decimal_exact(s: &str) -> Result<(BigInt, BigUint), MpError> {
    let bytes = s.as_bytes();
    let mut i = 0;
    let mut neg = false;
    if let Some(&c) = bytes.first() {
        if c == b'+' || c == b'-' {
            neg = c == b'-';
            i = 1;
        }
    }
    let mut digits = String::new();
    let mut frac_len: i64 = 0;
    let mut seen_digit = false;
    let mut seen_dot = false;
    while i < bytes.len() {
        match bytes[i] {
            c @ b'0'..=b'9' => {
                digits.push(c as char);
                seen_digit = true;
                if seen_dot {
                    frac_len += 1;
                }
            }
            b'.' if !seen_dot => seen_dot = true,
            b'e' | b'E' => break,
            _ => return Err(MpError::parse(s, "unexpected character")),
        }
        i += 1;
    }
    if !seen_digit {
        return Err(MpError::parse(s, "no digits"));
    }
    let mut exp10: i64 = 0;
    if i < bytes.len() {
        let tail = &s[i + 1..];
        if tail.is_empty() || !tail.trim_start_matches(['+', '-']).bytes().all(|c| c.is_ascii_digit()) {
            return Err(MpError::parse(s, "malformed exponent"));
        }
        exp10 = tail
            .parse::<i64>()
            .map_err(|_| MpError::parse(s, "malformed exponent"))?;
    }
    let exp10 = exp10 - frac_len;
    if exp10.abs() > MAX_DEC_EXP {
        return Err(MpError::parse(s, "decimal exponent out of supported range"));
    }
    let mant: BigUint = digits
        .parse()
        .map_err(|_| MpError::parse(s, "bad digits"))?;
    let ten = BigUint::from(10u32);
    let (num, den) = if exp10 >= 0 {
        (mant * ten.pow(exp10 as u32), BigUint::one())
    } else {
        (mant, ten.pow((-exp10) as u32))
    };
    let sign = if neg && !num.is_zero() {
        Sign::Minus
    } else {
        Sign::Plus
    };
    Ok((BigInt::from_biguint(sign, num), den))
}

impl MpReal {
    /// Nearest `prec`-bit value to `num / den` (ties to even).
    pub fn from_ratio(num: &BigInt, den: &BigUint, prec: u32) -> Result<MpReal, MpError> {
        check_prec(prec)?;
        if den.is_zero() {
            return Err(MpError::DivisionByZero);
        }
        let mag = num.magnitude();
        if mag.is_zero() {
            return MpReal::zero(prec);
        }
        let k = (i64::from(prec) + 3 + den.bits() as i64 - mag.bits() as i64).max(0);
        let (q, r) = (mag << k as usize).div_rem(den);
        round_mag(
            &q.to_u64_digits(),
            !r.is_zero(),
            -k,
            prec,
            num.sign() == Sign::Minus,
        )
    }

    /// Nearest `prec`-bit value to the decimal literal `s`.
    pub fn from_decimal(s: &str, prec: u32) -> Result<MpReal, MpError> {
        check_prec(prec)?;
        let (num, den) = parse_decimal_exact(s)?;
        MpReal::from_ratio(&num, &den, prec)
    }

    /// Exact value as `num / den` with `den` a power of two.
    pub fn to_ratio(&self) -> (BigInt, BigUint) {
        if self.is_zero() {
            return (BigInt::zero(), BigUint::one());
        }
        let n = limbs_for(self.precision()) as i64;
        let m = limbs_to_biguint(self.significand_limbs());
        let s = self.exponent() - 64 * n;
        let (num, den) = if s >= 0 {
            (m << s as usize, BigUint::one())
        } else {
            (m, BigUint::one() << (-s) as usize)
        };
        let g = num.gcd(&den);
        let sign = if self.is_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        };
        (BigInt::from_biguint(sign, num / &g), den / g)
    }

    /// Decimal digits sufficient for an exact round trip: `⌈p·log10 2⌉ + 2`.
    pub fn round_trip_digits(&self) -> usize {
        (f64::from(self.precision()) * std::f64::consts::LOG10_2).ceil() as usize + 2
    }

    /// Scientific notation with `digits` significant digits, correctly rounded
    /// (ties to even), e.g. `-1.2500e1`. Zero prints as `0`.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let digits = digits.max(1);
        let n = limbs_for(self.precision()) as i64;
        let m = limbs_to_biguint(self.significand_limbs());
        let s = self.exponent() - 64 * n;
        let ten = BigUint::from(10u32);
        let lower = ten.pow(digits as u32 - 1);
        let upper = &lower * &ten;
        let mut e10 = ((self.exponent() - 1) as f64 * std::f64::consts::LOG10_2).floor() as i64;
        let d = loop {
            let t = digits as i64 - 1 - e10;
            let mut num = m.clone();
            let mut den = BigUint::one();
            if s >= 0 {
                num <<= s as usize;
            } else {
                den <<= (-s) as usize;
            }
            if t >= 0 {
                num *= ten.pow(t as u32);
            } else {
                den *= ten.pow((-t) as u32);
            }
            let (q, r) = num.div_rem(&den);
            let twice = r << 1usize;
            let q = match twice.cmp(&den) {
                std::cmp::Ordering::Greater => q + 1u32,
                std::cmp::Ordering::Equal if q.is_odd() => q + 1u32,
                _ => q,
            };
            if q >= upper {
                e10 += 1;
            } else if q < lower {
                e10 -= 1;
            } else {
                break q;
            }
        };
        let text = d.to_string();
        let sign = if self.is_negative() { "-" } else { "" };
        if digits == 1 {
            format!("{sign}{text}e{e10}")
        } else {
            format!("{sign}{}.{}e{e10}", &text[..1], &text[1..])
        }
    }
}
