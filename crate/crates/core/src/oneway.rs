//! The keyed one-way map `A = L(σ, γ, β, h, p, t, x₀, y₀, z₀)` and the
//! 8-byte hash built on it.

use std::fmt;
use std::str::FromStr;

use mpreal::MpReal;

use crate::error::{Error, Result};
use crate::literal::Literal;
use crate::lorenz::{integrate, IntegrationSpec, LorenzParams, LorenzSetup, State3};

/// Smallest precision that yields a full 256-bit digest.
pub const MIN_HASH_PRECISION: u32 = 256;

/// The nine base parameters and the step perturbation scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseConfig {
    pub setup: LorenzSetup,
    pub h: Literal,
    pub t: Literal,
    pub precision: u32,
    /// `h′ = h + m₇ · h_perturb_scale`.
    pub h_perturb_scale: Literal,
}

impl Default for BaseConfig {
    fn default() -> Self {
        BaseConfig {
            setup: LorenzSetup {
                sigma: Literal::Decimal("10.0".into()),
                gamma: Literal::Decimal("28.0".into()),
                beta: Literal::Quotient("8".into(), "3".into()),
                x0: 5.into(),
                y0: 5.into(),
                z0: 10.into(),
            },
            h: Literal::Decimal("0.01".into()),
            t: 200.into(),
            precision: 256,
            h_perturb_scale: Literal::Decimal("0.00001".into()),
        }
    }
}

impl BaseConfig {
    /// Perturbation scale of one thousandth for every byte, `h` included.
    pub const WIDE_H_PERTURB: &'static str = "0.001";

    /// Applies `name = value` lines on top of `self`. Values are decimals or
    /// `a/b` quotients; `p` is an integer. `#` starts a comment.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| Error::Config(format!("line {}: {msg}", i + 1));
            let (name, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `name = value`, got {line:?}")))?;
            let (name, value) = (name.trim(), value.trim());
            if name == "p" {
                self.precision = value
                    .parse()
                    .map_err(|_| at(format!("p must be an integer, got {value:?}")))?;
                continue;
            }
            let lit = Literal::parse(value).map_err(|e| at(e.to_string()))?;
            let slot = match name {
                "sigma" => &mut self.setup.sigma,
                "gamma" => &mut self.setup.gamma,
                "beta" => &mut self.setup.beta,
                "x0" => &mut self.setup.x0,
                "y0" => &mut self.setup.y0,
                "z0" => &mut self.setup.z0,
                "h" => &mut self.h,
                "t" => &mut self.t,
                "h_perturb_scale" => &mut self.h_perturb_scale,
                _ => return Err(at(format!("unknown parameter {name:?}"))),
            };
            *slot = lit;
        }
        Ok(())
    }

    pub fn from_config(text: &str) -> Result<Self> {
        let mut base = BaseConfig::default();
        base.apply_config(text)?;
        Ok(base)
    }

    /// Checks that the base itself is a valid input.
    pub fn validate(&self) -> Result<()> {
        encode_key(self, &KeyBlock::default()).map(|_| ())
    }
}

/// Eight message bytes `m₁ … m₈`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeyBlock(pub [u8; 8]);

/// How a key is written on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyFormat {
    /// 16 hex digits.
    Hex,
    /// 8 bytes of text taken verbatim.
    Ascii,
    /// Hex when the text is 16 hex digits, else 8-byte text.
    Auto,
}

impl KeyBlock {
    pub fn parse(s: &str, format: KeyFormat) -> Result<Self> {
        let is_hex = s.len() == 16 && s.bytes().all(|b| b.is_ascii_hexdigit());
        match format {
            KeyFormat::Hex => Self::from_hex(s),
            KeyFormat::Ascii => Self::from_ascii(s),
            KeyFormat::Auto if is_hex => Self::from_hex(s),
            KeyFormat::Auto => Self::from_ascii(s),
        }
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let mut m = [0u8; 8];
        hex::decode_to_slice(s, &mut m)
            .map_err(|_| Error::Config(format!("key must be 16 hex digits, got {s:?}")))?;
        Ok(KeyBlock(m))
    }

    pub fn from_ascii(s: &str) -> Result<Self> {
        let bytes: [u8; 8] = s
            .as_bytes()
            .try_into()
            .map_err(|_| Error::Config(format!("key must be exactly 8 bytes, got {}", s.len())))?;
        Ok(KeyBlock(bytes))
    }

    pub fn flip_bit(self, bit: u32) -> Self {
        let mut m = self.0;
        m[(bit / 8) as usize] ^= 0x80 >> (bit % 8);
        KeyBlock(m)
    }
}

impl fmt::Display for KeyBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl FromStr for KeyBlock {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KeyBlock::parse(s, KeyFormat::Auto)
    }
}

/// 256 output bits, most significant first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest256(pub [u8; 32]);

impl Digest256 {
    /// Bit `i`, counted from the most significant bit of byte 0.
    pub fn bit(&self, i: usize) -> bool {
        self.0[i / 8] >> (7 - i % 8) & 1 == 1
    }

    pub fn hamming(&self, other: &Digest256) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a ^ b).count_ones()).sum()
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let mut d = [0u8; 32];
        hex::decode_to_slice(s, &mut d)
            .map_err(|_| Error::Config(format!("digest must be 64 hex digits, got {s:?}")))?;
        Ok(Digest256(d))
    }
}

impl fmt::Display for Digest256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

/// A fully formed input to the one-way map.
#[derive(Debug, Clone, PartialEq)]
pub struct OneWayInput {
    pub params: LorenzParams,
    pub initial: State3,
    pub h: MpReal,
    pub precision: u32,
    pub t: MpReal,
}

impl OneWayInput {
    /// Requires `p ≥ 256`, `t ≥ 200`, `γ ≥ 28` and `h > 0`.
    pub fn new(params: LorenzParams, initial: State3, h: MpReal, t: MpReal) -> Result<Self> {
        let precision = h.precision();
        if precision < MIN_HASH_PRECISION {
            return Err(Error::Config(format!(
                "precision must be at least {MIN_HASH_PRECISION} bits, got {precision}"
            )));
        }
        if h.is_zero() || h.is_negative() {
            return Err(Error::Config("step h must be > 0".into()));
        }
        if t.compare(&MpReal::from_u64(200, precision)?).is_lt() {
            return Err(Error::Config(format!("time t must be at least 200, got {}", t.to_f64())));
        }
        if !params.is_chaotic_regime() {
            return Err(Error::Config(format!(
                "γ must be at least 28, got {}",
                params.gamma.to_f64()
            )));
        }
        Ok(OneWayInput {
            params,
            initial,
            h,
            precision,
            t,
        })
    }

    pub fn to_spec(&self) -> Result<IntegrationSpec> {
        IntegrationSpec::new(self.params.clone(), self.initial.clone(), self.h.clone(), self.t.clone())
    }
}

/// `v ⊕ (m ⊘ 1000)`.
fn thousandths(v: &MpReal, m: u8) -> Result<MpReal> {
    let p = v.precision();
    let d = MpReal::from_u64(m.into(), p)?.div(&MpReal::from_u64(1000, p)?)?;
    Ok(v.add(&d)?)
}

/// Perturbs the base by the key bytes: `m₁ … m₆` add `m/1000` to γ, σ, β,
/// x₀, y₀, z₀; `h′ = h ⊕ (m₇ ⊗ scale)`; `t′ = t ⊕ m₈`.
pub fn encode_key(base: &BaseConfig, k: &KeyBlock) -> Result<OneWayInput> {
    let p = base.precision;
    if p < MIN_HASH_PRECISION {
        return Err(Error::Config(format!(
            "precision must be at least {MIN_HASH_PRECISION} bits, got {p}"
        )));
    }
    let [m1, m2, m3, m4, m5, m6, m7, m8] = k.0;
    let s = &base.setup;
    let params = LorenzParams::new(
        thousandths(&s.sigma.at(p)?, m2)?,
        thousandths(&s.gamma.at(p)?, m1)?,
        thousandths(&s.beta.at(p)?, m3)?,
    )?;
    let initial = State3::new(
        thousandths(&s.x0.at(p)?, m4)?,
        thousandths(&s.y0.at(p)?, m5)?,
        thousandths(&s.z0.at(p)?, m6)?,
    )?;
    let scale = base.h_perturb_scale.at(p)?;
    let h = base.h.at(p)?.add(&MpReal::from_u64(m7.into(), p)?.mul(&scale)?)?;
    let t = base.t.at(p)?.add(&MpReal::from_u64(m8.into(), p)?)?;
    OneWayInput::new(params, initial, h, t)
}

/// Integrates the input to `t`.
pub fn one_way(input: &OneWayInput) -> Result<State3> {
    integrate(&input.to_spec()?)
}

/// Digest of the `x` coordinate: bit 0 is the sign of `x`, bits 1 to 255
/// are the significand bits following the leading one. Zero maps to all
/// zero bits.
pub fn extract_digest(s: &State3) -> Result<Digest256> {
    let x = &s.x;
    if x.precision() < MIN_HASH_PRECISION {
        return Err(Error::Config(format!(
            "digest needs x at {MIN_HASH_PRECISION} bits or more, got {}",
            x.precision()
        )));
    }
    let mut d = [0u8; 32];
    if x.is_zero() {
        return Ok(Digest256(d));
    }
    d[0] = u8::from(x.is_negative()) << 7;
    for i in 1..256u32 {
        if x.significand_bit(i) {
            d[(i / 8) as usize] |= 0x80 >> (i % 8);
        }
    }
    Ok(Digest256(d))
}

/// `extract_digest(one_way(encode_key(base, k)))`.
pub fn hash8(base: &BaseConfig, k: &KeyBlock) -> Result<Digest256> {
    extract_digest(&one_way(&encode_key(base, k)?)?)
}
