use std::fmt;
use std::str::FromStr;

use mpreal::{parse_decimal_exact, MpReal};

use crate::error::{Error, Result};

/// A numeric parameter kept in its written form, so that it can be formed at
/// any precision with the same rounding rule.
///
/// `"0.01"` is rounded once from the exact decimal. `"8/3"` rounds the
/// numerator and denominator separately and then divides, which is one
/// rounding when both are small integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Decimal(String),
    Quotient(String, String),
}

impl Literal {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let check = |part: &str| {
            parse_decimal_exact(part)
                .map(|_| part.to_string())
                .map_err(|e| Error::Config(format!("bad number {s:?}: {e}")))
        };
        match s.split_once('/') {
            None => Ok(Literal::Decimal(check(s)?)),
            Some((a, b)) => {
                let (a, b) = (check(a.trim())?, check(b.trim())?);
                let (num, _) = parse_decimal_exact(&b).expect("checked above");
                if num == 0.into() {
                    return Err(Error::Config(format!("bad number {s:?}: zero denominator")));
                }
                Ok(Literal::Quotient(a, b))
            }
        }
    }

    /// The value at `prec` bits.
    pub fn at(&self, prec: u32) -> Result<MpReal> {
        Ok(match self {
            Literal::Decimal(d) => MpReal::from_decimal(d, prec)?,
            Literal::Quotient(a, b) => {
                MpReal::from_decimal(a, prec)?.div(&MpReal::from_decimal(b, prec)?)?
            }
        })
    }

    /// Nearest `f64`, for reporting.
    pub fn to_f64(&self) -> f64 {
        self.at(64).map_or(f64::NAN, |v| v.to_f64())
    }
}

impl FromStr for Literal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Literal::parse(s)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Decimal(d) => f.write_str(d),
            Literal::Quotient(a, b) => write!(f, "{a}/{b}"),
        }
    }
}

impl From<u32> for Literal {
    fn from(v: u32) -> Self {
        Literal::Decimal(v.to_string())
    }
}
