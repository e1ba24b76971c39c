//! Deterministic binary multiple-precision floating point.
//!
//! Every [`MpReal`] carries its own significand width `p`. The four basic
//! operations return the exact real result rounded once to `p` bits, nearest
//! with ties to even, so a computation that fixes its operand order produces
//! bit-identical output on every run and every platform. There is no global
//! rounding state, no infinities, and no NaN: leaving the exponent range is a
//! reported error.
//!
//! ```
//! use mpreal::{MpReal, Op};
//!
//! let eight = MpReal::from_u64(8, 4).unwrap();
//! let three = MpReal::from_u64(3, 4).unwrap();
//! let q = eight.op(&three, Op::Div).unwrap();
//! assert_eq!(q.to_f64(), 2.75);
//! ```

mod decimal;
mod error;
mod real;

pub use decimal::parse_decimal_exact;
pub use error::MpError;
pub use real::{MpReal, Op, EXP_MAX, EXP_MIN, MAX_PREC, MIN_PREC};

/// Strict left-to-right fold `((v0 op0 v1) op1 v2) …`.
///
/// Errors carry the index of the failing operator.
pub fn compose(values: &[MpReal], ops: &[Op]) -> Result<MpReal, MpError> {
    let Some((first, rest)) = values.split_first() else {
        return Err(MpError::FoldShape {
            values: 0,
            ops: ops.len(),
            expected: 0,
        });
    };
    if ops.len() != rest.len() {
        return Err(MpError::FoldShape {
            values: values.len(),
            ops: ops.len(),
            expected: rest.len(),
        });
    }
    let mut acc = first.clone();
    for (index, (v, &op)) in rest.iter().zip(ops).enumerate() {
        acc = acc.op(v, op).map_err(|e| MpError::Step {
            index,
            source: Box::new(e),
        })?;
    }
    Ok(acc)
}
