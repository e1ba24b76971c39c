use thiserror::Error;

/// Errors raised by multiple-precision arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MpError {
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("exponent overflow: result exponent {0} exceeds the supported range")]
    Overflow(i64),
    #[error("exponent underflow: result exponent {0} is below the supported range")]
    Underflow(i64),
    #[error("precision mismatch: {left} bits vs {right} bits")]
    PrecisionMismatch { left: u32, right: u32 },
    #[error("invalid precision {0}: must lie in {min}..={max}", min = crate::MIN_PREC, max = crate::MAX_PREC)]
    InvalidPrecision(u32),
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("non-finite input value")]
    NonFinite,
    #[error("step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<MpError>,
    },
    #[error("fold shape: {values} values need {expected} operators, got {ops}")]
    FoldShape {
        values: usize,
        ops: usize,
        expected: usize,
    },
}

impl MpError {
    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        MpError::Parse {
            input: input.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors that mean a value left the representable range.
    pub fn is_non_finite(&self) -> bool {
        match self {
            MpError::Overflow(_) | MpError::Underflow(_) | MpError::NonFinite => true,
            MpError::Step { source, .. } => source.is_non_finite(),
            _ => false,
        }
    }
}
