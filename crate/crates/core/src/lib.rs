pub mod cipher;
pub mod cup;
pub mod error;
pub mod literal;
pub mod lorenz;
pub mod oneway;
pub mod quality;

pub use error::{Error, ErrorKind, FormatError, Result};
pub use literal::Literal;
