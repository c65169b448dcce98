use alloc::string::String;
use core::fmt;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Image dimensions are incompatible with the requested operation.
    Dimension(String),
    /// A parameter is out of range or unknown.
    Config(String),
    /// A decomposition or block grid is internally inconsistent.
    Structure(String),
    /// A sample is NaN or infinite.
    NonFinite { index: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(msg) => write!(f, "dimension error: {msg}"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Structure(msg) => write!(f, "structure error: {msg}"),
            Error::NonFinite { index } => write!(f, "non-finite sample at index {index}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! dim_err {
    ($($arg:tt)*) => { $crate::Error::Dimension(alloc::format!($($arg)*)) };
}
macro_rules! config_err {
    ($($arg:tt)*) => { $crate::Error::Config(alloc::format!($($arg)*)) };
}
macro_rules! structure_err {
    ($($arg:tt)*) => { $crate::Error::Structure(alloc::format!($($arg)*)) };
}
pub(crate) use {config_err, dim_err, structure_err};
