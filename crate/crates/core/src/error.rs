use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid chain length, sector truncation, coupling profile or other
    /// experiment parameter.
    #[error("configuration error: {0}")]
    Config(String),
    /// An argument outside the domain of an operation (state not in the
    /// basis, bad site index, mismatched bases, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical precondition was violated (non-Hermitian input, invalid
    /// density matrix, no exact revival).
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Least-squares trend fit could not be computed.
    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! config_err {
    ($($arg:tt)*) => { $crate::error::Error::Config(format!($($arg)*)) };
}
macro_rules! domain_err {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}
macro_rules! numerical_err {
    ($($arg:tt)*) => { $crate::error::Error::Numerical(format!($($arg)*)) };
}

pub(crate) use config_err;
pub(crate) use domain_err;
pub(crate) use numerical_err;
