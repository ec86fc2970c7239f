use alloc::string::String;

/// Errors raised by state construction, gates and the protocol pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("degenerate state: amplitudes sum to the zero vector")]
    Degenerate,
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("state does not factor across the spatial/OAM registers")]
    NotFactorizable,
    #[error("inconsistent results: {0}")]
    Inconsistent(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! input_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Input(alloc::format!($($arg)*))
    };
}

macro_rules! resource_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Resource(alloc::format!($($arg)*))
    };
}

pub(crate) use input_err;
pub(crate) use resource_err;
