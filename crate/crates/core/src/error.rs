use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("cubature is exact to degree {have}, degree {need} is required")]
    InsufficientDegree { need: usize, have: usize },

    #[error("band limit {have} is below the required {need}")]
    InsufficientBandLimit { need: usize, have: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator block of degree {degree} is singular")]
    SingularBlock { degree: usize },

    #[error("invalid cubature: {0}")]
    InvalidCubature(String),

    #[error("both noise levels are zero and no maximal level was given")]
    NoiseFree,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
