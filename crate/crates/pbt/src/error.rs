use thiserror::Error;

#[derive(Debug, Error)]
pub enum PbtError {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension guard exceeded: d^n = {dim} > {max}")]
    DimensionGuard { dim: u128, max: u128 },
    #[error("enumeration guard exceeded: n = {n} > {max}")]
    EnumerationGuard { n: u32, max: u32 },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PbtError>;
