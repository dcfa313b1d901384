use alloc::string::String;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length {n} has prime factor {factor} above the largest array size {k_max}")]
    Unfactorable { n: usize, factor: usize, k_max: usize },
    #[error("invalid factorization: {0}")]
    InvalidFactors(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("no programmed array can execute a {0}-point DFT")]
    MissingArray(usize),
    #[error("invalid hardware model: {0}")]
    Model(String),
    #[error("array size {size} is outside the energy table (max {max})")]
    OutsideEnergyTable { size: usize, max: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
