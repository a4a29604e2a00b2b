use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid Dyck path: {0}")]
    InvalidDyckPath(String),

    #[error("permutation {0} contains the pattern 321")]
    Contains321(String),

    #[error("permutation {0} is decomposable; a single block is required")]
    Decomposable(String),

    #[error("a block of length at least 2 is required")]
    TrivialBlock,

    #[error("constraint polytope has empty interior")]
    Degenerate,

    #[error("no closed form available: {0}")]
    Unsupported(String),

    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("closed-form methods disagree for {sigma}: {detail}")]
    MethodDisagreement { sigma: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
