use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("generators do not span Q^{0}")]
    RankDeficient(usize),
    #[error("lattices are not nested; witness {0}")]
    NotNested(String),
    #[error("{0} is not a member of the group")]
    NotMember(String),
    #[error("cannot factor {0} by trial division up to the prime bound")]
    Factorization(String),
    #[error("{what} = {value} exceeds the limit {limit}")]
    Bound { what: &'static str, value: String, limit: String },
    #[error("torus factor present (r = {0}); operation requires a torus-free protorus")]
    TorusFactor(usize),
    #[error("matrix does not define a homomorphism; witness {0}")]
    NotHomomorphism(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl Error {
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Bound { .. })
    }
}
