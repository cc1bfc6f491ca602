use thiserror::Error;

/// Errors raised by the kernel.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid context: {0}")]
    InvalidContext(String),

    #[error("context mismatch")]
    ContextMismatch,

    #[error("bundle mismatch: {0}")]
    BundleMismatch(String),

    #[error("multi-index {sub:?} is not componentwise below {sup:?}")]
    NotBelow { sub: Vec<u32>, sup: Vec<u32> },

    #[error("invalid multi-index {0:?}")]
    InvalidIndex(Vec<u32>),

    #[error("coordinate index {0} out of range")]
    BadCoordinate(usize),

    #[error("fiber index {0} out of range")]
    BadFiber(usize),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("{0}")]
    NotHomogeneous(String),

    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    #[error("order mismatch: {0}")]
    OrderMismatch(String),

    #[error("order violation: {0}")]
    OrderViolation(OrderWitness),

    #[error("degree inconsistency: {0}")]
    DegreeInconsistency(String),

    #[error("operator does not have a scalar symbol: {0}")]
    NotScalar(String),

    #[error("parse error: {0}")]
    Parse(String),
}

/// Probe data showing that a linear map is not of the claimed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderWitness {
    pub claimed_order: usize,
    /// Multi-index of the coordinate tuple fed to the iterated commutator.
    pub index: Vec<u32>,
    /// Frame element the commutator was applied to.
    pub fiber: String,
    pub detail: String,
}

impl std::fmt::Display for OrderWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "claimed order {}, probe index {:?} on frame `{}`: {}",
            self.claimed_order, self.index, self.fiber, self.detail
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
