use thiserror::Error;

/// Errors raised by the chain, inverse, passage, mixing, perturbation and
/// graph routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KemenyError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("a chain needs at least 2 states, got {0}")]
    TooFewStates(usize),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to 1 + {residual:e}")]
    RowSumViolation { row: usize, residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("chain is not irreducible")]
    NotIrreducible,
    #[error("linear system is singular")]
    SingularSystem,
    #[error("eigenvalue iteration did not converge")]
    EigenFailure,
    #[error("degenerate parameters: pi^T t = {pi_t:e}, u^T e = {u_e:e}")]
    DegenerateParameters { pi_t: f64, u_e: f64 },
    #[error("system is inconsistent (residual {residual:e})")]
    Inconsistent { residual: f64 },
    #[error("matrix is not a g-inverse of I - P (residual {residual:e})")]
    NotAGInverse { residual: f64 },
    #[error("state index {index} out of range for {m} states")]
    BadStateIndex { index: usize, m: usize },
    #[error("K_i not constant (max relative deviation {deviation:e})")]
    ConstancyViolation { deviation: f64 },
    #[error("wrong g-inverse kind: expected {expected}")]
    WrongKind { expected: &'static str },
    #[error("mean first passage matrix must use the classic convention")]
    WrongConvention,
    #[error("{count} eigenvalues at 1; expected exactly one")]
    EigenvalueAtOneRepeated { count: usize },
    #[error("routes disagree: {what} ({a} vs {b})")]
    RouteDisagreement { what: &'static str, a: f64, b: f64 },
    #[error("principal submatrix is singular")]
    SingularSubmatrix,
    #[error("moment formulas need a g-inverse with constant row sums")]
    RequiresGeConstant,
    #[error("chain is reducible")]
    Reducible,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("perturbed matrix is not stochastic: {0}")]
    NotStochasticAfterPerturbation(Box<KemenyError>),
    #[error("perturbation is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("base matrix is not symmetric")]
    NotSymmetricBase,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("vertex {0} has no out-going edge")]
    ZeroOutDegree(usize),
    #[error("graph is directed")]
    NotUndirected,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("chain is not reversible")]
    NotReversible,
    #[error("network is singular (disconnected support)")]
    SingularNetwork,
    #[error("graph is not regular")]
    NotRegular,
    #[error("graph has a self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("digraph is not strongly connected")]
    NotStronglyConnected,
    #[error("exact longest-cycle search is limited to {limit} vertices, got {m}")]
    TooLargeForExactCycleSearch { m: usize, limit: usize },
    #[error("simulation exceeded {0} steps")]
    NonTermination(u64),
    #[error("unknown name {0:?}")]
    UnknownName(String),
}

pub type Result<T> = std::result::Result<T, KemenyError>;
