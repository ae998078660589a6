use kemeny_core::KemenyError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{}", one_based(.0))]
    Core(#[from] KemenyError),
    #[error("report failed re-validation: {0}")]
    Validation(String),
    #[error("could not serialise report: {0}")]
    Serialize(String),
}

/// Core errors carry 0-based indices; files and flags use 1-based labels.
fn one_based(e: &KemenyError) -> String {
    use KemenyError::*;
    match e {
        NonFinite { row, col } => NonFinite { row: row + 1, col: col + 1 }.to_string(),
        NegativeEntry { row, col, value } => NegativeEntry { row: row + 1, col: col + 1, value: *value }.to_string(),
        RowSumViolation { row, residual } => RowSumViolation { row: row + 1, residual: *residual }.to_string(),
        BadStateIndex { index, m } => BadStateIndex { index: index + 1, m: *m }.to_string(),
        ZeroOutDegree(v) => ZeroOutDegree(v + 1).to_string(),
        SelfLoop(v) => SelfLoop(v + 1).to_string(),
        NotStochasticAfterPerturbation(inner) => format!("perturbed matrix is not stochastic: {}", one_based(inner)),
        other => other.to_string(),
    }
}

/// Failures of the arithmetic itself, as opposed to bad input.
fn is_numerical(e: &KemenyError) -> bool {
    use KemenyError::*;
    match e {
        SingularSystem
        | EigenFailure
        | RouteDisagreement { .. }
        | ConstancyViolation { .. }
        | SingularSubmatrix
        | Inconsistent { .. }
        | NotAGInverse { .. }
        | EigenvalueAtOneRepeated { .. }
        | NonTermination(_) => true,
        NotStochasticAfterPerturbation(inner) => is_numerical(inner),
        _ => false,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::Parse { .. } => EXIT_INPUT,
            CliError::Core(e) if is_numerical(e) => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_INPUT,
            CliError::Validation(_) | CliError::Serialize(_) => EXIT_NUMERICAL,
        }
    }
}
