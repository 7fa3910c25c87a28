use thiserror::Error;

/// Errors raised by the library, split at the CLI boundary into input errors
/// (exit code 2) and mathematical impossibilities (exit code 1).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },

    #[error("variable index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },

    #[error("odd exponent: x{var} appears with exponent {exponent}")]
    OddExponent { var: usize, exponent: u32 },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("not quasihomogeneous-solvable: {0}")]
    NotSolvable(String),

    #[error("term {exponent} has weighted degree {found}, expected {expected}")]
    NotQuasihomogeneous {
        exponent: String,
        found: u64,
        expected: u64,
    },

    #[error("empty index set")]
    EmptyIndexSet,

    #[error("index set {set} is larger than the primed-condition bound {bound}")]
    PrimedBound { set: String, bound: usize },

    #[error("hypothesis of the completion theorem unsatisfied: no multipower for J = {0}")]
    NoMultipower(String),

    #[error("no epsilon choice certified after {attempts} attempts (seed {seed})")]
    RetriesExhausted { attempts: usize, seed: u64 },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("invalid orbifold input: {0}")]
    InvalidOrbifold(String),

    #[error("sector product not implemented for {0}")]
    OutOfScope(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// True when the error stems from malformed or inadmissible input rather
    /// than from a mathematical obstruction.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NotSolvable(_)
                | Error::NoMultipower(_)
                | Error::RetriesExhausted { .. }
                | Error::Invariant(_)
                | Error::OutOfScope(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
