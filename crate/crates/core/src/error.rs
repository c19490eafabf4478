use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("split {split} out of range for a tensor with {axes} axes")]
    InvalidSplit { split: usize, axes: usize },

    #[error("columns are not orthonormal (residual {residual:.3e})")]
    NotIsometry { residual: f64 },

    #[error("amplitude vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("infeasible rank caps: {0}")]
    InfeasibleRanks(String),

    #[error("corrupt MPS: {0}")]
    CorruptMps(String),

    #[error("stale truncation step at bond {bond}: expected rank {expected}, found {found}")]
    StaleStep {
        bond: usize,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("MPS is not right-canonical (residual {residual:.3e})")]
    NotCanonical { residual: f64 },

    #[error("gate on qubits {start}..{end} does not fit a {num_qubits}-qubit register")]
    SpanError {
        start: usize,
        end: usize,
        num_qubits: usize,
    },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("gate matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("invalid target spec: {0}")]
    InvalidSpec(String),

    #[error("bad input: {0}")]
    BadInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
