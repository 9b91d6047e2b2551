use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid CSR matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix market line {line}: {msg}")]
    MatrixMarket { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("unknown stencil kind `{0}`")]
    UnknownStencil(String),

    #[error("invalid grid dimensions {0:?}: every direction needs at least one point")]
    InvalidGrid(Vec<usize>),

    #[error("rank {rank} out of range for {num_procs} processes")]
    RankOutOfRange { rank: usize, num_procs: usize },

    #[error("node {node} out of range for {num_nodes} nodes")]
    NodeOutOfRange { node: usize, num_nodes: usize },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("partition covers {partition} rows but the matrix has {rows}")]
    PartitionMismatch { rows: usize, partition: usize },

    #[error("strength tolerance {0} outside (0, 1]")]
    InvalidTheta(f64),

    #[error("fine row {row} has strong connections but no strong coarse neighbor")]
    MissingStrongCoarse { row: usize },

    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },

    #[error("inconsistent counters: s_proc = {s_proc} exceeds s_node = {s_node}")]
    InconsistentCounters { s_proc: f64, s_node: f64 },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("configuration error in `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("schedule delivered payload ({origin}, {index}) from rank {src} which never held it")]
    MissingPayload {
        src: usize,
        origin: usize,
        index: usize,
    },

    #[error("solve diverged at iteration {iteration}: relative residual {residual:e}")]
    Diverged { iteration: usize, residual: f64 },
}
