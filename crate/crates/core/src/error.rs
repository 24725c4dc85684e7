use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed graph file: {0}")]
    Malformed(String),

    #[error("dangling endpoint: relation `{relation}` edge ({src}, {dst}) out of range")]
    DanglingEndpoint {
        relation: String,
        src: usize,
        dst: usize,
    },

    #[error("split masks overlap at target node {0}")]
    MaskOverlap(usize),

    #[error("missing label for split node {0}")]
    MissingLabel(usize),

    #[error("unknown node type `{0}`")]
    UnknownType(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not symmetric")]
    Asymmetric,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero signal: Rayleigh quotient undefined")]
    ZeroSignal,

    #[error("filter {0} is not admissible: integral diverges")]
    NotAdmissible(usize),

    #[error("ill-conditioned polynomial fit: {0}")]
    IllConditioned(String),

    #[error("graph with {nodes} nodes exceeds eigendecomposition cap {cap}")]
    EigenCap { nodes: usize, cap: usize },

    #[error("empty filter bank")]
    EmptyBank,

    #[error("empty mask")]
    EmptyMask,

    #[error("contributions undefined: every feature dimension is degenerate")]
    ContributionsUndefined,

    #[error("metric undefined: labels contain a single class")]
    SingleClass,

    #[error("backward already ran on this tape")]
    DoubleBackward,

    #[error("backward root must be a 1x1 scalar, got {0}x{1}")]
    NonScalarRoot(usize, usize),

    #[error("loss diverged at epoch {epoch}: {value}")]
    Diverged { epoch: usize, value: f64 },

    #[error("schema hash mismatch: checkpoint {expected}, graph {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
