use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no simple {d}-regular graph on {n} nodes (need n*d even and n > d)")]
    InfeasibleRegular { n: usize, d: usize },

    #[error("configuration model gave up after {0} restarts")]
    RestartBudgetExceeded(usize),

    #[error("node {node} out of range for graph with {len} nodes")]
    NodeOutOfRange { node: usize, len: usize },

    #[error("node {0} has already been removed")]
    DeadNode(usize),

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),

    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("circuit depth {circuit} does not match angle schedule depth {angles}")]
    DepthMismatch { circuit: usize, angles: usize },

    #[error("{qubits} qubits exceed the statevector cap of {cap}")]
    QubitCapExceeded { qubits: usize, cap: usize },

    #[error(
        "contraction needs an intermediate of {elements} elements over {width} indices, budget is {budget}"
    )]
    MemoryBudgetExceeded {
        elements: u128,
        budget: u128,
        width: usize,
    },

    #[error("census is only supported for depth 1..=3, got {0}")]
    UnsupportedCensusDepth(usize),

    #[error("exact solver limited to {limit} nodes, graph has {nodes}")]
    SizeLimitExceeded { nodes: usize, limit: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
