use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum McboError {
    #[error("cycle detected through node {0}")]
    CycleDetected(usize),
    #[error("node {node} lists parent {parent}, but the graph has {num_nodes} nodes")]
    ParentIndexOutOfRange {
        node: usize,
        parent: usize,
        num_nodes: usize,
    },
    #[error("stored order is not topological: edge {parent} -> {child}")]
    BadTopoOrder { parent: usize, child: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("action {index} = {value} lies outside [{lo}, {hi}]")]
    ActionOutOfBox {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("{active} nonzero actions exceed the cardinality limit {limit}")]
    CardinalityViolated { active: usize, limit: usize },
    #[error("hard intervention targets include the reward node")]
    HardTargetIncludesReward,
    #[error("intervention does not fit the model: {0}")]
    InvalidIntervention(String),
    #[error("grid search needs {needed} evaluations, budget is {budget}")]
    GridBudgetExceeded { needed: u128, budget: u128 },
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("unknown mechanism `{0}`")]
    UnknownMechanism(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("kernel matrix is not positive definite (jitter up to {jitter:e})")]
    NotPositiveDefinite { jitter: f64 },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("no feasible candidate for the acquisition optimizer")]
    NoFeasibleCandidate,
    #[error("curves have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, McboError>;
