use thiserror::Error;

/// Errors produced by graph construction, estimation, and seed selection.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("node index {0} out of range")]
    NodeOutOfRange(u32),

    #[error("unknown node label {0}")]
    UnknownLabel(u64),

    #[error("community id {0} out of range")]
    CommunityOutOfRange(u32),

    #[error("graph is empty")]
    EmptyGraph,

    #[error("modularity undefined: graph has no edges")]
    ModularityUndefined,

    #[error("resolution must be finite and positive, got {0}")]
    BadResolution(f64),

    #[error("sample count must be at least 1")]
    ZeroSamples,

    #[error("budget must be at least 1")]
    ZeroBudget,

    #[error("budget {k} exceeds node count {n}")]
    BudgetTooLarge { k: usize, n: usize },

    #[error("oracle limit: {edges} edges exceeds enumeration bound of {max}")]
    OracleLimit { edges: usize, max: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
