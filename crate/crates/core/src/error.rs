use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while loading inputs, simulating, or planning.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Input {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("network has a cycle through component {0}")]
    Cycle(u32),

    #[error("network has multiple roots: {0:?}")]
    MultipleRoots(Vec<u32>),

    #[error("network has no root component")]
    NoRoot,

    #[error("component {child} references unknown parent {parent}")]
    DanglingParent { child: u32, parent: u32 },

    #[error("duplicate component id {0}")]
    DuplicateId(u32),

    #[error("unknown component id {0}")]
    UnknownComponent(u32),

    #[error("gravity weights for cell {cell} underflow to zero")]
    Renormalization { cell: u32 },

    #[error("invalid repair action: {0}")]
    InvalidAction(String),

    #[error("objective undefined: {0}")]
    UndefinedObjective(String),

    #[error("exact search refused: {0}")]
    SearchTooLarge(String),

    #[error("rollout underperformed its base heuristic in scenario {scenario}: base {base}, rollout {rollout}")]
    ImprovementViolated {
        scenario: usize,
        base: f64,
        rollout: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
