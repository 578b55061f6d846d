use thiserror::Error;

/// Errors produced by graph construction, parameter validation, payoff
/// evaluation, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice dimensions must be at least 3x3, got {width}x{height}")]
    LatticeTooSmall { width: usize, height: usize },

    #[error("node index {index} out of range for population of {node_count}")]
    InvalidNode { index: usize, node_count: usize },

    #[error("population graph must be connected")]
    DisconnectedGraph,

    #[error("population graph needs at least 2 nodes, got {0}")]
    PopulationTooSmall(usize),

    #[error("edge list line {line}: {reason}")]
    MalformedEdgeList { line: usize, reason: String },

    #[error("invalid strategy label {label:?}: {reason}")]
    InvalidStrategyLabel { label: String, reason: String },

    #[error("parameter {name} out of range: {value} (expected {expected})")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("game group must have at least 2 members, got {0}")]
    GroupTooSmall(usize),

    #[error("contribution {contribution} of node {node} exceeds its endowment {endowment}")]
    ContributionExceedsEndowment {
        node: usize,
        contribution: f64,
        endowment: f64,
    },

    #[error("strategy profile covers {profile_len} nodes but the population has {node_count}")]
    ProfileSizeMismatch {
        profile_len: usize,
        node_count: usize,
    },

    #[error("strategy {label} is not part of the {setting} strategy space")]
    StrategyNotInSetting { label: String, setting: String },

    #[error("initialization fractions must sum to 1, got {0}")]
    FractionSumMismatch(f64),

    #[error("stop criteria require max_rounds >= 1")]
    ZeroRoundCap,

    #[error("patch {id:?}: {reason}")]
    InvalidPatch { id: String, reason: String },

    #[error(
        "population size {0} cannot embed a 5x5 patch: expected a perfect square of side >= 5"
    )]
    InvalidEmbedding(usize),

    #[error("sweep grid is empty on axis {0}")]
    EmptyGridAxis(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
