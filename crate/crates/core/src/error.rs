use thiserror::Error;

/// Errors raised by the library. Every fallible operation in the crate
/// returns this type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("regions {0} and {1} stand in a mixed causal relation")]
    MixedRelation(usize, usize),

    #[error("invalid docket: {0}")]
    InvalidDocket(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid switching structure: {0}")]
    InvalidStructure(String),

    #[error("proper time {t} outside [0, {total}]")]
    TimeOutOfRange { t: f64, total: f64 },

    #[error("invalid switch path: {0}")]
    InvalidPath(String),

    #[error("invalid manifestation: {0}")]
    InvalidManifestation(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("not a projection: {0}")]
    NotProjection(String),

    #[error("algebra containment violated: {0}")]
    NotContained(String),

    #[error("states live on different algebras")]
    AlgebraMismatch,

    #[error("manifestation menu is empty")]
    EmptyMenu,

    #[error("no menus supplied")]
    NoMenus,

    #[error("parent a priori probability is zero")]
    ZeroParentApp,

    #[error("theory class is empty")]
    EmptyTheoryClass,

    #[error("invalid probability: {0}")]
    InvalidProbability(String),

    #[error("evaluator failed at structure {state}: {message}")]
    Evaluator { state: String, message: String },

    #[error("caricature requires p + q > 0")]
    DegenerateCaricature,

    #[error("dimension overflow: {0}")]
    DimensionOverflow(String),

    #[error("projection family is not a resolution of the identity: {0}")]
    NotResolution(String),

    #[error("relevant projections do not commute (residual {0:e})")]
    NonCommuting(f64),

    #[error("subprojection condition violated (residual {0:e})")]
    Subprojection(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
