use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported Cartan type: {0}")]
    UnsupportedType(String),
    #[error("invalid thickness vector: {0}")]
    InvalidThickness(String),
    #[error("coweight {0:?} is not dominant")]
    NonDominant(Vec<i64>),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("node {0} has zero total conductance")]
    ZeroConductance(String),
    #[error("network oracle failed: {0}")]
    Oracle(String),
    #[error("empty subset")]
    EmptySubset,
    #[error("subset is unreachable from state {0}")]
    Unreachable(String),
    #[error("singular linear system")]
    Singular,
    #[error("action does not preserve conductances: {0}")]
    NotConductancePreserving(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("stabilizer order unavailable for {0}")]
    StabilizerUnavailable(String),
    #[error("recurrence of the orbit could not be certified")]
    RecurrenceUnknown,
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("vertex lies outside the truncated model: {0}")]
    OutsideModel(String),
    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),
    #[error("ends must be distinct")]
    EqualEnds,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
