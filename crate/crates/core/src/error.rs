use thiserror::Error;

/// Errors produced anywhere in the belief pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate state label `{0}`")]
    DuplicateLabel(String),
    #[error("a state universe needs at least one state")]
    EmptyUniverse,
    #[error("state universe has {0} states; at most 64 are supported")]
    TooManyStates(usize),
    #[error("state label must be non-empty")]
    EmptyLabel,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown evidence item `{0}`")]
    UnknownEvidence(String),
    #[error("sets belong to different state universes")]
    UniverseMismatch,
    #[error("evidence list is empty")]
    EmptyEvidenceList,
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("certainty of `{name}` is {value}; it must lie strictly between 0 and 1")]
    CertaintyOutOfRange { name: String, value: String },
    #[error("evidence `{0}` has no states")]
    EmptyEvidence(String),
    #[error("evidence `{0}` covers every state")]
    FullSetEvidence(String),
    #[error("duplicate evidence name `{0}`")]
    DuplicateName(String),
    #[error("argument does not belong to this evidence frame")]
    FrameMismatch,
    #[error("custom justification member {0} is not open in the evidential topology")]
    CustomFrameNotOpen(String),
    #[error("custom justification frame must contain the full state set")]
    CustomFrameMissingTotalSet,
    #[error("custom justification frame must not contain the empty set")]
    CustomFrameContainsEmpty,
    #[error("evidence index {index} out of range for a frame with {len} items")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("total conflict: the combined assignments have no compatible focal sets")]
    TotalConflict,
    #[error("invalid basic probability assignment: {0}")]
    InvalidBpa(String),
    #[error("invalid allocation table: {0}")]
    InvalidAllocatorTable(String),
    #[error("{items} evidence items exceed the enumeration limit of {max}")]
    CapacityExceeded { items: usize, max: usize },
    #[error("the justification frame captures no mass under allocator `{0}`")]
    DegenerateNormalization(String),
    #[error("invalid number `{0}`")]
    InvalidNumber(String),
}

pub type Result<T> = std::result::Result<T, Error>;
