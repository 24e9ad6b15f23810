use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tuple has length {found}, system expects {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("entry {value} at position {position} is not a residue mod {modulus}")]
    OutOfRange {
        position: usize,
        value: u64,
        modulus: u64,
    },

    /// The instance needs more states than the configured cap allows.
    #[error("{what}: needs more than {cap} states (cap exceeded)")]
    CapExceeded { what: &'static str, cap: u64 },

    /// A statement was invoked outside its hypotheses.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("{0} is not a node of this graph")]
    NotMember(String),

    #[error("cannot parse tuple {input:?}: {reason}")]
    Parse { input: String, reason: String },
}
