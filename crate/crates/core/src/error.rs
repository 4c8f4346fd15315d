use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid money amount {0:?}")]
    MoneyParse(String),
    #[error("invalid rational {0:?}")]
    RatParse(String),
    #[error("invalid discount factor {0:?}: must be num/den in [0, 1]")]
    InvalidGamma(String),
    #[error("negative bid {0} in slot {1}")]
    NegativeBid(String, usize),
    #[error("slot {index} out of range for {len} slots")]
    SlotOutOfRange { index: usize, len: usize },
    #[error("invalid mechanism parameters: {0}")]
    InvalidMechanism(String),
    #[error("block holds {len} transactions but the mechanism allows at most {capacity}")]
    BlockTooLarge { len: usize, capacity: usize },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid strategy profile: {0}")]
    InvalidProfile(String),
    #[error("invalid audit configuration: {0}")]
    InvalidConfig(String),
    #[error("bid vector of length {len} exceeds max_vector_len {max}")]
    VectorTooLong { len: usize, max: usize },
    #[error(
        "combinatorial limit exceeded: {count} mempool transactions but exhaustive_inclusion_limit is {limit}"
    )]
    CombinatorialLimit { count: usize, limit: usize },
    #[error("allocation is not monotone for slot {slot}: {detail}")]
    NonMonotone { slot: usize, detail: String },
    #[error("mechanism is randomized; {0} requires a deterministic mechanism")]
    NotDeterministic(String),
    #[error("unknown claim id {0:?}")]
    UnknownClaim(String),
    #[error("sample count must be positive")]
    ZeroSamples,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
