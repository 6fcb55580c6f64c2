use thiserror::Error;

use crate::fill::RunRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row} sums to {sum}, not 1")]
    NonStochasticRow { row: usize, sum: f64 },
    #[error("entry ({row}, {col}) is negative or not finite: {value}")]
    BadEntry { row: usize, col: usize, value: f64 },
    #[error("supplied distribution is not stationary (max |piK - pi| = {max_dev:e})")]
    NotStationary { max_dev: f64 },
    #[error("chain has no unique stationary distribution: {0}")]
    NoUniqueStationary(String),
    #[error("state {state} has zero stationary mass")]
    ZeroMassState { state: usize },
    #[error("invalid probability vector: {0}")]
    BadDistribution(String),
    #[error("state {state} out of range for a space of {size} states")]
    StateOutOfRange { state: usize, size: usize },
    #[error("driver does not match the rule's driver kind ({expected})")]
    DriverMismatch { expected: &'static str },
    #[error("transition {from} -> {to} has zero probability")]
    ImpossibleTransition { from: usize, to: usize },
    #[error("exact enumeration exceeds the cap of {cap} atoms")]
    EnumerationTooLarge { cap: u64 },
    #[error("exact arithmetic requires rational entries: {0}")]
    IrrationalEntries(String),
    #[error("bad atom weights: {0}")]
    BadWeights(String),
    #[error("rule does not induce the kernel: row {row}, column {col} ({induced} vs {expected})")]
    KernelMismatch { row: usize, col: usize, induced: f64, expected: f64 },
    #[error("state space has no partial order")]
    NoOrder,
    #[error("invalid order: {0}")]
    BadOrder(String),
    #[error("rule is not certified monotone for this order")]
    NotMonotone,
    #[error("partial order has no bottom and top elements")]
    NoBounds,
    #[error("no acceptance after {} attempts", attempts.len())]
    MaxAttemptsExceeded { attempts: Vec<RunRecord> },
    #[error("no coalescence within the window cap of {cap}")]
    WindowLimitExceeded { cap: usize },
    #[error("too few samples: have {have}, need at least {need}")]
    TooFewSamples { have: u64, need: u64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid chain spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name, used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonStochasticRow { .. } => "NonStochasticRow",
            Error::BadEntry { .. } => "BadEntry",
            Error::NotStationary { .. } => "NotStationary",
            Error::NoUniqueStationary(_) => "NoUniqueStationary",
            Error::ZeroMassState { .. } => "ZeroMassState",
            Error::BadDistribution(_) => "BadDistribution",
            Error::StateOutOfRange { .. } => "StateOutOfRange",
            Error::DriverMismatch { .. } => "DriverMismatch",
            Error::ImpossibleTransition { .. } => "ImpossibleTransition",
            Error::EnumerationTooLarge { .. } => "EnumerationTooLarge",
            Error::IrrationalEntries(_) => "IrrationalEntries",
            Error::BadWeights(_) => "BadWeights",
            Error::KernelMismatch { .. } => "KernelMismatch",
            Error::NoOrder => "NoOrder",
            Error::BadOrder(_) => "BadOrder",
            Error::NotMonotone => "NotMonotone",
            Error::NoBounds => "NoBounds",
            Error::MaxAttemptsExceeded { .. } => "MaxAttemptsExceeded",
            Error::WindowLimitExceeded { .. } => "WindowLimitExceeded",
            Error::TooFewSamples { .. } => "TooFewSamples",
            Error::InvalidInput(_) => "InvalidInput",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
