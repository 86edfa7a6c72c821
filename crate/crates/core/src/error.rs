use thiserror::Error;

/// Errors shared across the simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A state/basis/register contract was violated (wrong dimension).
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    /// The requested statevector exceeds the 2^24-amplitude cap.
    #[error("requested state of {requested} amplitudes exceeds the cap of {cap}")]
    ResourceLimit { requested: usize, cap: usize },

    /// A precondition on an argument does not hold.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A retry budget was exhausted (persistent testing or tampering).
    #[error("retry budget exhausted after {attempts} attempts: {context}")]
    Unavailable { attempts: usize, context: String },

    /// A purification target cannot be reached within the round cap.
    #[error("purification target {target} unreachable within {cap} rounds")]
    PlanningCap { target: f64, cap: u32 },

    /// Error raised while executing a specific voting round.
    #[error("round {round}: {source}")]
    Round {
        round: u32,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn in_round(self, round: u32) -> Error {
        Error::Round {
            round,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
