use thiserror::Error;

/// Errors produced by the holdscan library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A data row could not be parsed, or a sample holds a non-finite value.
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("timestamps not strictly increasing at sample {index}")]
    NonMonotonicTime { index: usize },

    #[error("non-uniform sampling at sample {index}: spacing {spacing} s, expected {expected} s")]
    NonUniformSampling { index: usize, spacing: f64, expected: f64 },

    #[error("input contains no samples")]
    EmptyInput,

    #[error("sample rate must be positive and finite, got {0}")]
    InvalidSampleRate(f64),

    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),

    #[error("non-finite input: {0}")]
    NonFiniteInput(&'static str),

    #[error("invalid range [{start}, {end}) for length {len}")]
    InvalidRange { start: usize, end: usize, len: usize },

    #[error("segment [{start}, {end}) out of bounds for waveform of length {len}")]
    IndexOutOfBounds { start: usize, end: usize, len: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("plateau pressure {plateau} does not exceed PEEP {peep}")]
    DegenerateDrivingPressure { plateau: f64, peep: f64 },

    #[error("end-inspiratory flow must be positive, got {0} L/s")]
    DegenerateFlow(f64),

    #[error("tidal volume must be positive, got {0} L")]
    DegenerateVolume(f64),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("invalid record on line {line}: {reason}")]
    InvalidRecord { line: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
