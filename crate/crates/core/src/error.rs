use thiserror::Error;

use crate::wav::WavError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("incompatible filter: {0}")]
    IncompatibleFilter(String),
    #[error("a crossfade is already in progress ({remaining} samples remaining)")]
    SwitchInProgress { remaining: usize },
    #[error("invalid frequency {freq} Hz for sample rate {sample_rate} Hz")]
    InvalidFrequency { freq: f64, sample_rate: u32 },
    #[error("sample rate mismatch: {what} is {found} Hz, expected {expected} Hz")]
    SampleRateMismatch {
        what: String,
        found: u32,
        expected: u32,
    },
    #[error("switch time {time_ms} ms is outside the {duration_ms} ms signal")]
    SwitchOutOfRange { time_ms: f64, duration_ms: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error(transparent)]
    Wav(#[from] WavError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("serialization failed: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}
