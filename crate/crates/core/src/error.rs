use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid quantization range [{min}, {max}] with {levels} levels")]
    InvalidQuantization { min: f64, max: f64, levels: usize },
    #[error("stain radii must be positive (got input {radius_in}, output {radius_out})")]
    InvalidRadii { radius_in: f64, radius_out: f64 },
    #[error("expected {expected} input values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("level {level} outside 1..={levels}")]
    LevelOutOfRange { level: usize, levels: usize },
    #[error("cannot train on an empty sample list")]
    EmptyTrainingSet,
    #[error("output level {level} is already stored in this group")]
    EqualOutputConflict { level: usize },
    #[error("group is incompatible with the model's quantization specs")]
    IncompatibleGroup,
    #[error("no output level has nonzero confidence")]
    NoCoverage,
    #[error("malformed model file: {0}")]
    ModelFormat(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
