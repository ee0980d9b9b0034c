use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("signal has {len} samples, fewer than one frame of {frame}")]
    SignalTooShort { len: usize, frame: usize },
    #[error("invalid STFT parameters: {0}")]
    InvalidStft(String),
    #[error("expected a block of {expected} samples, got {got}")]
    HopMismatch { expected: usize, got: usize },
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    Shape {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("unsupported audio: {0}")]
    UnsupportedAudio(String),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("{0}")]
    Weights(#[from] WeightsError),
    #[error("wav: {0}")]
    Wav(#[from] hound::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Failures of the weight-file reader and validator. Each malformed-file
/// class maps to its own variant.
#[derive(Error, Debug)]
pub enum WeightsError {
    #[error("bad magic {0:?}, expected \"BAEW\"")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("file truncated while reading {0}")]
    Truncated(&'static str),
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error("missing tensor `{0}`")]
    MissingTensor(String),
    #[error("unexpected tensor `{0}`")]
    UnexpectedTensor(String),
    #[error("duplicate tensor `{0}`")]
    DuplicateTensor(String),
    #[error("tensor `{name}` has shape {found:?}, expected {expected:?}")]
    ShapeMismatch {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("tensor `{name}` holds a non-finite value at element {index}")]
    NonFinite { name: String, index: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(context: &'static str, expected: usize, got: usize) -> Self {
        Error::Shape {
            context,
            expected,
            got,
        }
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::shape(context, expected, got))
    }
}
