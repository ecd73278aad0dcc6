//! Error type shared across the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is singular or not positive-definite")]
    SingularMatrix,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("image shape mismatch: {a_width}x{a_height} vs {b_width}x{b_height}")]
    ShapeMismatch {
        a_width: usize,
        a_height: usize,
        b_width: usize,
        b_height: usize,
    },

    #[error("image {width}x{height} is smaller than the {window}x{window} SSIM window")]
    ImageTooSmall {
        width: usize,
        height: usize,
        window: usize,
    },

    #[error("zero-size image requested")]
    ZeroSizeImage,

    #[error("SH degree {requested} exceeds stored coefficients (degree {stored})")]
    ShDegree { requested: usize, stored: usize },

    #[error("backward pass list length {got} does not match forward length {expected}")]
    BackwardLengthMismatch { got: usize, expected: usize },

    #[error("no live components to relocate onto")]
    EmptyLiveSet,

    #[error("relocation plan reuses component {0}")]
    OverlappingGroups(usize),

    #[error("relocation plan moves {moved} components, cap allows {cap}")]
    RelocationCapExceeded { moved: usize, cap: usize },

    #[error("empty point set")]
    EmptyPointSet,

    #[error("scene file not found: {0}")]
    SceneNotFound(PathBuf),

    #[error("malformed scene JSON: {0}")]
    MalformedScene(String),

    #[error("image {path}: declared {declared_width}x{declared_height}, file is {actual_width}x{actual_height}")]
    ImageDimensionMismatch {
        path: PathBuf,
        declared_width: usize,
        declared_height: usize,
        actual_width: usize,
        actual_height: usize,
    },

    #[error("PLY {path}: {reason}")]
    MalformedPly { path: PathBuf, reason: String },

    #[error("malformed image {path}: {reason}")]
    MalformedImage { path: PathBuf, reason: String },

    #[error("checkpoint {path}: {reason}")]
    MalformedCheckpoint { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("quadrature did not converge (reached max subdivisions)")]
    QuadratureDiverged,

    #[error("{context}: {source}")]
    Step {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wrap an error with training-step context.
    pub fn in_step(self, context: impl Into<String>) -> Self {
        Error::Step {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
