use alloc::string::String;

/// Everything that can go wrong inside the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no iso-contour crosses the threshold")]
    NoContour,
    #[error("every contour touches the image border without closing")]
    OpenContourOnly,
    #[error("threshold {0} is outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("empty image")]
    EmptyImage,
    #[error("top and bottom split points coincide")]
    DegenerateSplit,
    #[error("outline has {0} points, at least {1} required")]
    TooFewPoints(usize, usize),
    #[error("invalid outline: {0}")]
    InvalidOutline(&'static str),
    #[error("point counts differ: {0} vs {1}")]
    MismatchedSizes(usize, usize),
    #[error("all points of shape `{0}` coincide")]
    DegenerateShape(String),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("curve has zero arc length")]
    DegenerateCurve,
    #[error("lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("configuration out of range: {0}")]
    ConfigOutOfRange(&'static str),
    #[error("representations were built with different configurations")]
    ConfigMismatch,
    #[error("energy became non-finite; reduce the kernel width or step")]
    NonFiniteEnergy,
    #[error("training set is empty")]
    EmptyTrain,
    #[error("index {index} out of range for {size} shapes")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("k = {k} is invalid for a training set of {train}")]
    InvalidK { k: usize, train: usize },
    #[error("class `{0}` has fewer than 2 members")]
    ClassTooSmall(String),
    #[error("label `{0}` is not in the class order")]
    UnknownLabel(String),
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
