use thiserror::Error;

/// Errors raised by the analysis routines.
///
/// Negative analysis outcomes (no certificate, unavailable bound, diverging
/// trajectory) are not errors; they are carried in the returned values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix entries must be finite, found {0} at ({1}, {2})")]
    NonFinite(String, usize, usize),

    #[error("invalid matrix shape: {0}")]
    Shape(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular (pivot {pivot:e} below threshold {threshold:e})")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("matrix is not Metzler")]
    NotMetzler,

    #[error("invalid delay model: {0}")]
    InvalidModel(String),

    #[error("bounding subsystem is not a positive system")]
    NotPositiveBound,

    #[error("subsystem is not a positive system")]
    NotPositive,

    #[error("subsystem is not exponentially stable: {0}")]
    NotStable(String),

    #[error("structuring matrices must be entrywise nonnegative")]
    NegativeStructure,

    #[error("bounding subsystem does not dominate subsystem {0}")]
    DominationViolated(usize),

    #[error("envelope of the bounding subsystem is not Hurwitz")]
    NotHurwitzBound,

    #[error("bounding structure does not dominate the structure of subsystem {0}")]
    StructureNotDominating(usize),

    #[error("simplex exceeded the iteration limit of {0} pivots")]
    IterationLimit(usize),

    #[error("step size mismatch: {0}")]
    StepMismatch(String),

    #[error("invalid switching signal: {0}")]
    InvalidSignal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
