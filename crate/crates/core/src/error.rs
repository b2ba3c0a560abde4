use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent model construction (dimension, shear, kind, bounds).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("field shape {found:?} does not match grid {expected:?}")]
    SizeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("axis {axis} out of range for a {dim}-dimensional model")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("degree {degree} exceeds ambient dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },

    #[error("expected a form of degree {expected}, got {found}")]
    WrongDegree { expected: usize, found: usize },

    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("invalid component tuple {0:?}")]
    InvalidTuple(Vec<usize>),

    /// Theta fails strict positivity at the given grid point.
    #[error("curvature matrix not positive definite at {point:?} (min eigenvalue {min_eig:e})")]
    NotPositive { point: Vec<usize>, min_eig: f64 },

    #[error("non-finite value produced by {0}")]
    NonFinite(String),

    /// Imaginary part of a form that must be real exceeds its bound.
    #[error("imaginary part {imag:e} exceeds bound {bound:e} in {context}")]
    ImaginaryPart {
        context: String,
        imag: f64,
        bound: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the `lfl` front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite(_) | Error::NotPositive { .. } | Error::ImaginaryPart { .. } => 4,
            _ => 3,
        }
    }
}
