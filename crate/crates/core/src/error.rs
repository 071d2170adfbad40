//! Error and validation-report types shared across the crate.

use std::fmt;

use thiserror::Error;

/// A single invariant violation found while validating an expectation matrix.
///
/// Validation reports every violation it finds instead of stopping at the
/// first, so a bad model file produces one complete diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The matrix has no feature rows.
    NoFeatures,
    /// The matrix has no class columns.
    NoClasses,
    /// Label list length does not match the matrix dimension.
    FeatureLabelCount { labels: usize, features: usize },
    /// Label list length does not match the matrix dimension.
    ClassLabelCount { labels: usize, classes: usize },
    /// A label is empty or contains whitespace/commas (reserved by the file formats).
    BadLabel { label: String, role: &'static str },
    /// The same feature label appears twice.
    DuplicateFeatureLabel(String),
    /// The same class label appears twice.
    DuplicateClassLabel(String),
    /// An entry is NaN or infinite.
    NonFiniteEntry {
        feature: String,
        class: String,
        value: f64,
    },
    /// An entry is negative; expectations are feature amplitudes and must be >= 0.
    NegativeEntry {
        feature: String,
        class: String,
        value: f64,
    },
    /// Every expectation for this class is zero, so no input can activate it.
    UnreachableClass(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoFeatures => write!(f, "matrix has no feature rows"),
            Violation::NoClasses => write!(f, "matrix has no class columns"),
            Violation::FeatureLabelCount { labels, features } => {
                write!(f, "{labels} feature labels for {features} feature rows")
            }
            Violation::ClassLabelCount { labels, classes } => {
                write!(f, "{labels} class labels for {classes} class columns")
            }
            Violation::BadLabel { label, role } => {
                write!(
                    f,
                    "{role} label {label:?} is empty or contains whitespace/commas"
                )
            }
            Violation::DuplicateFeatureLabel(l) => write!(f, "duplicate feature label '{l}'"),
            Violation::DuplicateClassLabel(l) => write!(f, "duplicate class label '{l}'"),
            Violation::NonFiniteEntry {
                feature,
                class,
                value,
            } => {
                write!(f, "entry ({feature}, {class}) = {value} is not finite")
            }
            Violation::NegativeEntry {
                feature,
                class,
                value,
            } => {
                write!(f, "entry ({feature}, {class}) = {value} is negative")
            }
            Violation::UnreachableClass(l) => {
                write!(
                    f,
                    "class '{l}' has all-zero expectations and can never activate"
                )
            }
        }
    }
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(Violation::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid expectation matrix: {}", join_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("{context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid {what}: {detail}")]
    InvalidValue { what: &'static str, detail: String },

    #[error("unknown class label '{0}'")]
    UnknownClass(String),

    #[error("unknown feature label '{0}'")]
    UnknownFeature(String),

    #[error("class label '{0}' already exists")]
    DuplicateClass(String),

    #[error("cannot remove '{0}': a model needs at least one class")]
    LastClassRemoval(String),

    #[error("class '{class}' has zero total expectation; the feedback normalization is undefined")]
    ZeroColumnSum { class: String },

    #[error(
        "activation {index} is {value}; regulatory feedback requires strictly positive activations"
    )]
    NonPositiveActivation { index: usize, value: f64 },

    #[error("activations became non-finite at step {step}; the step size is likely unstable")]
    NonFiniteActivation { step: usize },

    #[error("matrix is numerically singular; near-dependent class columns: {}", .classes.join(", "))]
    SingularModel { classes: Vec<String> },

    #[error(
        "pattern pair is singular (similarity {similarity}); iteration difficulty is undefined"
    )]
    SingularPair { similarity: f64 },

    #[error("similarity is undefined: both patterns are all-zero")]
    UndefinedSimilarity,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for CLI reporting: 1 usage, 2 data/validation,
    /// 3 numeric failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::InvalidModel(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidValue { .. }
            | Error::UnknownClass(_)
            | Error::UnknownFeature(_)
            | Error::DuplicateClass(_)
            | Error::LastClassRemoval(_)
            | Error::Parse { .. }
            | Error::Io(_) => 2,
            Error::ZeroColumnSum { .. }
            | Error::NonPositiveActivation { .. }
            | Error::NonFiniteActivation { .. }
            | Error::SingularModel { .. }
            | Error::SingularPair { .. }
            | Error::UndefinedSimilarity => 3,
        }
    }
}
