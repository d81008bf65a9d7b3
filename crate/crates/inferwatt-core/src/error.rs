//! Crate-wide error type.

use std::fmt;
use std::io;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// File could not be opened, read, or written.
    Io { path: PathBuf, source: io::Error },
    /// CSV file is structurally invalid (bad header, unreadable record).
    CsvFormat { path: PathBuf, message: String },
    /// A CSV field failed parsing or violated a value invariant.
    /// `row` is the 1-based data row (header excluded).
    InvalidField {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },
    /// Hardware name not present in the database.
    UnknownHardware { name: String, available: Vec<String> },
    /// Region code not present in the database.
    UnknownRegion { code: String, available: Vec<String> },
    /// Attempt to register a hardware name that already exists.
    DuplicateHardware { name: String },
    /// Not enough data points for the requested fit or evaluation.
    InsufficientData {
        context: &'static str,
        needed: usize,
        got: usize,
    },
    /// Fit is mathematically underdetermined (e.g. zero variance in x).
    DegenerateFit { context: String },
    /// A function argument is outside its legal range.
    InvalidParameter { name: &'static str, message: String },
    /// Prediction input has the wrong number of features.
    DimensionMismatch { expected: usize, got: usize },
    /// Paired vectors differ in length.
    LengthMismatch { left: usize, right: usize },
    /// MAPE is undefined: a ground-truth element is zero.
    ZeroGroundTruth { index: usize },
    /// Model file is missing a field, malformed, or fails validation.
    ModelFile {
        path: Option<PathBuf>,
        message: String,
    },
    /// One of the three pipeline models is absent.
    MissingModel { role: &'static str, path: PathBuf },
    /// A trained model produced a non-finite prediction.
    NonFiniteOutput { model: &'static str },
    /// An estimate request field violates its invariant.
    InvalidRequest {
        field: &'static str,
        message: String,
    },
    /// Operation requires a non-empty input.
    EmptyInput { context: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io { path, source } => write!(f, "{}: {}", path.display(), source),
            Error::CsvFormat { path, message } => {
                write!(f, "{}: {}", path.display(), message)
            }
            Error::InvalidField {
                path,
                row,
                column,
                message,
            } => write!(
                f,
                "{}: row {}: column `{}`: {}",
                path.display(),
                row,
                column,
                message
            ),
            Error::UnknownHardware { name, available } => write!(
                f,
                "unknown hardware `{}`; known entries: {}",
                name,
                available.join(", ")
            ),
            Error::UnknownRegion { code, available } => write!(
                f,
                "unknown region `{}`; known regions: {}",
                code,
                available.join(", ")
            ),
            Error::DuplicateHardware { name } => {
                write!(f, "hardware `{}` is already registered", name)
            }
            Error::InsufficientData {
                context,
                needed,
                got,
            } => write!(f, "{}: needs at least {} points, got {}", context, needed, got),
            Error::DegenerateFit { context } => write!(f, "degenerate fit: {}", context),
            Error::InvalidParameter { name, message } => {
                write!(f, "invalid parameter `{}`: {}", name, message)
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "expected {} feature(s), got {}", expected, got)
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "vector lengths differ: {} vs {}", left, right)
            }
            Error::ZeroGroundTruth { index } => write!(
                f,
                "MAPE undefined: ground-truth element at index {} is zero",
                index
            ),
            Error::ModelFile { path, message } => match path {
                Some(p) => write!(f, "model file {}: {}", p.display(), message),
                None => write!(f, "model file: {}", message),
            },
            Error::MissingModel { role, path } => write!(
                f,
                "missing `{}` model: {} does not exist",
                role,
                path.display()
            ),
            Error::NonFiniteOutput { model } => {
                write!(f, "`{}` model produced a non-finite prediction", model)
            }
            Error::InvalidRequest { field, message } => {
                write!(f, "invalid request field `{}`: {}", field, message)
            }
            Error::EmptyInput { context } => write!(f, "{}: input is empty", context),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}
