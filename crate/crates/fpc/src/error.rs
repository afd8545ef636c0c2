use thiserror::Error;

/// Errors shared across the whole crate.
///
/// The CLI maps these onto process exit codes, so every variant carries a
/// stable class name (see [`Error::class`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    MixedField,
    #[error("field has too few usable elements: need {needed}, have {available}")]
    FieldTooSmall { needed: usize, available: usize },
    #[error("invalid field spec: {0}")]
    InvalidFieldSpec(String),
    #[error("value not representable in this field: {0}")]
    InvalidValue(String),
    #[error("{rows}x{cols} matrix not divisible into {m}x{p} blocks")]
    IndivisibleShape {
        rows: usize,
        cols: usize,
        m: usize,
        p: usize,
    },
    #[error("matrix shapes do not conform: {0}")]
    ShapeMismatch(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("operation not supported on this carrier: {0}")]
    UnsupportedCarrier(&'static str),
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("chain map undefined at terminal triple ({0}, {1}, {2})")]
    UndefinedAtTerminal(usize, usize, usize),
    #[error("need {needed} worker results, got {got}")]
    InsufficientResults { needed: usize, got: usize },
    #[error("recovery subset produced a singular decode matrix")]
    SingularRecoverySubset,
    #[error("no verified point set found after {0} rejection rounds")]
    PointSelectionFailed(usize),
    #[error("{survivors} surviving workers cannot reach threshold {threshold}")]
    StragglerOverload { survivors: usize, threshold: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("malformed matrix file: {0}")]
    MalformedMatrixFile(String),
    #[error("malformed instance manifest: {0}")]
    MalformedManifest(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable class name, printed by the CLI as
    /// `error-class: <Name>` on stderr.
    pub fn class(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DivisionByZero",
            Error::MixedField => "MixedField",
            Error::FieldTooSmall { .. } => "FieldTooSmall",
            Error::InvalidFieldSpec(_) => "InvalidFieldSpec",
            Error::InvalidValue(_) => "InvalidValue",
            Error::IndivisibleShape { .. } => "IndivisibleShape",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::SingularMatrix => "SingularMatrix",
            Error::UnsupportedCarrier(_) => "UnsupportedCarrier",
            Error::ConstraintViolated(_) => "ConstraintViolated",
            Error::UndefinedAtTerminal(..) => "UndefinedAtTerminal",
            Error::InsufficientResults { .. } => "InsufficientResults",
            Error::SingularRecoverySubset => "SingularRecoverySubset",
            Error::PointSelectionFailed(_) => "PointSelectionFailed",
            Error::StragglerOverload { .. } => "StragglerOverload",
            Error::InvalidParams(_) => "InvalidParams",
            Error::MalformedMatrixFile(_) => "MalformedMatrixFile",
            Error::MalformedManifest(_) => "MalformedManifest",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
