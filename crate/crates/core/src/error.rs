use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error(
        "under-resolved quadrature: q step {step:.4e} rad/m exceeds the limit {limit:.4e} rad/m \
         (raise the point count or shrink the range)"
    )]
    UnderResolved { step: f64, limit: f64 },

    #[error("degenerate denominator: mean intensity {value:e} at x = {x:e} m")]
    DegenerateDenominator { x: f64, value: f64 },

    #[error("curve kind {found} cannot be used here (expected {expected})")]
    WrongKind {
        found: &'static str,
        expected: &'static str,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("at least 2 realizations are needed for an error estimate, got {0}")]
    InsufficientRealizations(usize),

    #[error("non-finite value accumulated at x = {x:e} m")]
    NonFinite { x: f64 },

    #[error("detector width {width:e} m is not smaller than the grid span {span:e} m")]
    DetectorTooWide { width: f64, span: f64 },

    #[error("visibility window [{start:e}, {end:e}] m contains too few grid points")]
    EmptyWindow { start: f64, end: f64 },

    #[error("no fringe found")]
    NoFringe,

    #[error("unknown figure preset `{0}`")]
    UnknownPreset(String),

    #[error("{}line {line}: {message}", path_prefix(.path))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("unknown configuration key `{key}` on line {line}")]
    UnknownKey { key: String, line: usize },

    #[error("CSV error: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn path_prefix(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input (configuration, preset names,
    /// file access) rather than by the numerics.
    pub fn is_usage_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Parse { .. }
                | Error::UnknownKey { .. }
                | Error::UnknownPreset(_)
                | Error::Io(_)
        )
    }

    /// Process exit code: 1 for usage/config errors, 2 for numerical or
    /// validation failures.
    pub fn exit_code(&self) -> i32 {
        if self.is_usage_error() {
            1
        } else {
            2
        }
    }
}
