use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("region mismatch: {0}")]
    RegionMismatch(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("bracket violation: crossing estimate {lo_value} at {lo} and {hi_value} at {hi} do not straddle 1/2")]
    BracketViolation {
        lo: f64,
        hi: f64,
        lo_value: f64,
        hi_value: f64,
    },

    #[error("subcritical base configuration: {0}")]
    Subcritical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Rejects values outside `[lo, hi]` (and NaN).
pub(crate) fn check_closed(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{value} not in [{lo}, {hi}]")))
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{value} must be finite and > 0")))
    }
}
