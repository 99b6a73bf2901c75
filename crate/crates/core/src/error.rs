use thiserror::Error;

/// Errors raised by the library. Every variant names the operation that failed.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("{op}: domain error: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A numerical procedure did not reach its tolerance.
    #[error("{op}: numerical error: {msg} (achieved tolerance {achieved:e})")]
    Numerical {
        op: &'static str,
        msg: String,
        achieved: f64,
    },

    /// A bracketed root search found no sign change.
    #[error("{op}: no root in bracket [{lo}, {hi}]")]
    NoRoot { op: &'static str, lo: f64, hi: f64 },

    /// Malformed input file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Too little of the pupil is covered by valid pixels.
    #[error("measured_eta: pupil coverage {coverage:.3} below the required {required:.2}")]
    Coverage { coverage: f64, required: f64 },

    /// Least-squares fit failed.
    #[error("fit_saturation: {0}")]
    Fit(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }

    /// True for errors that come from reading or writing files.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Parse { .. } | Error::Json(_))
    }
}

/// Rejects NaN/inf and negative values.
pub(crate) fn check_nonneg(op: &'static str, name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::domain(
            op,
            format!("{name} must be finite and >= 0, got {v}"),
        ));
    }
    Ok(())
}

pub(crate) fn check_pos(op: &'static str, name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::domain(
            op,
            format!("{name} must be finite and > 0, got {v}"),
        ));
    }
    Ok(())
}

pub(crate) fn check_unit(op: &'static str, name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
        return Err(Error::domain(
            op,
            format!("{name} must lie in [0, 1], got {v}"),
        ));
    }
    Ok(())
}
