use thiserror::Error;

use crate::solver::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    /// Spectral content above the highest complete dyadic block; a Besov norm
    /// computed on the truncated block range would be an underestimate.
    #[error(
        "band-limit certificate failed: relative tail {tail:.3e} above |xi| = {cutoff} exceeds {tolerance:.1e}"
    )]
    Truncation {
        tail: f64,
        cutoff: f64,
        tolerance: f64,
    },

    #[error("carrier frequency {carrier:.4} is not resolvable on a grid with k_max = {k_max:.4}")]
    Resolution { carrier: f64, k_max: f64 },

    #[error(
        "domain too small: envelope tail ratio {ratio:.3e} at |x| = {half_length} exceeds {tolerance:.1e}"
    )]
    DomainTooSmall {
        ratio: f64,
        half_length: f64,
        tolerance: f64,
    },

    #[error("time step {dt:.3e} exceeds the stability bound {bound:.3e}")]
    Stability { dt: f64, bound: f64 },

    /// Wave-breaking proxy tripped; `partial` holds everything computed up to
    /// the last accepted step.
    #[error("blow-up at t = {t:.6}: max |u_x| = {max_slope:.3e}")]
    BlowUp {
        t: f64,
        max_slope: f64,
        partial: Box<Trajectory>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
