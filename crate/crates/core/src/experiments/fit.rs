//! Least-squares rate fits on logarithmic data.

use serde::Serialize;

use crate::error::{Error, Result};

/// A slope is only asserted when the fit residual is below this (natural-log
/// units).
pub const MAX_ASSERTED_RESIDUAL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest deviation of a data point from the fitted line, in natural-log
    /// units of the fitted quantity.
    pub residual: f64,
    pub points: usize,
}

impl Fit {
    pub fn assertable(&self) -> bool {
        self.residual < MAX_ASSERTED_RESIDUAL
    }
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).abs())
        .fold(0.0, f64::max);
    (slope, intercept, residual)
}

fn check_positive(name: &str, values: &[f64]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::config(format!(
            "{name} must be positive and finite for a logarithmic fit, found {v}"
        )));
    }
    Ok(())
}

/// Slope of `ln(error)` against `ln(t)`; needs at least four points.
pub fn order_fit(ts: &[f64], errors: &[f64]) -> Result<Fit> {
    if ts.len() != errors.len() {
        return Err(Error::config("order_fit: length mismatch"));
    }
    if ts.len() < 4 {
        return Err(Error::config(format!(
            "order_fit needs at least 4 points, got {}",
            ts.len()
        )));
    }
    check_positive("times", ts)?;
    check_positive("errors", errors)?;
    let x: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (slope, intercept, residual) = least_squares(&x, &y);
    Ok(Fit {
        slope,
        intercept,
        residual,
        points: ts.len(),
    })
}

/// Slope of `log₂(value)` against `n` (a rate "per unit n"); needs at least
/// three points. The residual is reported in natural-log units.
pub fn decay_fit(ns: &[f64], values: &[f64]) -> Result<Fit> {
    if ns.len() != values.len() {
        return Err(Error::config("decay_fit: length mismatch"));
    }
    if ns.len() < 3 {
        return Err(Error::config(format!(
            "decay_fit needs at least 3 points, got {}",
            ns.len()
        )));
    }
    check_positive("values", values)?;
    let y: Vec<f64> = values.iter().map(|v| v.log2()).collect();
    let (slope, intercept, residual) = least_squares(ns, &y);
    Ok(Fit {
        slope,
        intercept,
        residual: residual * std::f64::consts::LN_2,
        points: ns.len(),
    })
}
