//! The envelope `φ` and the high/low frequency sequences
//!
//! ```text
//! f_n = 2^{−ns} φ(x) sin(a_n x),   g_n = (12/17) 2^{−n/Q} φ(x),   u₀ⁿ = f_n + g_n
//! ```
//!
//! `φ̂` is even, nonnegative, equal to 1 on `|ξ| ≤ 1/4` and vanishing for
//! `|ξ| ≥ 1/2`, with the same smooth transition as the Littlewood–Paley
//! cutoffs. All three fields are assembled directly from their Fourier
//! transforms, so their spectra are exactly the sampled analytic symbols:
//! `f̂_n(ξ) = 2^{−ns}(φ̂(ξ − a_n) − φ̂(ξ + a_n))/(2i)`.
//!
//! The carrier `a_n` is the lattice frequency nearest to `(17/12)2ⁿ`.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::littlewood_paley::smooth_step;
use crate::spectral::{inverse_transform, Field, Grid, SpectralField};

/// Largest admissible `|φ(±L)| / max|φ|`.
pub const TAIL_TOLERANCE: f64 = 1e-10;

pub const CARRIER_FACTOR: f64 = 17.0 / 12.0;
pub const LOW_AMPLITUDE: f64 = 12.0 / 17.0;

/// `φ̂(ξ)`.
pub fn envelope_symbol(xi: f64) -> f64 {
    1.0 - smooth_step((xi.abs() - 0.25) / 0.25)
}

/// Parameters of one member of the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InitDataParams {
    pub n: u32,
    pub s: f64,
    pub q: u32,
}

impl InitDataParams {
    pub fn new(n: u32, s: f64, q: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::config(format!(
                "frequency index n must be >= 3 for single-block support, got {n}"
            )));
        }
        if q < 1 {
            return Err(Error::config("nonlinearity degree Q must be >= 1"));
        }
        if !s.is_finite() {
            return Err(Error::config(format!("regularity s must be finite, got {s}")));
        }
        Ok(InitDataParams { n, s, q })
    }

    /// `(17/12)·2ⁿ` before snapping.
    pub fn nominal_carrier(&self) -> f64 {
        CARRIER_FACTOR * (self.n as f64).exp2()
    }

    /// `2^{−ns}`.
    pub fn high_amplitude(&self) -> f64 {
        (-(self.n as f64) * self.s).exp2()
    }

    /// `(12/17)·2^{−n/Q}`.
    pub fn low_amplitude(&self) -> f64 {
        LOW_AMPLITUDE * (-(self.n as f64) / self.q as f64).exp2()
    }

    /// Whether `2ⁿ ≥ 6(Q+1)`, which keeps the spectrum of `φ^{Q+1}` modulated
    /// at `a_n` inside block `n`.
    pub fn lower_bound_admissible(&self) -> bool {
        (self.n as f64).exp2() >= 6.0 * (self.q as f64 + 1.0)
    }
}

/// Lattice-snapped carrier frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Carrier {
    pub nominal: f64,
    /// Lattice index `m` with `a_n = mπ/L`.
    pub lattice_index: i64,
    pub snapped: f64,
    pub offset: f64,
}

/// Snaps `(17/12)2ⁿ` to the lattice, refusing carriers that the grid cannot
/// resolve (`2·(17/12)2ⁿ + 1 ≥ k_max`).
pub fn snapped_carrier(grid: &Grid, n: u32) -> Result<Carrier> {
    let nominal = CARRIER_FACTOR * (n as f64).exp2();
    if 2.0 * nominal + 1.0 >= grid.k_max() {
        return Err(Error::Resolution {
            carrier: nominal,
            k_max: grid.k_max(),
        });
    }
    let lattice_index = (nominal / grid.dxi()).round() as i64;
    let snapped = lattice_index as f64 * grid.dxi();
    Ok(Carrier {
        nominal,
        lattice_index,
        snapped,
        offset: (snapped - nominal).abs(),
    })
}

/// Builds a field from its continuous Fourier transform sampled on the lattice.
pub fn spectrum_from_symbol(
    grid: &Arc<Grid>,
    symbol: impl Fn(f64) -> Complex64,
) -> Result<SpectralField> {
    let inv_dx = 1.0 / grid.spacing();
    let raw = (0..grid.points())
        .map(|idx| {
            let k = grid.lattice_index(idx);
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            symbol(grid.wavenumber(idx)) * (sign * inv_dx)
        })
        .collect();
    SpectralField::from_raw(grid, raw)
}

/// `φ` on the torus with its tail ratio `|φ(−L)| / max|φ|`.
pub fn build_phi(grid: &Arc<Grid>) -> Result<(Field, f64)> {
    let spec = spectrum_from_symbol(grid, |xi| Complex64::new(envelope_symbol(xi), 0.0))?;
    let phi = inverse_transform(&spec)?;
    let ratio = phi.values()[0].abs() / phi.max_abs();
    if !(ratio <= TAIL_TOLERANCE) {
        return Err(Error::DomainTooSmall {
            ratio,
            half_length: grid.half_length(),
            tolerance: TAIL_TOLERANCE,
        });
    }
    Ok((phi, ratio))
}

/// Envelope and sequence constructors sharing one grid.
#[derive(Debug, Clone)]
pub struct CounterexampleData {
    grid: Arc<Grid>,
    phi: Field,
    tail_ratio: f64,
}

impl CounterexampleData {
    pub fn new(grid: &Arc<Grid>) -> Result<Self> {
        let (phi, tail_ratio) = build_phi(grid)?;
        Ok(CounterexampleData {
            grid: grid.clone(),
            phi,
            tail_ratio,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn phi(&self) -> &Field {
        &self.phi
    }

    pub fn phi_spectrum(&self) -> Result<SpectralField> {
        spectrum_from_symbol(&self.grid, |xi| Complex64::new(envelope_symbol(xi), 0.0))
    }

    pub fn tail_ratio(&self) -> f64 {
        self.tail_ratio
    }

    pub fn carrier(&self, params: &InitDataParams) -> Result<Carrier> {
        snapped_carrier(&self.grid, params.n)
    }

    pub fn fn_spectrum(&self, params: &InitDataParams) -> Result<SpectralField> {
        let a = self.carrier(params)?.snapped;
        let amp = params.high_amplitude();
        // 1/(2i) = −i/2
        let factor = Complex64::new(0.0, -0.5 * amp);
        spectrum_from_symbol(&self.grid, |xi| {
            factor * (envelope_symbol(xi - a) - envelope_symbol(xi + a))
        })
    }

    pub fn gn_spectrum(&self, params: &InitDataParams) -> Result<SpectralField> {
        let amp = params.low_amplitude();
        spectrum_from_symbol(&self.grid, |xi| Complex64::new(amp * envelope_symbol(xi), 0.0))
    }

    pub fn u0n_spectrum(&self, params: &InitDataParams) -> Result<SpectralField> {
        self.fn_spectrum(params)?.add(&self.gn_spectrum(params)?)
    }

    /// `f_n = 2^{−ns} φ sin(a_n x)`.
    pub fn build_fn(&self, params: &InitDataParams) -> Result<Field> {
        inverse_transform(&self.fn_spectrum(params)?)
    }

    /// `g_n = (12/17) 2^{−n/Q} φ`, an exact scalar multiple of the stored `φ`.
    pub fn build_gn(&self, params: &InitDataParams) -> Result<Field> {
        Ok(self.phi.scaled(params.low_amplitude()))
    }

    /// `u₀ⁿ = f_n + g_n`.
    pub fn build_u0n(&self, params: &InitDataParams) -> Result<Field> {
        self.build_fn(params)?.add(&self.build_gn(params)?)
    }
}

/// Writes `(x, value)` rows.
pub fn write_field_csv<W: Write>(field: &Field, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "value"])?;
    let grid = field.grid();
    for (i, v) in field.values().iter().enumerate() {
        w.write_record([format!("{:e}", grid.x(i)), format!("{v:e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `(ξ, Re û, Im û)` rows in increasing `ξ`.
pub fn write_spectrum_csv<W: Write>(spec: &SpectralField, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["xi", "re", "im"])?;
    for (xi, c) in spec.coefficients() {
        w.write_record([format!("{xi:e}"), format!("{:e}", c.re), format!("{:e}", c.im)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_field_csv(field: &Field, path: &Path) -> Result<()> {
    write_field_csv(field, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn save_spectrum_csv(spec: &SpectralField, path: &Path) -> Result<()> {
    write_spectrum_csv(spec, std::io::BufWriter::new(std::fs::File::create(path)?))
}

/// Largest admissible carrier index on a grid (`None` if even `n = 3` fails).
pub fn max_resolvable_n(grid: &Grid) -> Option<u32> {
    (3..64).take_while(|&n| snapped_carrier(grid, n).is_ok()).last()
}

/// `φ(0) = (1/2π)∫φ̂` must lie in `[1/(4π), 1/(2π)]`.
pub fn phi_peak_bounds() -> (f64, f64) {
    (1.0 / (4.0 * PI), 1.0 / (2.0 * PI))
}
