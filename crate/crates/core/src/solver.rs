//! Pseudo-spectral RK4 integrator for the nonlocal form
//!
//! ```text
//! u_t + u^Q u_x = P(u),
//! P(u) = −∂x (1 − ∂x²)^{-1} [ a u^{Q+1} + b u^{Q−1} u_x² ],
//! a = (Q² + 3Q) / (2(Q+1)),  b = Q/2.
//! ```
//!
//! The state is kept as raw Fourier coefficients. Using
//! `u^Q u_x = ∂x(u^{Q+1})/(Q+1)`, the right-hand side is
//!
//! ```text
//! F(u)^ = −iξ [ Â/(Q+1) + (a Â + b B̂) / (1 + ξ²) ],   A = u^{Q+1},  B = u^{Q−1} u_x²
//! ```
//!
//! so it has zero mean by construction. `A` and `B` are formed on a
//! zero-padded grid large enough to make degree-`Q+1` products alias-free.
//! One complex inverse FFT of `(1 − ξ) ĉ` yields `u + i·u_x`, and one forward
//! FFT of `A + iB` is split by Hermitian symmetry.
//!
//! With padding, the semi-discrete system conserves `∫(u² + u_x²)` and the
//! mean exactly; only the time discretization perturbs them.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::besov::{BesovParams, BlockNorms};
use crate::error::{Error, Result};
use crate::littlewood_paley::FilterBank;
use crate::numeric::neumaier_sum;
use crate::spectral::{
    inverse_transform, padded_size, transform, Field, Grid, SpectralField,
};

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;
pub const DEFAULT_MAX_DT: f64 = 1e-3;

/// How products in the nonlinearity are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DealiasPolicy {
    /// Zero-padded to an alias-free size for degree `Q+1`.
    #[default]
    Padded,
    /// Products on the base grid, then truncated (aliased).
    Truncated,
}

/// Optional damping `exp(−α (|k|/(N/2))^order)` applied after each step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFilter {
    pub alpha: f64,
    pub order: u32,
}

impl Default for ExponentialFilter {
    fn default() -> Self {
        ExponentialFilter {
            alpha: 36.0,
            order: 36,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub q: u32,
    /// `None` selects `min(1e−3, stability bound)`.
    pub dt: Option<f64>,
    pub t_final: f64,
    pub dealias: DealiasPolicy,
    pub blowup_threshold: f64,
    pub snapshot_times: Vec<f64>,
    pub filter: Option<ExponentialFilter>,
}

impl SolverConfig {
    pub fn new(q: u32, t_final: f64) -> Self {
        SolverConfig {
            q,
            dt: None,
            t_final,
            dealias: DealiasPolicy::Padded,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
            snapshot_times: Vec::new(),
            filter: None,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_snapshots(mut self, times: &[f64]) -> Self {
        self.snapshot_times = times.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 1 {
            return Err(Error::config("nonlinearity degree Q must be >= 1"));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::config(format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::config(format!(
                "final time T must be finite and >= 0, got {}",
                self.t_final
            )));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::config("blow-up threshold must be positive"));
        }
        for &t in &self.snapshot_times {
            if !(t.is_finite() && t >= 0.0 && t <= self.t_final) {
                return Err(Error::config(format!(
                    "snapshot time {t} outside [0, T = {}]",
                    self.t_final
                )));
            }
        }
        if let Some(f) = self.filter {
            if !(f.alpha.is_finite() && f.alpha >= 0.0) || f.order == 0 {
                return Err(Error::config("filter needs alpha >= 0 and order >= 1"));
            }
        }
        Ok(())
    }
}

/// `0.5 / (‖u₀‖^Q_{L^∞} · k_max)`; infinite for the zero field.
pub fn stability_bound(u0_max: f64, q: u32, k_max: f64) -> f64 {
    let speed = u0_max.powi(q as i32) * k_max;
    if speed == 0.0 {
        f64::INFINITY
    } else {
        0.5 / speed
    }
}

/// Step actually used: the configured one (checked) or the default.
pub fn resolve_dt(config: &SolverConfig, u0_max: f64, k_max: f64) -> Result<f64> {
    let bound = stability_bound(u0_max, config.q, k_max);
    match config.dt {
        Some(dt) if dt > bound => Err(Error::Stability { dt, bound }),
        Some(dt) => Ok(dt),
        None => Ok(DEFAULT_MAX_DT.min(bound)),
    }
}

/// Nonlinear coefficients `(a, b)`.
pub fn coefficients(q: u32) -> (f64, f64) {
    let q = q as f64;
    ((q * q + 3.0 * q) / (2.0 * (q + 1.0)), 0.5 * q)
}

/// Evaluates the right-hand side on raw coefficient vectors, owning the
/// padded workspace.
pub struct ChOperator {
    grid: Arc<Grid>,
    q: u32,
    padded: usize,
    a: f64,
    b: f64,
    xi: Vec<f64>,
    helmholtz: Vec<f64>,
    /// `(source slot in N, slot of +k in M, slot of −k in M)` for every
    /// non-Nyquist mode.
    slots: Vec<(usize, usize, usize)>,
    buf: Vec<Complex64>,
    a_hat: Vec<Complex64>,
    b_hat: Vec<Complex64>,
    stages: [Vec<Complex64>; 3],
}

impl fmt::Debug for ChOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChOperator")
            .field("grid", &self.grid)
            .field("q", &self.q)
            .field("padded", &self.padded)
            .finish()
    }
}

impl ChOperator {
    pub fn new(grid: &Arc<Grid>, q: u32, dealias: DealiasPolicy) -> Result<Self> {
        if q < 1 {
            return Err(Error::config("nonlinearity degree Q must be >= 1"));
        }
        let n = grid.points();
        let padded = match dealias {
            DealiasPolicy::Padded => padded_size(n, q as usize + 1),
            DealiasPolicy::Truncated => n,
        };
        let (a, b) = coefficients(q);
        let xi = grid.wavenumbers();
        let helmholtz = xi.iter().map(|x| 1.0 / (1.0 + x * x)).collect();
        let slot = |k: i64| -> usize {
            if k >= 0 {
                k as usize
            } else {
                (padded as i64 + k) as usize
            }
        };
        let slots = (0..n)
            .filter(|&idx| idx != grid.nyquist_slot())
            .map(|idx| {
                let k = grid.lattice_index(idx);
                (idx, slot(k), slot(-k))
            })
            .collect();
        Ok(ChOperator {
            grid: grid.clone(),
            q,
            padded,
            a,
            b,
            xi,
            helmholtz,
            slots,
            buf: vec![Complex64::new(0.0, 0.0); padded],
            a_hat: vec![Complex64::new(0.0, 0.0); n],
            b_hat: vec![Complex64::new(0.0, 0.0); n],
            stages: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]),
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn padded_points(&self) -> usize {
        self.padded
    }

    /// Fills the workspace with `(Â, B̂)` on the base lattice, scaled to raw
    /// base-grid coefficients, and returns `max |u_x|` over the padded points.
    fn nonlinear_terms(&mut self, c: &[Complex64]) -> f64 {
        let n = self.grid.points();
        let m = self.padded;
        self.buf.fill(Complex64::new(0.0, 0.0));
        for &(idx, plus, _) in &self.slots {
            self.buf[plus] = c[idx] * (1.0 - self.xi[idx]);
        }
        self.grid.fft_in_place(&mut self.buf, true);
        let inv_n = 1.0 / n as f64;
        let q = self.q as i32;
        let mut max_ux = 0.0_f64;
        for z in self.buf.iter_mut() {
            let u = z.re * inv_n;
            let ux = z.im * inv_n;
            max_ux = max_ux.max(ux.abs());
            let upow = u.powi(q - 1);
            *z = Complex64::new(upow * u * u, upow * ux * ux);
        }
        self.grid.fft_in_place(&mut self.buf, false);
        let scale = n as f64 / m as f64;
        self.a_hat.fill(Complex64::new(0.0, 0.0));
        self.b_hat.fill(Complex64::new(0.0, 0.0));
        for &(idx, plus, minus) in &self.slots {
            let z = self.buf[plus];
            let zc = self.buf[minus].conj();
            self.a_hat[idx] = (z + zc) * (0.5 * scale);
            // (z − zc) / (2i) = −i (z − zc) / 2
            let d = z - zc;
            self.b_hat[idx] = Complex64::new(d.im, -d.re) * (0.5 * scale);
        }
        if max_ux.is_finite() {
            max_ux
        } else {
            f64::NAN
        }
    }

    /// `F(u)` into `out`; returns `max |u_x|` of the input state.
    pub fn rhs_raw(&mut self, c: &[Complex64], out: &mut [Complex64]) -> f64 {
        let n = self.grid.points();
        let max_ux = self.nonlinear_terms(c);
        let inv_q1 = 1.0 / (self.q as f64 + 1.0);
        for idx in 0..n {
            let (a_hat, b_hat) = (self.a_hat[idx], self.b_hat[idx]);
            let bracket = a_hat * inv_q1 + (a_hat * self.a + b_hat * self.b) * self.helmholtz[idx];
            // −iξ · bracket
            out[idx] = Complex64::new(bracket.im, -bracket.re) * self.xi[idx];
        }
        out[self.grid.nyquist_slot()] = Complex64::new(0.0, 0.0);
        max_ux
    }

    /// Raw coefficients of `P(u)`.
    pub fn nonlocal_raw(&mut self, c: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.points();
        self.nonlinear_terms(c);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for idx in 0..n {
            let bracket = (self.a_hat[idx] * self.a + self.b_hat[idx] * self.b) * self.helmholtz[idx];
            out[idx] = Complex64::new(bracket.im, -bracket.re) * self.xi[idx];
        }
        out[self.grid.nyquist_slot()] = Complex64::new(0.0, 0.0);
        out
    }

    /// One classical RK4 step of size `h` in place; returns `max |u_x|` of the
    /// state before the step.
    pub fn step_raw(&mut self, c: &mut [Complex64], h: f64) -> f64 {
        let n = c.len();
        let [mut k, mut acc, mut stage] = std::mem::take(&mut self.stages);

        let max_ux = self.rhs_raw(c, &mut k);
        for i in 0..n {
            acc[i] = k[i];
            stage[i] = c[i] + k[i] * (0.5 * h);
        }
        self.rhs_raw(&stage, &mut k);
        for i in 0..n {
            acc[i] += k[i] * 2.0;
            stage[i] = c[i] + k[i] * (0.5 * h);
        }
        self.rhs_raw(&stage, &mut k);
        for i in 0..n {
            acc[i] += k[i] * 2.0;
            stage[i] = c[i] + k[i] * h;
        }
        self.rhs_raw(&stage, &mut k);
        for i in 0..n {
            acc[i] += k[i];
            c[i] += acc[i] * (h / 6.0);
        }
        self.stages = [k, acc, stage];
        max_ux
    }

    /// `max |u_x|` of a state, sampled on the padded grid.
    pub fn max_slope(&mut self, c: &[Complex64]) -> f64 {
        self.buf.fill(Complex64::new(0.0, 0.0));
        for &(idx, plus, _) in &self.slots {
            self.buf[plus] = c[idx] * self.xi[idx];
        }
        self.grid.fft_in_place(&mut self.buf, true);
        let inv_n = 1.0 / self.grid.points() as f64;
        let m = self.buf.iter().fold(0.0_f64, |m, z| m.max(z.re.abs()));
        m * inv_n
    }
}

fn check_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::config("state and operator live on different grids"))
    }
}

fn check_finite(c: &[Complex64]) -> Result<()> {
    if c.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::numeric("non-finite spectral coefficients"));
    }
    Ok(())
}

/// `P(u)` for a physical field.
pub fn nonlocal_p(u: &Field, q: u32) -> Result<Field> {
    inverse_transform(&nonlocal_p_spectral(&transform(u)?, q)?)
}

pub fn nonlocal_p_spectral(u: &SpectralField, q: u32) -> Result<SpectralField> {
    check_finite(u.raw())?;
    let mut op = ChOperator::new(u.grid(), q, DealiasPolicy::Padded)?;
    SpectralField::from_raw(u.grid(), op.nonlocal_raw(u.raw()))
}

/// `−u^Q u_x + P(u)`, the time derivative of the solution at `u`.
pub fn rhs(u: &Field, q: u32) -> Result<Field> {
    inverse_transform(&rhs_spectral(&transform(u)?, q)?)
}

pub fn rhs_spectral(u: &SpectralField, q: u32) -> Result<SpectralField> {
    check_finite(u.raw())?;
    let mut op = ChOperator::new(u.grid(), q, DealiasPolicy::Padded)?;
    let mut out = vec![Complex64::new(0.0, 0.0); u.grid().points()];
    op.rhs_raw(u.raw(), &mut out);
    SpectralField::from_raw(u.grid(), out)
}

/// One RK4 step of size `dt`; non-finite results are reported as blow-up.
pub fn step_rk4(u: &Field, dt: f64, q: u32) -> Result<Field> {
    let spec = step_rk4_spectral(&transform(u)?, dt, q)?;
    inverse_transform(&spec)
}

pub fn step_rk4_spectral(u: &SpectralField, dt: f64, q: u32) -> Result<SpectralField> {
    check_finite(u.raw())?;
    let mut op = ChOperator::new(u.grid(), q, DealiasPolicy::Padded)?;
    let mut c = u.raw().to_vec();
    op.step_raw(&mut c, dt);
    if c.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        let partial = Trajectory::single(u.clone(), q, dt);
        return Err(Error::BlowUp {
            t: dt,
            max_slope: f64::NAN,
            partial: Box::new(partial),
        });
    }
    SpectralField::from_raw(u.grid(), c)
}

/// `∫(u² + u_x²) dx`.
pub fn energy(u: &Field) -> Result<f64> {
    Ok(energy_spectral(&transform(u)?))
}

/// Energy via discrete Plancherel (equal to the rectangle rule on samples of
/// `u` and its spectral derivative).
pub fn energy_spectral(u: &SpectralField) -> f64 {
    let grid = u.grid();
    let nyq = grid.nyquist_slot();
    let sum = neumaier_sum(u.raw().iter().enumerate().map(|(idx, c)| {
        let xi = if idx == nyq { 0.0 } else { grid.wavenumber(idx) };
        (1.0 + xi * xi) * c.norm_sqr()
    }));
    sum * grid.spacing() / grid.points() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub t: f64,
    pub energy: f64,
    pub mean: f64,
    pub max_ux: f64,
    /// `‖u(t)‖_{B^s_{p,r}}` when monitored and certifiable.
    pub besov: Option<f64>,
}

#[derive(Clone)]
pub struct Snapshot {
    pub t: f64,
    pub state: SpectralField,
}

/// Snapshots of `S_t(u₀)` plus per-step diagnostics.
#[derive(Clone)]
pub struct Trajectory {
    pub q: u32,
    pub dt: f64,
    pub steps: usize,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub final_time: f64,
    pub final_state: SpectralField,
    pub monitor: Option<BesovParams>,
}

impl fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trajectory")
            .field("q", &self.q)
            .field("dt", &self.dt)
            .field("steps", &self.steps)
            .field("snapshot_times", &self.snapshot_times())
            .field("final_time", &self.final_time)
            .finish()
    }
}

impl Trajectory {
    fn single(state: SpectralField, q: u32, dt: f64) -> Self {
        Trajectory {
            q,
            dt,
            steps: 0,
            snapshots: Vec::new(),
            diagnostics: Vec::new(),
            final_time: 0.0,
            final_state: state,
            monitor: None,
        }
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Spectral snapshot at exactly time `t`.
    pub fn at(&self, t: f64) -> Option<&SpectralField> {
        self.snapshots.iter().find(|s| s.t == t).map(|s| &s.state)
    }

    pub fn field_at(&self, t: f64) -> Result<Field> {
        let state = self
            .at(t)
            .ok_or_else(|| Error::config(format!("no snapshot at t = {t}")))?;
        inverse_transform(state)
    }

    pub fn final_field(&self) -> Result<Field> {
        inverse_transform(&self.final_state)
    }

    /// Largest `‖u(t)‖_B / ‖u(0)‖_B` over monitored rows.
    pub fn besov_growth(&self) -> Option<f64> {
        let first = self.diagnostics.first()?.besov?;
        if first == 0.0 {
            return Some(0.0);
        }
        self.diagnostics
            .iter()
            .filter_map(|r| r.besov)
            .map(|b| b / first)
            .reduce(f64::max)
    }

    pub fn energy_drift(&self) -> f64 {
        let e0 = self.diagnostics.first().map_or(0.0, |r| r.energy);
        let worst = self
            .diagnostics
            .iter()
            .map(|r| (r.energy - e0).abs())
            .fold(0.0, f64::max);
        if e0 == 0.0 {
            worst
        } else {
            worst / e0
        }
    }

    pub fn mean_drift(&self) -> f64 {
        let m0 = self.diagnostics.first().map_or(0.0, |r| r.mean);
        self.diagnostics
            .iter()
            .map(|r| (r.mean - m0).abs())
            .fold(0.0, f64::max)
    }

    /// Columns `t, energy, mean, max_ux, besov_s` (empty when unmonitored).
    pub fn write_diagnostics_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "energy", "mean", "max_ux", "besov_s"])?;
        for r in &self.diagnostics {
            w.write_record([
                format!("{:e}", r.t),
                format!("{:e}", r.energy),
                format!("{:e}", r.mean),
                format!("{:e}", r.max_ux),
                r.besov.map(|b| format!("{b:e}")).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_diagnostics_csv(&self, path: &Path) -> Result<()> {
        self.write_diagnostics_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    /// Columns `x, u` for the snapshot at `t`.
    pub fn save_snapshot_csv(&self, t: f64, path: &Path) -> Result<()> {
        let field = self.field_at(t)?;
        let mut w = csv::Writer::from_writer(std::io::BufWriter::new(std::fs::File::create(path)?));
        w.write_record(["x", "u"])?;
        let grid = field.grid();
        for (i, v) in field.values().iter().enumerate() {
            w.write_record([format!("{:e}", grid.x(i)), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Optional Besov-norm monitoring along a run.
#[derive(Debug, Clone, Copy)]
pub struct Monitor<'a> {
    pub bank: &'a FilterBank,
    pub params: BesovParams,
}

impl Monitor<'_> {
    fn measure(&self, state: &SpectralField) -> Result<Option<f64>> {
        match BlockNorms::of_spectrum(state, self.params.p, self.bank) {
            Ok(blocks) => Ok(Some(blocks.besov(self.params.s, self.params.r))),
            Err(Error::Truncation { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

fn filter_symbol(grid: &Grid, filter: ExponentialFilter) -> Vec<f64> {
    let half = (grid.points() / 2) as f64;
    (0..grid.points())
        .map(|idx| {
            let r = grid.lattice_index(idx).unsigned_abs() as f64 / half;
            (-filter.alpha * r.powi(filter.order as i32)).exp()
        })
        .collect()
}

/// Integrates from `u0` to `config.t_final`.
///
/// The interval is split at the snapshot times; each piece is covered by the
/// smallest number of equal steps not exceeding `dt`, so snapshots land
/// exactly on the requested times. The Nyquist mode of `u0` is discarded.
pub fn integrate(
    u0: &SpectralField,
    config: &SolverConfig,
    monitor: Option<Monitor<'_>>,
) -> Result<Trajectory> {
    config.validate()?;
    check_finite(u0.raw())?;
    if let Some(m) = &monitor {
        check_grid(m.bank.grid(), u0.grid())?;
    }
    let grid = u0.grid().clone();
    let u0_max = inverse_transform(u0)?.max_abs();
    let dt = resolve_dt(config, u0_max, grid.k_max())?;

    let mut op = ChOperator::new(&grid, config.q, config.dealias)?;
    let filter = config.filter.map(|f| filter_symbol(&grid, f));
    let mut c = u0.raw().to_vec();
    c[grid.nyquist_slot()] = Complex64::new(0.0, 0.0);

    let mut targets: Vec<f64> = config.snapshot_times.clone();
    targets.push(config.t_final);
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let mut snapshot_times = config.snapshot_times.clone();
    snapshot_times.sort_by(f64::total_cmp);
    snapshot_times.dedup();

    let mut traj = Trajectory {
        q: config.q,
        dt,
        steps: 0,
        snapshots: Vec::new(),
        diagnostics: Vec::new(),
        final_time: 0.0,
        final_state: u0.clone(),
        monitor: monitor.map(|m| m.params),
    };

    let record = |traj: &mut Trajectory, c: &[Complex64], t: f64, max_ux: f64| -> Result<()> {
        let state = SpectralField::from_raw(&grid, c.to_vec())?;
        let besov = match &monitor {
            Some(m) => m.measure(&state)?,
            None => None,
        };
        traj.diagnostics.push(DiagnosticRow {
            t,
            energy: energy_spectral(&state),
            mean: state.mean(),
            max_ux,
            besov,
        });
        Ok(())
    };

    let blow_up = |mut traj: Trajectory, c: &[Complex64], t: f64, slope: f64| -> Error {
        traj.final_time = t;
        if let Ok(state) = SpectralField::from_raw(&grid, c.to_vec()) {
            traj.final_state = state;
        }
        Error::BlowUp {
            t,
            max_slope: slope,
            partial: Box::new(traj),
        }
    };

    let mut t = 0.0_f64;
    if snapshot_times.first() == Some(&0.0) {
        traj.snapshots.push(Snapshot {
            t: 0.0,
            state: SpectralField::from_raw(&grid, c.clone())?,
        });
    }

    for &target in &targets {
        let span = target - t;
        if span > 0.0 {
            let steps = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for s in 0..steps {
                let prev = c.clone();
                let slope = op.step_raw(&mut c, h);
                if !(slope <= config.blowup_threshold) {
                    return Err(blow_up(traj, &prev, t, slope));
                }
                record(&mut traj, &prev, t, slope)?;
                if let Some(f) = &filter {
                    for (z, m) in c.iter_mut().zip(f) {
                        *z *= *m;
                    }
                }
                traj.steps += 1;
                t = if s + 1 == steps {
                    target
                } else {
                    t + h
                };
                if c.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return Err(blow_up(traj, &prev, t, f64::NAN));
                }
            }
        }
        if snapshot_times.contains(&target) && target > 0.0 {
            traj.snapshots.push(Snapshot {
                t: target,
                state: SpectralField::from_raw(&grid, c.clone())?,
            });
        }
    }

    let slope = op.max_slope(&c);
    if !(slope <= config.blowup_threshold) {
        return Err(blow_up(traj, &c, t, slope));
    }
    record(&mut traj, &c, t, slope)?;
    traj.final_time = t;
    traj.final_state = SpectralField::from_raw(&grid, c)?;
    Ok(traj)
}

/// Convenience wrapper taking a physical initial field.
pub fn integrate_field(
    u0: &Field,
    config: &SolverConfig,
    monitor: Option<Monitor<'_>>,
) -> Result<Trajectory> {
    integrate(&transform(u0)?, config, monitor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small_grid() -> Arc<Grid> {
        Grid::new(PI, 64).unwrap()
    }

    #[test]
    fn coefficient_values() {
        assert_eq!(coefficients(1), (1.0, 0.5));
        assert_eq!(coefficients(2), (10.0 / 6.0, 1.0));
    }

    #[test]
    fn nonlocal_single_mode() {
        let g = small_grid();
        let u = Field::from_fn(&g, f64::sin).unwrap();
        let p = nonlocal_p(&u, 1).unwrap();
        for (i, v) in p.values().iter().enumerate() {
            assert!((v + 0.1 * (2.0 * g.x(i)).sin()).abs() < 1e-13);
        }
        let f = rhs(&u, 1).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            assert!((v + 0.6 * (2.0 * g.x(i)).sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn trivial_states() {
        let g = small_grid();
        let zero = Field::zeros(&g);
        assert_eq!(nonlocal_p(&zero, 2).unwrap().max_abs(), 0.0);
        assert_eq!(rhs(&zero, 3).unwrap().max_abs(), 0.0);
        assert_eq!(step_rk4(&zero, 1e-2, 1).unwrap().max_abs(), 0.0);
        let c = Field::from_fn(&g, |_| 0.3).unwrap();
        assert!(nonlocal_p(&c, 1).unwrap().max_abs() < 1e-15);
        let stepped = step_rk4(&c, 1e-2, 2).unwrap();
        for v in stepped.values() {
            assert!((v - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn energy_examples() {
        let g = small_grid();
        for k in [1.0, 3.0] {
            let u = Field::from_fn(&g, |x| (k * x).sin()).unwrap();
            assert!((energy(&u).unwrap() - PI * (1.0 + k * k)).abs() < 1e-12);
        }
        assert_eq!(energy(&Field::zeros(&g)).unwrap(), 0.0);
    }

    #[test]
    fn stability_check_rejects_large_dt() {
        let g = small_grid();
        let u = Field::from_fn(&g, |x| x.sin()).unwrap();
        let cfg = SolverConfig::new(1, 0.1).with_dt(1.0);
        assert!(matches!(
            integrate_field(&u, &cfg, None),
            Err(Error::Stability { .. })
        ));
    }

    #[test]
    fn snapshots_land_on_requested_times() {
        let g = small_grid();
        let u = Field::from_fn(&g, |x| 0.1 * x.sin()).unwrap();
        let cfg = SolverConfig::new(1, 0.01).with_dt(3e-3).with_snapshots(&[0.0, 0.0025, 0.01]);
        let traj = integrate_field(&u, &cfg, None).unwrap();
        assert_eq!(traj.snapshot_times(), vec![0.0, 0.0025, 0.01]);
        assert_eq!(traj.final_time, 0.01);
        // 0.0025 in one step, 0.0075 in three
        assert_eq!(traj.steps, 4);
        assert_eq!(traj.diagnostics.len(), 5);
    }

    #[test]
    fn blow_up_is_reported() {
        let g = small_grid();
        let u = Field::from_fn(&g, |x| x.sin()).unwrap();
        let mut cfg = SolverConfig::new(1, 0.01);
        cfg.blowup_threshold = 0.5;
        match integrate_field(&u, &cfg, None) {
            Err(Error::BlowUp { t, partial, .. }) => {
                assert_eq!(t, 0.0);
                assert_eq!(partial.steps, 0);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
