//! Short-time behaviour of the solution map: `‖S_t(u₀) − u₀‖ = O(t)` in
//! several Besov norms, and the first-order Taylor remainder
//! `R(t) = S_t(u₀) − u₀ − t·v₀ = O(t²)` with `v₀ = −u₀^Q ∂ₓu₀ + P(u₀)`.

use serde_json::json;

use super::fit::{order_fit, Fit};
use super::report::{Check, ExperimentReport, Table};
use crate::besov::{e_functional, lipschitz_norm, BesovParams, BlockNorms};
use crate::error::{Error, Result};
use crate::littlewood_paley::FilterBank;
use crate::solver::{integrate, rhs_spectral, SolverConfig, Trajectory};
use crate::spectral::{inverse_transform, SpectralField};

pub const SLOPE_WINDOW_LINEAR: (f64, f64) = (0.95, 1.05);
pub const SLOPE_WINDOW_QUADRATIC: (f64, f64) = (1.9, 2.1);

/// Besov norms of the initial datum entering the right-hand sides of the
/// short-time estimates.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DatumNorms {
    pub s_minus_1: f64,
    pub s: f64,
    pub s_plus_1: f64,
    pub s_plus_2: f64,
    pub linf: f64,
    pub lipschitz: f64,
    pub e_functional: f64,
}

impl DatumNorms {
    pub fn of(u0: &SpectralField, params: &BesovParams, bank: &FilterBank, q: u32) -> Result<Self> {
        let blocks = BlockNorms::of_spectrum(u0, params.p, bank)?;
        let field = inverse_transform(u0)?;
        Ok(DatumNorms {
            s_minus_1: blocks.besov(params.s - 1.0, params.r),
            s: blocks.besov(params.s, params.r),
            s_plus_1: blocks.besov(params.s + 1.0, params.r),
            s_plus_2: blocks.besov(params.s + 2.0, params.r),
            linf: field.max_abs(),
            lipschitz: lipschitz_norm(&field)?,
            e_functional: e_functional(&field, q)?,
        })
    }

    /// Right sides (without constants) of the `O(t)` estimates for the
    /// `B^{s−1}`, `B^s`, `B^{s+1}` and (critical case) `L^∞` differences.
    pub fn linear_bounds(&self, q: u32, critical: bool) -> [f64; 4] {
        let q = q as i32;
        let low = if critical { self.e_functional } else { self.s_minus_1 };
        [
            self.s_minus_1.powi(q) * self.s,
            self.s.powi(q + 1) + low.powi(q) * self.s_plus_1,
            self.s.powi(q) * self.s_plus_1 + low.powi(q) * self.s_plus_2,
            self.lipschitz.powi(q + 1),
        ]
    }

    /// Right side (without constant) of the `O(t²)` remainder estimate.
    pub fn quadratic_bound(&self, q: u32, critical: bool) -> f64 {
        let q = q as i32;
        let low = if critical { self.e_functional } else { self.s_minus_1 };
        self.s.powi(q + 1) + low.powi(q) * self.s_plus_1 + low.powi(2 * q) * self.s_plus_2
    }
}

/// One integration shared by the `O(t)` and `O(t²)` reports.
#[derive(Debug, Clone)]
pub struct SmallTimeRun {
    pub params: BesovParams,
    pub q: u32,
    pub t_grid: Vec<f64>,
    pub u0: SpectralField,
    pub v0: SpectralField,
    pub trajectory: Trajectory,
    pub datum: DatumNorms,
}

fn check_t_grid(t_grid: &[f64]) -> Result<Vec<f64>> {
    let mut ts = t_grid.to_vec();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    if ts.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::config("t grid must contain positive finite times"));
    }
    if ts.len() < 4 {
        return Err(Error::config("t grid needs at least 4 distinct times for an order fit"));
    }
    Ok(ts)
}

impl SmallTimeRun {
    pub fn new(
        u0: &SpectralField,
        params: &BesovParams,
        bank: &FilterBank,
        config: &SolverConfig,
        t_grid: &[f64],
    ) -> Result<Self> {
        let ts = check_t_grid(t_grid)?;
        let mut cfg = config.clone();
        cfg.t_final = *ts.last().expect("nonempty");
        cfg.snapshot_times = ts.clone();
        let datum = DatumNorms::of(u0, params, bank, cfg.q)?;
        let v0 = rhs_spectral(u0, cfg.q)?;
        let trajectory = integrate(u0, &cfg, None)?;
        Ok(SmallTimeRun {
            params: *params,
            q: cfg.q,
            t_grid: ts,
            u0: u0.clone(),
            v0,
            trajectory,
            datum,
        })
    }

    fn state(&self, t: f64) -> Result<&SpectralField> {
        self.trajectory
            .at(t)
            .ok_or_else(|| Error::numeric(format!("missing snapshot at t = {t}")))
    }

    fn parameters(&self) -> serde_json::Value {
        let grid = self.u0.grid();
        json!({
            "besov": self.params,
            "critical": self.params.is_critical(),
            "Q": self.q,
            "dt": self.trajectory.dt,
            "t_grid": self.t_grid,
            "L": grid.half_length(),
            "N": grid.points(),
        })
    }

    /// `‖S_t(u₀) − u₀‖` in `B^{s−1}`, `B^s`, `B^{s+1}` (and `L^∞` for the
    /// critical triple), each expected to grow linearly in `t`.
    pub fn linear_report(&self, bank: &FilterBank) -> Result<ExperimentReport> {
        let mut report = ExperimentReport::new("prop-small-time", self.parameters())?;
        report.measure("datum_norms", self.datum)?;
        let critical = self.params.is_critical();
        let bounds = self.datum.linear_bounds(self.q, critical);

        let mut table = Table::new(
            "small_time",
            "t; norms of S_t(u0)-u0 in B^{s-1}, B^s, B^{s+1}, L^inf; sup ratio ||S_t(u0)||_{B^s}/||u0||_{B^s}",
            &["t", "diff_s_minus_1", "diff_s", "diff_s_plus_1", "diff_linf", "norm_growth"],
        );
        let mut series: [Vec<f64>; 4] = Default::default();
        for &t in &self.t_grid {
            let state = self.state(t)?;
            let diff = state.sub(&self.u0)?;
            let scale = state.l2_norm().max(self.u0.l2_norm());
            let blocks = BlockNorms::of_difference(&diff, scale, self.params.p, bank)?;
            let d = [
                blocks.besov(self.params.s - 1.0, self.params.r),
                blocks.besov(self.params.s, self.params.r),
                blocks.besov(self.params.s + 1.0, self.params.r),
                inverse_transform(&diff)?.max_abs(),
            ];
            let sol = BlockNorms::of_spectrum(state, self.params.p, bank)?
                .besov(self.params.s, self.params.r);
            let growth = if self.datum.s == 0.0 { 0.0 } else { sol / self.datum.s };
            for (k, v) in d.iter().enumerate() {
                series[k].push(*v);
            }
            table.push_values(&[t, d[0], d[1], d[2], d[3], growth]);
        }
        let growth = table
            .column("norm_growth")
            .unwrap_or_default()
            .into_iter()
            .flatten()
            .fold(0.0, f64::max);
        report.measure_f64("norm_growth_sup", growth)?;

        let names = ["s_minus_1", "s", "s_plus_1", "linf"];
        let labels = ["B^{s-1}", "B^s", "B^{s+1}", "L^inf"];
        let used = if critical { 4 } else { 3 };
        if series.iter().take(used).all(|s| s.iter().all(|v| *v == 0.0)) {
            report.check(Check::new(
                "differences-vanish",
                "S_t(u0) = u0 for every t",
                Some(0.0),
                "== 0",
                true,
            ));
        } else {
            let (lo, hi) = SLOPE_WINDOW_LINEAR;
            for k in 0..used {
                let fit = order_fit(&self.t_grid, &series[k])?;
                report.measure_fit(&format!("slope_{}", names[k]), &fit)?;
                let ratio = series[k]
                    .iter()
                    .zip(&self.t_grid)
                    .map(|(d, t)| d / (t * bounds[k]))
                    .fold(0.0, f64::max);
                if ratio.is_finite() {
                    report.measure_f64(&format!("prefactor_ratio_{}", names[k]), ratio)?;
                }
                report.check(Check::slope(
                    &format!("slope-{}", names[k]),
                    &format!("order of ||S_t(u0)-u0||_{}", labels[k]),
                    &fit,
                    lo,
                    hi,
                ));
            }
        }
        report.add_table(table)?;
        Ok(report)
    }

    /// `R(t) = ‖S_t(u₀) − u₀ − t·v₀‖_{B^s}`, expected to grow like `t²`.
    pub fn remainder_series(&self, bank: &FilterBank) -> Result<Vec<f64>> {
        self.t_grid
            .iter()
            .map(|&t| {
                let state = self.state(t)?;
                let r = state.sub(&self.u0)?.sub(&self.v0.scaled(t))?;
                let scale = state
                    .l2_norm()
                    .max(self.u0.l2_norm())
                    .max(t * self.v0.l2_norm());
                Ok(BlockNorms::of_difference(&r, scale, self.params.p, bank)?
                    .besov(self.params.s, self.params.r))
            })
            .collect()
    }

    pub fn quadratic_report(&self, bank: &FilterBank) -> Result<ExperimentReport> {
        let mut report = ExperimentReport::new("prop33", self.parameters())?;
        report.measure("datum_norms", self.datum)?;
        let residuals = self.remainder_series(bank)?;
        let mut table = Table::new(
            "prop33",
            "t; R(t)=||S_t(u0)-u0-t*v0||_{B^s}; R(t)/t^2",
            &["t", "residual", "residual_over_t2"],
        );
        for (t, r) in self.t_grid.iter().zip(&residuals) {
            table.push_values(&[*t, *r, r / (t * t)]);
        }
        let c_meas = residuals
            .iter()
            .zip(&self.t_grid)
            .map(|(r, t)| r / (t * t))
            .fold(0.0, f64::max);
        report.measure_f64("remainder_constant", c_meas)?;
        let bound = self.datum.quadratic_bound(self.q, self.params.is_critical());
        if bound > 0.0 {
            report.measure_f64("prefactor_ratio", c_meas / bound)?;
        }
        if residuals.iter().all(|r| *r == 0.0) {
            report.check(Check::new(
                "residual-vanishes",
                "S_t(u0) - u0 - t*v0 = 0 for every t",
                Some(0.0),
                "== 0",
                true,
            ));
        } else {
            let fit: Fit = order_fit(&self.t_grid, &residuals)?;
            report.measure_fit("slope_residual", &fit)?;
            let (lo, hi) = SLOPE_WINDOW_QUADRATIC;
            report.check(Check::slope(
                "slope-residual",
                "order of ||S_t(u0)-u0-t*v0||_{B^s}",
                &fit,
                lo,
                hi,
            ));
        }
        report.add_table(table)?;
        Ok(report)
    }
}

/// Integrates once and reports the `O(t)` difference estimates.
pub fn run_small_time(
    u0: &SpectralField,
    params: &BesovParams,
    bank: &FilterBank,
    config: &SolverConfig,
    t_grid: &[f64],
) -> Result<ExperimentReport> {
    SmallTimeRun::new(u0, params, bank, config, t_grid)?.linear_report(bank)
}

/// Integrates once and reports the `O(t²)` Taylor remainder.
pub fn run_prop33(
    u0: &SpectralField,
    params: &BesovParams,
    bank: &FilterBank,
    config: &SolverConfig,
    t_grid: &[f64],
) -> Result<ExperimentReport> {
    SmallTimeRun::new(u0, params, bank, config, t_grid)?.quadratic_report(bank)
}
