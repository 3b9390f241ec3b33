//! Separation table for the pair `u₀ⁿ = f_n + g_n`, `f_n`:
//! `d₀(n) = ‖g_n‖_{B^s_{p,r}} → 0` while `sep(n, t) = ‖S_t(u₀ⁿ) − S_t(f_n)‖_{B^s_{p,r}}`
//! should stay of order `t`.
//!
//! The lower-bound arithmetic is cross-checked: writing
//! `S_t(u) = u + t·v(u) + R_u(t)`,
//!
//! ```text
//! sep(n, t) ≥ t·‖u₀ⁿ^Q ∂ₓu₀ⁿ − f_n^Q ∂ₓf_n‖_{B^s_{p,∞}} − d₀(n) − C·t²
//! ```
//!
//! with `C = max_t (‖R_{u₀ⁿ}(t)‖ + ‖R_{f_n}(t)‖) / t²` measured on the same runs.

use rayon::prelude::*;
use serde_json::json;

use super::report::{Check, ExperimentReport, Table};
use crate::besov::{BesovParams, BlockNorms, Exponent};
use crate::error::{Error, Result};
use crate::initdata::{CounterexampleData, InitDataParams};
use crate::littlewood_paley::FilterBank;
use crate::numeric::spread;
use crate::solver::{integrate, rhs_spectral, SolverConfig, Trajectory};
use crate::spectral::{dealias_product_spectral, derivative, inverse_transform, Field, SpectralField};

pub const FLATNESS_TOLERANCE: f64 = 0.25;
pub const DECAY_TOLERANCE: f64 = 1e-10;
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SeparationRow {
    pub n: u32,
    pub t: f64,
    pub d0: f64,
    pub sep: f64,
    /// `‖S_t(u₀ⁿ) − S_t(f_n) − g_n‖ / t` (undefined at `t = 0`).
    pub excess_over_t: Option<f64>,
    /// Right side of the cross-check inequality.
    pub lower_bound: f64,
}

impl SeparationRow {
    pub fn sep_over_t(&self) -> Option<f64> {
        (self.t > 0.0).then(|| self.sep / self.t)
    }
}

struct Cell {
    n: u32,
    high: bool,
    trajectory: Trajectory,
}

/// Norm of `spec`, a combination of fields with `L²` size up to `scale`.
fn norm(
    spec: &SpectralField,
    scale: f64,
    params: &BesovParams,
    bank: &FilterBank,
    r: Exponent,
) -> Result<f64> {
    Ok(BlockNorms::of_difference(spec, scale, params.p, bank)?.besov(params.s, r))
}

fn largest(fields: &[&SpectralField]) -> f64 {
    fields.iter().map(|f| f.l2_norm()).fold(0.0, f64::max)
}

/// `u^Q ∂ₓu`, dealiased.
fn transport_term(u: &Field, q: u32) -> Result<SpectralField> {
    let ux = derivative(u, 1)?;
    let mut factors: Vec<&Field> = vec![u; q as usize];
    factors.push(&ux);
    dealias_product_spectral(&factors)
}

pub fn run_theorem11(
    data: &CounterexampleData,
    bank: &FilterBank,
    n_list: &[u32],
    t_list: &[f64],
    params: &BesovParams,
    config: &SolverConfig,
) -> Result<ExperimentReport> {
    let q = config.q;
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut ts: Vec<f64> = t_list.iter().copied().filter(|t| *t > 0.0).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    if ns.is_empty() || ts.is_empty() || t_list.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::config("theorem11 needs nonempty n list and nonnegative t list"));
    }
    let inits: Vec<InitDataParams> = ns
        .iter()
        .map(|&n| InitDataParams::new(n, params.s, q))
        .collect::<Result<_>>()?;
    for p in &inits {
        data.carrier(p)?;
    }

    let mut cfg = config.clone();
    cfg.t_final = *ts.last().expect("nonempty");
    cfg.snapshot_times = std::iter::once(0.0).chain(ts.iter().copied()).collect();

    let jobs: Vec<(InitDataParams, bool)> = inits
        .iter()
        .flat_map(|p| [(*p, false), (*p, true)])
        .collect();
    let cells: Vec<Cell> = jobs
        .par_iter()
        .map(|(p, high)| {
            let u0 = if *high {
                data.fn_spectrum(p)?
            } else {
                data.u0n_spectrum(p)?
            };
            Ok(Cell {
                n: p.n,
                high: *high,
                trajectory: integrate(&u0, &cfg, None)?,
            })
        })
        .collect::<Result<_>>()?;

    let grid = data.grid();
    let mut report = ExperimentReport::new(
        "theorem11",
        json!({
            "besov": params,
            "Q": q,
            "n_list": ns,
            "t_list": ts,
            "dt": cells.first().map(|c| c.trajectory.dt),
            "L": grid.half_length(),
            "N": grid.points(),
        }),
    )?;

    let mut rows = Vec::new();
    let mut remainder_constant = 0.0_f64;
    let mut nonlinear = Vec::new();
    for p in &inits {
        let find = |high: bool| {
            cells
                .iter()
                .find(|c| c.n == p.n && c.high == high)
                .map(|c| &c.trajectory)
                .expect("cell computed")
        };
        let (tu, tf) = (find(false), find(true));
        let u0 = tu.at(0.0).expect("t = 0 snapshot").clone();
        let f0 = tf.at(0.0).expect("t = 0 snapshot").clone();
        let g = data.gn_spectrum(p)?;
        let d0 = norm(&g, 0.0, params, bank, params.r)?;

        let uf = inverse_transform(&u0)?;
        let ff = inverse_transform(&f0)?;
        let (tu_term, tf_term) = (transport_term(&uf, q)?, transport_term(&ff, q)?);
        let nl = tu_term.sub(&tf_term)?;
        let nl_norm = norm(&nl, largest(&[&tu_term, &tf_term]), params, bank, Exponent::INFINITY)?;
        nonlinear.push((p.n, nl_norm));

        let vu = rhs_spectral(&u0, q)?;
        let vf = rhs_spectral(&f0, q)?;
        let mut rem = Vec::new();
        for &t in &ts {
            let su = tu.at(t).expect("snapshot");
            let sf = tf.at(t).expect("snapshot");
            let su_scale = largest(&[su, &u0, &vu.scaled(t)]);
            let sf_scale = largest(&[sf, &f0, &vf.scaled(t)]);
            let ru = norm(&su.sub(&u0)?.sub(&vu.scaled(t))?, su_scale, params, bank, params.r)?;
            let rf = norm(&sf.sub(&f0)?.sub(&vf.scaled(t))?, sf_scale, params, bank, params.r)?;
            rem.push((ru + rf) / (t * t));
        }
        remainder_constant = rem.iter().cloned().fold(remainder_constant, f64::max);

        for &t in std::iter::once(&0.0).chain(ts.iter()) {
            let (su, sf) = (tu.at(t).expect("snapshot"), tf.at(t).expect("snapshot"));
            let scale = largest(&[su, sf]);
            let diff = su.sub(sf)?;
            let sep = norm(&diff, scale, params, bank, params.r)?;
            let excess_over_t = if t > 0.0 {
                Some(norm(&diff.sub(&g)?, scale, params, bank, params.r)? / t)
            } else {
                None
            };
            rows.push(SeparationRow {
                n: p.n,
                t,
                d0,
                sep,
                excess_over_t,
                lower_bound: f64::NAN,
            });
        }
    }
    for row in rows.iter_mut() {
        let nl = nonlinear.iter().find(|(n, _)| *n == row.n).expect("n").1;
        row.lower_bound = row.t * nl - row.d0 - remainder_constant * row.t * row.t;
    }
    report.measure_f64("remainder_constant", remainder_constant)?;
    report.measure("nonlinear_difference_b_s_p_inf", &nonlinear)?;

    let mut table = Table::new(
        "theorem11",
        "n; t; d0=||g_n||_{B^s_{p,r}}; sep=||S_t(u0n)-S_t(f_n)||_{B^s_{p,r}}; sep/t; ||S_t(u0n)-S_t(f_n)-g_n||/t; t*||u^Q u_x-f^Q f_x||_{B^s_{p,inf}}-d0-C*t^2",
        &["n", "t", "d0", "sep", "sep_over_t", "excess_over_t", "lower_bound"],
    );
    for r in &rows {
        table.push(vec![
            Some(r.n as f64),
            Some(r.t),
            Some(r.d0),
            Some(r.sep),
            r.sep_over_t(),
            r.excess_over_t,
            Some(r.lower_bound),
        ]);
    }

    // d0 decays by exactly 2^{-1/Q} per unit n.
    let d0s: Vec<(u32, f64)> = ns
        .iter()
        .map(|&n| (n, rows.iter().find(|r| r.n == n).expect("row").d0))
        .collect();
    let expected = (-1.0 / q as f64).exp2();
    let decay_dev = d0s
        .windows(2)
        .map(|w| {
            let per_n = (w[1].1 / w[0].1).powf(1.0 / (w[1].0 - w[0].0) as f64);
            (per_n / expected - 1.0).abs()
        })
        .fold(0.0, f64::max);
    report.check(Check::at_most(
        "d0-decay",
        "||g_n||_{B^s} ratio per unit n equals 2^{-1/Q}",
        decay_dev,
        DECAY_TOLERANCE,
    ));

    let identity_dev = rows
        .iter()
        .filter(|r| r.t == 0.0)
        .map(|r| (r.sep - r.d0).abs() / r.d0)
        .fold(0.0, f64::max);
    report.check(Check::at_most(
        "t0-identity",
        "sep(n, 0) = d0(n)",
        identity_dev,
        IDENTITY_TOLERANCE,
    ));

    // Floor over the two largest n, per t.
    let top: Vec<u32> = ns.iter().rev().take(2).copied().collect();
    let mut floors = Vec::new();
    for &t in &ts {
        let c0 = rows
            .iter()
            .filter(|r| r.t == t && top.contains(&r.n))
            .filter_map(SeparationRow::sep_over_t)
            .fold(f64::INFINITY, f64::min);
        floors.push((t, c0));
    }
    report.measure("c0_per_t", &floors)?;
    let c0_min = floors.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
    report.check(Check::new(
        "floor",
        "min over the two largest n of sep(n,t)/t is positive for every t",
        Some(c0_min),
        "> 0",
        c0_min > 0.0,
    ));
    if let Some(s) = spread(&floors.iter().map(|f| f.1).collect::<Vec<_>>()) {
        report.measure_f64("c0_spread_in_t", s)?;
    }

    let flat_n = ts
        .iter()
        .map(|&t| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.t == t)
                .filter_map(SeparationRow::sep_over_t)
                .collect();
            spread(&v).unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max);
    report.check(Check::at_most(
        "flat-in-n",
        "sep(n,t)/t flat in n (max/min - 1) for every t",
        flat_n,
        FLATNESS_TOLERANCE,
    ));

    let flat_t = ns
        .iter()
        .map(|&n| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.n == n)
                .filter_map(SeparationRow::sep_over_t)
                .collect();
            spread(&v).unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max);
    report.check(Check::at_most(
        "flat-in-t",
        "sep(n,t)/t flat in t (max/min - 1) for every n",
        flat_t,
        FLATNESS_TOLERANCE,
    ));

    let margin = rows
        .iter()
        .map(|r| r.sep - r.lower_bound)
        .fold(f64::INFINITY, f64::min);
    report.check(Check::new(
        "decomposition-bound",
        "sep >= t*||u^Q u_x - f^Q f_x||_{B^s_{p,inf}} - d0 - C*t^2 on every row",
        Some(margin),
        ">= 0",
        margin >= 0.0,
    ));

    let excess: Vec<f64> = rows.iter().filter_map(|r| r.excess_over_t).collect();
    if let Some(s) = spread(&excess) {
        report.measure_f64("excess_over_t_spread", s)?;
    }
    report.measure("rows", &rows)?;
    report.add_table(table)?;
    Ok(report)
}
