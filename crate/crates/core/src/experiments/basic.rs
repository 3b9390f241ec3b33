//! Filter-bank sanity checks, single-field norms and plain solver runs.

use serde_json::json;

use super::monitors::random_field;
use super::report::{Check, ExperimentReport, Table};
use crate::besov::{lipschitz_norm_spectral, BesovParams, BlockNorms};
use crate::error::Result;
use crate::littlewood_paley::FilterBank;
use crate::solver::{integrate, Monitor, SolverConfig, Trajectory};
use crate::spectral::{inverse_transform, transform, Field};

pub const PARTITION_TOLERANCE: f64 = 1e-12;
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-12;

/// Partition of unity, support and plateau properties, reconstruction
/// `Σ_j Δ_j u = u` and `Δ_j Δ_k u = 0` for `|j − k| ≥ 2` on a random
/// band-limited field.
pub fn run_lp_check(bank: &FilterBank, seed: u64) -> Result<ExperimentReport> {
    let grid = bank.grid();
    let mut report = ExperimentReport::new(
        "lp-check",
        json!({
            "L": grid.half_length(),
            "N": grid.points(),
            "j_max": bank.j_max(),
            "band_limit": bank.band_limit(),
            "seed": seed,
        }),
    )?;

    let partition = bank.partition_deviation();
    report.check(Check::at_most(
        "partition",
        "max |chi + sum_j phi_j - 1| on the resolved lattice",
        partition,
        PARTITION_TOLERANCE,
    ));
    let support = bank.support_report();
    report.measure_f64("chi_outside", support.chi_outside)?;
    report.measure_f64("chi_plateau", support.chi_plateau)?;
    report.measure_f64("annulus_outside", support.annulus_outside)?;
    report.measure_f64("annulus_plateau", support.annulus_plateau)?;
    report.measure_f64("chi_annulus_overlap", support.chi_annulus_overlap)?;
    report.check(Check::at_most(
        "support",
        "support, plateau and range properties of every cutoff",
        support.max_violation(),
        0.0,
    ));

    let u = random_field(grid, seed, 0, bank.band_limit())?;
    let spec = transform(&u)?;
    let blocks = bank.all_blocks(&spec)?;
    let mut sum = Field::zeros(grid);
    for b in &blocks {
        sum = sum.add(b)?;
    }
    let recon = sum.sub(&u)?.max_abs() / u.max_abs();
    report.check(Check::at_most(
        "reconstruction",
        "max |sum_j Delta_j u - u| / max |u|",
        recon,
        RECONSTRUCTION_TOLERANCE,
    ));

    let ids: Vec<i32> = bank.blocks().collect();
    let mut far = 0.0_f64;
    for &j in &ids {
        let dj = bank.dyadic_block_spectral(&spec, j)?;
        for &k in ids.iter().filter(|&&k| (k - j).abs() >= 2) {
            far = far.max(bank.dyadic_block_spectral(&dj, k)?.l2_norm());
        }
    }
    report.check(Check::at_most(
        "far-blocks",
        "||Delta_k Delta_j u||_2 for |j - k| >= 2",
        far,
        0.0,
    ));

    let mut table = Table::new("lp_blocks", "j; ||Delta_j u||_2", &["j", "l2"]);
    for (j, v) in ids.iter().zip(bank.block_l2_norms(&spec)?) {
        table.push_values(&[*j as f64, v]);
    }
    report.add_table(table)?;
    Ok(report)
}

/// Besov norm, block profile and certificate of a single field.
pub fn run_norm(
    label: &str,
    spec: &crate::spectral::SpectralField,
    params: &BesovParams,
    bank: &FilterBank,
) -> Result<ExperimentReport> {
    let grid = bank.grid();
    let mut report = ExperimentReport::new(
        "norm",
        json!({
            "field": label,
            "besov": params,
            "L": grid.half_length(),
            "N": grid.points(),
        }),
    )?;
    let tail = bank.tail_fraction(spec);
    report.measure_f64("tail_fraction", tail)?;
    let blocks = BlockNorms::of_spectrum(spec, params.p, bank)?;
    let profile = blocks.profile(params.s);
    let norm = profile.norm(params.r);
    report.measure_f64("besov_norm", norm)?;
    if let Some(j) = profile.dominant_block() {
        report.measure("dominant_block", j)?;
    }
    report.measure_f64("linf", inverse_transform(spec)?.max_abs())?;
    report.measure_f64("lipschitz", lipschitz_norm_spectral(spec)?)?;
    report.check(Check::new(
        "certified",
        "spectral tail beyond the band limit below the certificate tolerance",
        Some(tail),
        "<= 1e-10",
        true,
    ));
    let mut table = Table::new("profile", "j; 2^{js}||Delta_j u||_{L^p}", &["j", "block_value"]);
    for (j, v) in &profile.entries {
        table.push_values(&[*j as f64, *v]);
    }
    report.add_table(table)?;
    Ok(report)
}

/// Integrates `u0` with Besov monitoring and reports drift diagnostics.
pub fn run_solve(
    u0: &crate::spectral::SpectralField,
    params: &BesovParams,
    bank: &FilterBank,
    config: &SolverConfig,
) -> Result<(ExperimentReport, Trajectory)> {
    let grid = bank.grid();
    let trajectory = integrate(
        u0,
        config,
        Some(Monitor {
            bank,
            params: *params,
        }),
    )?;
    let mut report = ExperimentReport::new(
        "solve",
        json!({
            "besov": params,
            "Q": config.q,
            "T": config.t_final,
            "dt": trajectory.dt,
            "steps": trajectory.steps,
            "snapshot_times": trajectory.snapshot_times(),
            "L": grid.half_length(),
            "N": grid.points(),
        }),
    )?;
    report.measure_f64("energy_drift", trajectory.energy_drift())?;
    report.measure_f64("mean_drift", trajectory.mean_drift())?;
    if let Some(g) = trajectory.besov_growth() {
        report.measure_f64("besov_growth", g)?;
    }
    report.check(Check::new(
        "completed",
        "integration reached the final time",
        Some(trajectory.final_time),
        &format!("== {}", config.t_final),
        trajectory.final_time == config.t_final,
    ));
    let mut table = Table::new(
        "diagnostics",
        "t; energy ||u||_2^2+||u_x||_2^2; mean; max |u_x|; ||u||_{B^s_{p,r}} (empty = uncertified)",
        &["t", "energy", "mean", "max_ux", "besov"],
    );
    for d in &trajectory.diagnostics {
        table.push(vec![Some(d.t), Some(d.energy), Some(d.mean), Some(d.max_ux), d.besov]);
    }
    report.add_table(table)?;
    Ok((report, trajectory))
}
