//! Dispatch of a resolved configuration to one experiment.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use gch_core::experiments::{
    corpus_band, random_corpus, run_inequality_monitors, run_lower_bound, run_lp_check, run_norm,
    run_prop33, run_small_time, run_solve, run_theorem11, ExperimentReport,
};
use gch_core::spectral::{transform, SpectralField};
use gch_core::{CounterexampleData, Error, Field, FilterBank, Grid, InitDataParams};

use crate::config::{Experiment, FieldKind, RunConfig};
use crate::{CliError, EXIT_CRITERION, EXIT_PASS};

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub report: ExperimentReport,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed() {
            EXIT_PASS
        } else {
            EXIT_CRITERION
        }
    }
}

/// Creates `<out>/<experiment>-<timestamp>`, suffixed `-1`, `-2`, … if taken.
fn run_dir(out: &Path, experiment: Experiment) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out)?;
    let stamp = chrono::Local::now().format("%Y%m%dT%H%M%S");
    let base = format!("{experiment}-{stamp}");
    for k in 0.. {
        let name = if k == 0 { base.clone() } else { format!("{base}-{k}") };
        let dir = out.join(name);
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!("unbounded suffix search")
}

/// Runs `cfg` inside a pool of `cfg.threads` workers and writes
/// `resolved-config.json`, `report.json` and the table CSVs.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let dir = run_dir(&cfg.out_dir(), cfg.experiment)?;
    let resolved = serde_json::to_string_pretty(cfg).map_err(|e| CliError::Core(e.into()))?;
    std::fs::write(dir.join("resolved-config.json"), resolved)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads())
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let report = match pool.install(|| compute(cfg)) {
        Ok(r) => r,
        Err(CliError::Core(Error::BlowUp {
            t,
            max_slope,
            partial,
        })) => {
            partial.save_diagnostics_csv(&dir.join("diagnostics-partial.csv"))?;
            return Err(CliError::Core(Error::BlowUp { t, max_slope, partial }));
        }
        Err(e) => return Err(e),
    };
    report.write_to(&dir)?;
    Ok(RunOutcome { dir, report })
}

fn first_n(cfg: &RunConfig) -> u32 {
    cfg.n_list()[0]
}

fn initial_field(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<(String, SpectralField), CliError> {
    let kind = cfg.field.unwrap_or(FieldKind::U0n);
    let n = first_n(cfg);
    let spec = match kind {
        FieldKind::Zero => return Ok(("zero".into(), SpectralField::zeros(grid))),
        FieldKind::Constant => {
            return Ok(("constant".into(), transform(&Field::from_fn(grid, |_| 1.0)?)?))
        }
        FieldKind::Phi => CounterexampleData::new(grid)?.phi_spectrum()?,
        FieldKind::Fn | FieldKind::Gn | FieldKind::U0n => {
            let data = CounterexampleData::new(grid)?;
            let p = InitDataParams::new(n, cfg.s, cfg.q)?;
            match kind {
                FieldKind::Fn => data.fn_spectrum(&p)?,
                FieldKind::Gn => data.gn_spectrum(&p)?,
                _ => data.u0n_spectrum(&p)?,
            }
        }
    };
    let label = match kind {
        FieldKind::Phi => "phi".to_string(),
        FieldKind::Fn => format!("f_{n}"),
        FieldKind::Gn => format!("g_{n}"),
        _ => format!("u0_{n}"),
    };
    Ok((label, spec))
}

fn compute(cfg: &RunConfig) -> Result<ExperimentReport, CliError> {
    let grid = Grid::new(cfg.half_length, cfg.points)?;
    let bank = FilterBank::new(&grid)?;
    let params = cfg.besov()?;
    let solver = cfg.solver();
    let report = match cfg.experiment {
        Experiment::LpCheck => run_lp_check(&bank, cfg.seed)?,
        Experiment::Norm => {
            let (label, spec) = initial_field(cfg, &grid)?;
            run_norm(&label, &spec, &params, &bank)?
        }
        Experiment::Solve => {
            let (_, u0) = initial_field(cfg, &grid)?;
            run_solve(&u0, &params, &bank, &solver)?.0
        }
        Experiment::PropSmallTime => {
            let (_, u0) = initial_field(cfg, &grid)?;
            run_small_time(&u0, &params, &bank, &solver, cfg.t_list())?
        }
        Experiment::Prop33 => {
            let (_, u0) = initial_field(cfg, &grid)?;
            run_prop33(&u0, &params, &bank, &solver, cfg.t_list())?
        }
        Experiment::LowerBound => {
            let data = CounterexampleData::new(&grid)?;
            run_lower_bound(&data, &bank, cfg.n_list(), &params, cfg.q)?
        }
        Experiment::Theorem11 => {
            let data = CounterexampleData::new(&grid)?;
            run_theorem11(&data, &bank, cfg.n_list(), cfg.t_list(), &params, &solver)?
        }
        Experiment::Inequalities => {
            let corpus = random_corpus(&grid, cfg.corpus_size, cfg.seed, corpus_band(&bank, cfg.q))?;
            run_inequality_monitors(&corpus, &params, &bank, cfg.q)?
        }
    };
    Ok(report)
}
