//! Run configuration: flat JSON, overridable from the command line.

use std::fmt;
use std::path::{Path, PathBuf};

use gch_core::besov::{BesovParams, Exponent};
use gch_core::solver::{DealiasPolicy, SolverConfig, DEFAULT_BLOWUP_THRESHOLD};
use gch_core::Grid;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

pub const DEFAULT_HALF_LENGTH: f64 = 1024.0;
pub const DEFAULT_POINTS: usize = 1 << 20;
pub const DEFAULT_SEED: u64 = 20240601;
pub const DEFAULT_CORPUS: usize = 50;
pub const DEFAULT_SOLVE_T: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    LpCheck,
    Norm,
    Solve,
    PropSmallTime,
    Prop33,
    LowerBound,
    Theorem11,
    Inequalities,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::LpCheck,
        Experiment::Norm,
        Experiment::Solve,
        Experiment::PropSmallTime,
        Experiment::Prop33,
        Experiment::LowerBound,
        Experiment::Theorem11,
        Experiment::Inequalities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::LpCheck => "lp-check",
            Experiment::Norm => "norm",
            Experiment::Solve => "solve",
            Experiment::PropSmallTime => "prop-small-time",
            Experiment::Prop33 => "prop33",
            Experiment::LowerBound => "lower-bound",
            Experiment::Theorem11 => "theorem11",
            Experiment::Inequalities => "inequalities",
        }
    }

    fn default_n_list(self) -> Vec<u32> {
        match self {
            Experiment::LowerBound => (5..=9).collect(),
            Experiment::Theorem11 => vec![5, 6, 7],
            _ => vec![6],
        }
    }

    fn default_t_list(self) -> Vec<f64> {
        match self {
            Experiment::Theorem11 => vec![0.01, 0.02, 0.04],
            Experiment::PropSmallTime | Experiment::Prop33 => vec![0.00125, 0.0025, 0.005, 0.01],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Field selected by `norm` and `solve`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Phi,
    Fn,
    Gn,
    U0n,
    Zero,
    Constant,
}

/// Every key of the JSON schema. After [`RunConfig::resolve`] all optional
/// entries are filled, and the result is what gets echoed as
/// `resolved-config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(rename = "L", default = "default_l")]
    pub half_length: f64,
    #[serde(rename = "N", default = "default_n")]
    pub points: usize,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_two")]
    pub p: Exponent,
    #[serde(default = "default_two")]
    pub r: Exponent,
    #[serde(rename = "Q", default = "default_q")]
    pub q: u32,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(rename = "T", default)]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub dealias: DealiasPolicy,
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
    #[serde(default)]
    pub n_list: Option<Vec<u32>>,
    #[serde(default)]
    pub t_list: Option<Vec<f64>>,
    #[serde(default)]
    pub field: Option<FieldKind>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_corpus")]
    pub corpus_size: usize,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_l() -> f64 {
    DEFAULT_HALF_LENGTH
}
fn default_n() -> usize {
    DEFAULT_POINTS
}
fn default_s() -> f64 {
    2.0
}
fn default_two() -> Exponent {
    Exponent::new(2.0).expect("2 is a valid exponent")
}
fn default_q() -> u32 {
    1
}
fn default_blowup() -> f64 {
    DEFAULT_BLOWUP_THRESHOLD
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_corpus() -> usize {
    DEFAULT_CORPUS
}

/// Command-line overrides, already converted to JSON values keyed like the
/// config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides(pub Map<String, Value>);

impl Overrides {
    pub fn set(&mut self, key: &str, value: impl Serialize) -> Result<(), CliError> {
        let v = serde_json::to_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        self.0.insert(key.to_string(), v);
        Ok(())
    }
}

impl RunConfig {
    /// Reads `path` (if any), applies `overrides` on top, fills defaults and
    /// validates.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut map = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                match serde_json::from_str::<Value>(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
                {
                    Value::Object(m) => m,
                    _ => return Err(CliError::Config(format!("{}: expected a JSON object", p.display()))),
                }
            }
            None => Map::new(),
        };
        for (k, v) in &overrides.0 {
            map.insert(k.clone(), v.clone());
        }
        Self::from_value(Value::Object(map))
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.resolve()
    }

    /// Fills the per-experiment defaults and checks every precondition.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let e = self.experiment;
        if self.n_list.is_none() {
            self.n_list = Some(e.default_n_list());
        }
        if self.t_list.is_none() {
            self.t_list = Some(e.default_t_list());
        }
        if self.field.is_none() {
            self.field = Some(FieldKind::U0n);
        }
        if self.threads.is_none() {
            self.threads = Some(
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1),
            );
        }
        if self.out.is_none() {
            self.out = Some(PathBuf::from("runs"));
        }
        let t_max = self.t_list().iter().cloned().fold(0.0, f64::max);
        self.t_final = Some(match e {
            Experiment::PropSmallTime | Experiment::Prop33 | Experiment::Theorem11 => t_max,
            _ => self.t_final.unwrap_or(DEFAULT_SOLVE_T.max(t_max)),
        });
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        Grid::new(self.half_length, self.points)?;
        self.besov()?;
        self.solver().validate()?;
        if self.threads() == 0 {
            return Err(CliError::Config("threads must be >= 1".into()));
        }
        let ns = self.n_list();
        if ns.is_empty() {
            return Err(CliError::Config("n_list must not be empty".into()));
        }
        if let Some(n) = ns.iter().find(|n| **n < 3) {
            return Err(CliError::Config(format!("n_list entry {n} below 3")));
        }
        if self.t_list().iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(CliError::Config("t_list entries must be finite and >= 0".into()));
        }
        match self.experiment {
            Experiment::PropSmallTime | Experiment::Prop33 => {
                if self.t_list().iter().filter(|t| **t > 0.0).count() < 4 {
                    return Err(CliError::Config("t_list needs at least 4 positive times".into()));
                }
            }
            Experiment::Theorem11 => {
                if !self.t_list().iter().any(|t| *t > 0.0) {
                    return Err(CliError::Config("t_list needs a positive time".into()));
                }
            }
            Experiment::Inequalities => {
                if self.corpus_size < 4 {
                    return Err(CliError::Config("corpus_size must be >= 4".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn besov(&self) -> Result<BesovParams, CliError> {
        Ok(BesovParams::new(self.s, self.p.value(), self.r.value())?)
    }

    pub fn solver(&self) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.q, self.t_final.unwrap_or(DEFAULT_SOLVE_T));
        cfg.dt = self.dt;
        cfg.dealias = self.dealias;
        cfg.blowup_threshold = self.blowup_threshold;
        cfg.snapshot_times = self.t_list().to_vec();
        cfg
    }

    pub fn n_list(&self) -> &[u32] {
        self.n_list.as_deref().unwrap_or(&[])
    }

    pub fn t_list(&self) -> &[f64] {
        self.t_list.as_deref().unwrap_or(&[])
    }

    pub fn threads(&self) -> usize {
        self.threads.unwrap_or(1)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("runs"))
    }

    pub fn is_critical(&self) -> bool {
        self.besov().map(|b| b.is_critical()).unwrap_or(false)
    }
}
