use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gch_cli::{execute, CliError, Overrides, RunConfig};
use gch_core::besov::Exponent;

/// Runs one experiment and writes resolved-config.json, report.json and CSV
/// tables into a fresh timestamped directory under --out.
#[derive(Debug, Parser)]
#[command(name = "gch", version)]
struct Args {
    /// JSON config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// lp-check, norm, solve, prop-small-time, prop33, lower-bound,
    /// theorem11 or inequalities.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated, e.g. 5,6,7.
    #[arg(long = "n-list")]
    n_list: Option<String>,
    /// Comma-separated, e.g. 0.01,0.02,0.04.
    #[arg(long = "t-list")]
    t_list: Option<String>,
    #[arg(long = "Q")]
    q: Option<u32>,
    #[arg(long)]
    s: Option<f64>,
    /// Number or "inf".
    #[arg(long)]
    p: Option<String>,
    /// Number or "inf".
    #[arg(long)]
    r: Option<String>,
    #[arg(long = "L")]
    half_length: Option<f64>,
    #[arg(long = "N")]
    points: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "T")]
    t_final: Option<f64>,
    /// phi, fn, gn, u0n, zero or constant.
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "corpus-size")]
    corpus_size: Option<usize>,
}

fn list<T: std::str::FromStr>(key: &str, text: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{key}: cannot parse {s:?}")))
        })
        .collect()
}

fn overrides(a: &Args) -> Result<Overrides, CliError> {
    let mut o = Overrides::default();
    if let Some(v) = &a.experiment {
        o.set("experiment", v)?;
    }
    if let Some(v) = &a.out {
        o.set("out", v)?;
    }
    if let Some(v) = a.threads {
        o.set("threads", v)?;
    }
    if let Some(v) = &a.n_list {
        o.set("n_list", list::<u32>("n-list", v)?)?;
    }
    if let Some(v) = &a.t_list {
        o.set("t_list", list::<f64>("t-list", v)?)?;
    }
    if let Some(v) = a.q {
        o.set("Q", v)?;
    }
    if let Some(v) = a.s {
        o.set("s", v)?;
    }
    for (key, v) in [("p", &a.p), ("r", &a.r)] {
        if let Some(v) = v {
            let e: Exponent = v.parse()?;
            o.set(key, e)?;
        }
    }
    if let Some(v) = a.half_length {
        o.set("L", v)?;
    }
    if let Some(v) = a.points {
        o.set("N", v)?;
    }
    if let Some(v) = a.dt {
        o.set("dt", v)?;
    }
    if let Some(v) = a.t_final {
        o.set("T", v)?;
    }
    if let Some(v) = &a.field {
        o.set("field", v)?;
    }
    if let Some(v) = a.seed {
        o.set("seed", v)?;
    }
    if let Some(v) = a.corpus_size {
        o.set("corpus_size", v)?;
    }
    Ok(o)
}

fn run(a: &Args) -> Result<i32, CliError> {
    let cfg = RunConfig::load(a.config.as_deref(), &overrides(a)?)?;
    let outcome = execute(&cfg)?;
    print!("{}", outcome.report.summary());
    println!("output: {}", outcome.dir.display());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
