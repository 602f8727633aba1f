//! Batch front-end: `estimate`, `rates`, `levels` and `verify`.
//!
//! Exit codes: 0 success, 1 failed verification, 2 configuration or usage
//! error, 3 runtime error.

mod config;
mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{Experiment, ExperimentConfig, ReferenceSpec, ScheduleSpec, SweepSpec};
pub use verify::{verify, Check, Status};

use crate::error::{Error, Result};
use crate::mlmc::{estimate, level_profile, LevelStats, MlmcResult};
use crate::oracle::{closed_form_sf, reference_estimate};

#[derive(Debug, Parser)]
#[command(name = "levy-mlmc", version, about = "Multilevel Monte Carlo for Lévy-driven SDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the multilevel estimator; prints result JSON.
    Estimate(Common),
    /// Cost versus RMS error over `sweep.tau_list`; prints CSV.
    Rates(Common),
    /// Per-level mean, variance and envelope; prints CSV.
    Levels(Common),
    /// Check model, schedule and coupling invariants.
    Verify(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; never changes the output.
    #[arg(long)]
    workers: Option<usize>,
    /// Write output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Runtime(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFiniteState { .. } => Failure::Runtime(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Verify) => 1,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    }
}

fn load(common: &Common) -> std::result::Result<(Experiment, u64), Failure> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Failure::Config(format!("{}: {e}", common.config.display())))?;
    let exp = Experiment::from_json(&text)?;
    if common.workers == Some(0) {
        return Err(Failure::Config("--workers must be positive".into()));
    }
    let seed = common.seed.unwrap_or(exp.config.seed);
    Ok((exp, seed))
}

fn emit(common: &Common, text: &str) -> std::result::Result<(), Failure> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Runtime(e.to_string()))
        }
    }
}

fn dispatch(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Estimate(c) => {
            let (exp, seed) = load(&c)?;
            let r = run_estimate(&exp, seed, c.workers)?;
            emit(&c, &estimate_json(&r))
        }
        Command::Rates(c) => {
            let (exp, seed) = load(&c)?;
            let (rows, slope) = run_rates(&exp, seed, c.workers)?;
            emit(&c, &rates_csv(&rows, slope))
        }
        Command::Levels(c) => {
            let (exp, seed) = load(&c)?;
            let rows = run_levels(&exp, seed, c.workers)?;
            emit(&c, &levels_csv(&rows))
        }
        Command::Verify(c) => {
            let (exp, seed) = load(&c)?;
            let checks = verify(&exp, seed, c.workers);
            let mut text = String::new();
            for ch in &checks {
                text.push_str(&ch.to_string());
                text.push('\n');
            }
            let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
            text.push_str(&format!("verify: {} checks, {} failed\n", checks.len(), failed));
            emit(&c, &text)?;
            if failed > 0 {
                Err(Failure::Verify)
            } else {
                Ok(())
            }
        }
    }
}

pub fn run_estimate(exp: &Experiment, seed: u64, workers: Option<usize>) -> Result<MlmcResult> {
    let schedule = exp.schedule(None)?;
    estimate(&exp.problem(), &schedule, seed, workers)
}

pub fn estimate_json(r: &MlmcResult) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("finite floats serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatesRow {
    pub tau: f64,
    pub cost: f64,
    /// RMS error over the repetitions against the reference value.
    pub abs_error: f64,
    /// Root mean square of the reported standard errors.
    pub stderr: f64,
    pub repetitions: u64,
}

/// Reference value for `rates`: the closed form when it exists, else the
/// configured fine single-level simulation.
pub fn reference_value(exp: &Experiment, seed: u64, workers: Option<usize>) -> Result<f64> {
    match closed_form_sf(&exp.problem()) {
        Ok(v) => Ok(v),
        Err(Error::NotConstantCoefficient | Error::UnsupportedPayoff(_)) => {
            let r = exp.config.reference.as_ref().ok_or_else(|| {
                Error::Config("no closed form for this problem; add a \"reference\" section".into())
            })?;
            Ok(reference_estimate(&exp.problem(), r.eps, r.h, r.n, seed ^ 0x5eed_5eed, workers)?.value)
        }
        Err(e) => Err(e),
    }
}

pub fn run_rates(exp: &Experiment, seed: u64, workers: Option<usize>) -> Result<(Vec<RatesRow>, f64)> {
    let sweep = exp
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("rates needs a \"sweep\" section".into()))?;
    if sweep.repetitions == 0 || sweep.tau_list.is_empty() {
        return Err(Error::Config("sweep needs repetitions >= 1 and a non-empty tau_list".into()));
    }
    let reference = reference_value(exp, seed, workers)?;
    let mut rows = Vec::with_capacity(sweep.tau_list.len());
    for &tau in &sweep.tau_list {
        let schedule = exp.schedule(Some(tau))?;
        let mut se2 = 0.0;
        let mut sq = 0.0;
        for r in 0..sweep.repetitions {
            let res = estimate(&exp.problem(), &schedule, seed.wrapping_add(r), workers)?;
            sq += (res.estimate - reference).powi(2);
            se2 += res.stderr.powi(2);
        }
        let reps = sweep.repetitions as f64;
        rows.push(RatesRow {
            tau,
            cost: schedule.cost(),
            abs_error: (sq / reps).sqrt(),
            stderr: (se2 / reps).sqrt(),
            repetitions: sweep.repetitions,
        });
    }
    let slope = loglog_slope(
        &rows.iter().map(|r| r.cost).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.abs_error).collect::<Vec<_>>(),
    );
    Ok((rows, slope))
}

/// Least-squares slope of `ln y` against `ln x` over the points with both
/// coordinates positive; NaN with fewer than two such points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn rates_csv(rows: &[RatesRow], slope: f64) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tau", "cost", "abs_error", "stderr", "repetitions"])
        .expect("in-memory write");
    for r in rows {
        w.write_record(&[
            r.tau.to_string(),
            r.cost.to_string(),
            r.abs_error.to_string(),
            r.stderr.to_string(),
            r.repetitions.to_string(),
        ])
        .expect("in-memory write");
    }
    let mut s = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv");
    s.push_str(&format!("# slope of ln(abs_error) vs ln(cost): {slope}\n"));
    s
}

pub fn run_levels(exp: &Experiment, seed: u64, workers: Option<usize>) -> Result<Vec<LevelStats>> {
    let schedule = exp.schedule(None)?;
    level_profile(&exp.problem(), &schedule, seed, exp.config.n_probe, workers)
}

pub fn levels_csv(rows: &[LevelStats]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "n", "eps", "h", "mean", "var", "envelope", "breakpoints"])
        .expect("in-memory write");
    for l in rows {
        w.write_record(&[
            l.k.to_string(),
            l.n.to_string(),
            l.eps.to_string(),
            l.h.to_string(),
            l.mean.to_string(),
            l.var.to_string(),
            l.envelope.to_string(),
            l.breakpoints.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 10.0, 100.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.25)).collect();
        assert!((loglog_slope(&x, &y) + 0.25).abs() < 1e-12);
        // exact zero errors carry no rate information
        assert!((loglog_slope(&[1.0, 10.0, 100.0, 1000.0], &[0.0, 2.0, 1.0, 0.5]) + 0.30103).abs() < 1e-5);
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_nan());
    }

    #[test]
    fn csv_headers_are_frozen() {
        let s = rates_csv(&[], -0.3);
        assert!(s.starts_with("tau,cost,abs_error,stderr,repetitions\n"));
        assert!(s.ends_with("-0.3\n"));
        assert_eq!(levels_csv(&[]), "k,n,eps,h,mean,var,envelope,breakpoints\n");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["levy-mlmc", "estimate"]), 2);
        assert_eq!(run(["levy-mlmc", "frobnicate"]), 2);
        assert_eq!(run(["levy-mlmc", "estimate", "--config", "/nonexistent.json"]), 2);
    }
}
