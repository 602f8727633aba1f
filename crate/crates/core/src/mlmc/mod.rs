//! Multilevel estimator and its level schedules.
//!
//! `Ŝ(f) = (1/n₁) Σ f(Υ⁽¹⁾) + Σ_{k≥2} (1/n_k) Σ [f(Υ⁽ᵏ⁾) − f(Υ⁽ᵏ⁻¹⁾)]`, every
//! level sampled independently. Sample `i` of level `k` draws from the stream
//! `seed / k / i`; per-level values are reduced in index order with
//! compensated summation, so results do not depend on the worker count.

mod schedule;

use rayon::prelude::*;
use serde::Serialize;

pub use schedule::{GStarSolver, LevelSchedule, Provenance};

use crate::error::{Error, Result};
use crate::levy_model::LevyModel;
use crate::payoffs::Payoff;
use crate::scheme::{simulate_level, simulate_pair, CoefficientField};
use crate::stream::RngStream;

/// Everything that defines the target `E f(Y)`.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub model: &'a LevyModel,
    pub coeff: &'a CoefficientField,
    pub y0: &'a [f64],
    pub payoff: &'a Payoff,
}

impl<'a> Problem<'a> {
    pub fn new(model: &'a LevyModel, coeff: &'a CoefficientField, y0: &'a [f64], payoff: &'a Payoff) -> Self {
        Self {
            model,
            coeff,
            y0,
            payoff,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.coeff.dim_x() != self.model.dim_x() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim_x(),
                found: self.coeff.dim_x(),
            });
        }
        if self.y0.len() != self.coeff.dim_y() {
            return Err(Error::DimensionMismatch {
                expected: self.coeff.dim_y(),
                found: self.y0.len(),
            });
        }
        self.payoff.check_dim(self.coeff.dim_y())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelStats {
    /// 1-based level index.
    pub k: usize,
    pub n: u64,
    pub mean: f64,
    pub var: f64,
    pub eps: f64,
    pub h: f64,
    /// `ε_{k-1} ln(e/ε_{k-1}) + F(h_{k-1})`, with `ε₀ = 1`, `h₀ = ∞`.
    pub envelope: f64,
    /// Mean number of grid points of the fine path.
    pub breakpoints: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MlmcResult {
    pub estimate: f64,
    pub stderr: f64,
    pub cost: f64,
    pub levels: Vec<LevelStats>,
}

impl MlmcResult {
    pub fn level_means(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.mean).collect()
    }

    pub fn level_vars(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.var).collect()
    }

    pub fn empirical_breakpoints(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.breakpoints).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("finite floats serialize")
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Mean and unbiased variance (0 for a single sample), both compensated.
pub(crate) fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mut s = CompensatedSum::default();
    xs.iter().for_each(|&x| s.add(x));
    let mean = s.value() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let mut q = CompensatedSum::default();
    xs.iter().for_each(|&x| q.add((x - mean) * (x - mean)));
    (mean, q.value() / (n - 1.0))
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool.
pub(crate) fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn level_envelope(model: &LevyModel, schedule: &LevelSchedule, i: usize) -> f64 {
    let (eps, h) = if i == 0 {
        (1.0, f64::INFINITY)
    } else {
        (schedule.eps()[i - 1], schedule.h()[i - 1])
    };
    eps * (std::f64::consts::E / eps).ln() + model.f_small(h)
}

/// `(f(Υ⁽ᵏ⁾) − f(Υ⁽ᵏ⁻¹⁾), #fine grid points)` for one sample.
fn level_sample(problem: &Problem, schedule: &LevelSchedule, i: usize, stream: &RngStream) -> Result<(f64, usize)> {
    let fine = schedule.level_params(i);
    if i == 0 {
        let path = simulate_level(problem.model, problem.coeff, problem.y0, &fine, stream)?;
        return Ok((problem.payoff.evaluate(&path)?, path.len()));
    }
    let coarse = schedule.level_params(i - 1);
    let (pf, pc) = simulate_pair(problem.model, problem.coeff, problem.y0, &fine, &coarse, stream)?;
    let diff = problem.payoff.evaluate(&pf)? - problem.payoff.evaluate(&pc)?;
    Ok((diff, pf.len()))
}

fn run_levels(problem: &Problem, schedule: &LevelSchedule, seed: u64) -> Result<Vec<LevelStats>> {
    problem.validate()?;
    let root = RngStream::new(seed);
    let mut levels = Vec::with_capacity(schedule.m());
    for i in 0..schedule.m() {
        let level_stream = root.split(i as u64 + 1);
        let n = schedule.n()[i];
        let samples: Vec<Result<(f64, usize)>> = (0..n)
            .into_par_iter()
            .map(|j| level_sample(problem, schedule, i, &level_stream.split(j)))
            .collect();
        let mut values = Vec::with_capacity(n as usize);
        let mut points = CompensatedSum::default();
        for (j, s) in samples.into_iter().enumerate() {
            match s {
                Ok((v, p)) => {
                    values.push(v);
                    points.add(p as f64);
                }
                Err(Error::NonFiniteState { time, .. }) => {
                    return Err(Error::NonFiniteState {
                        time,
                        level: Some(i + 1),
                        sample: Some(j),
                    })
                }
                Err(e) => return Err(e),
            }
        }
        let (mean, var) = mean_var(&values);
        levels.push(LevelStats {
            k: i + 1,
            n,
            mean,
            var,
            eps: schedule.eps()[i],
            h: schedule.h()[i],
            envelope: level_envelope(problem.model, schedule, i),
            breakpoints: points.value() / n as f64,
        });
    }
    Ok(levels)
}

/// The multilevel estimate `Ŝ(f)` for `schedule`.
///
/// `workers` fixes the size of the thread pool; `None` uses the global one.
/// The output is bit-identical for every choice.
pub fn estimate(problem: &Problem, schedule: &LevelSchedule, seed: u64, workers: Option<usize>) -> Result<MlmcResult> {
    let levels = with_workers(workers, || run_levels(problem, schedule, seed))??;
    let mut est = CompensatedSum::default();
    let mut var = CompensatedSum::default();
    for l in &levels {
        est.add(l.mean);
        var.add(l.var / l.n as f64);
    }
    Ok(MlmcResult {
        estimate: est.value(),
        stderr: var.value().sqrt(),
        cost: schedule.cost(),
        levels,
    })
}

/// Per-level statistics with `n_probe` samples on every level of `schedule`.
pub fn level_profile(
    problem: &Problem,
    schedule: &LevelSchedule,
    seed: u64,
    n_probe: u64,
    workers: Option<usize>,
) -> Result<Vec<LevelStats>> {
    if n_probe < 100 {
        return Err(Error::InvalidSchedule(format!("n_probe must be at least 100, got {n_probe}")));
    }
    let probe = schedule.with_n(vec![n_probe; schedule.m()])?;
    with_workers(workers, || run_levels(problem, &probe, seed))?
}

/// Which case of the rate theorem the dominating function suggests: case II
/// when `g⁻¹(x) x^{3/4}` does not grow between `x = 10⁶` and `x = 10¹²`.
pub fn suggested_case(model: &LevyModel) -> Result<u8> {
    let g = model.dominating_bound()?;
    let probe = |x: f64| g.inverse(x) * x.powf(0.75);
    Ok(if probe(1e12) <= probe(1e6) * (1.0 + 1e-12) { 2 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::{JumpMeasure, TruncatedStable};
    use nalgebra::{DMatrix, DVector};

    fn model() -> LevyModel {
        LevyModel::new(
            DMatrix::zeros(1, 1),
            DVector::from_element(1, 0.3),
            JumpMeasure::TruncatedStable(TruncatedStable::new(1.5, 1.0, 1)),
            None,
        )
        .unwrap()
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut s = CompensatedSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn constant_payoff_is_exact() {
        let m = model();
        let coeff = CoefficientField::constant(DMatrix::from_element(1, 1, 2.0)).unwrap();
        let payoff = Payoff::constant(4.2);
        let s = LevelSchedule::dyadic(&m, vec![50, 20, 10, 5], true).unwrap();
        let r = estimate(&Problem::new(&m, &coeff, &[1.0], &payoff), &s, 7, None).unwrap();
        assert_eq!(r.estimate, 4.2);
        assert_eq!(r.stderr, 0.0);
        assert!(r.levels[1..].iter().all(|l| l.mean == 0.0 && l.var == 0.0));
    }

    #[test]
    fn stderr_identity_and_workers() {
        let m = model();
        let coeff = CoefficientField::cosine(DMatrix::from_element(1, 1, 1.0)).unwrap();
        let payoff = Payoff::lookback(0);
        let s = LevelSchedule::dyadic(&m, vec![200, 100, 50, 25], true).unwrap();
        let p = Problem::new(&m, &coeff, &[0.5], &payoff);
        let a = estimate(&p, &s, 3, Some(1)).unwrap();
        let b = estimate(&p, &s, 3, Some(4)).unwrap();
        assert_eq!(a, b);
        let se2: f64 = a.levels.iter().map(|l| l.var / l.n as f64).sum();
        assert!((a.stderr * a.stderr - se2).abs() <= 1e-15 * se2.max(1.0));
        let sum: f64 = a.level_means().iter().sum();
        assert!((a.estimate - sum).abs() < 1e-14);
        assert_eq!(a.cost, s.cost());
    }

    #[test]
    fn envelope_ratio_tends_to_two_to_minus_third() {
        let m = LevyModel::pure_jump(
            JumpMeasure::TruncatedStable(TruncatedStable::new(1.5, 1.0, 1).with_radius(1e6)),
            1,
        )
        .unwrap();
        let s = LevelSchedule::dyadic(&m, vec![1; 40], true).unwrap();
        let e: Vec<f64> = (0..40).map(|i| level_envelope(&m, &s, i)).collect();
        let r = e[39] / e[38];
        assert!((r - 2f64.powf(-1.0 / 3.0)).abs() < 1e-3, "{r}");
    }

    #[test]
    fn nonfinite_carries_coordinates() {
        let m = model();
        let coeff = CoefficientField::custom(1, 1, 1.0, |y| DMatrix::from_element(1, 1, 1e300 * (1.0 + y[0].abs())));
        let payoff = Payoff::terminal(vec![1.0]);
        let s = LevelSchedule::dyadic(&m, vec![3, 2], true).unwrap();
        match estimate(&Problem::new(&m, &coeff, &[1.0], &payoff), &s, 0, Some(2)) {
            Err(Error::NonFiniteState { level: Some(1), sample: Some(0), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn profile_rejects_tiny_probe() {
        let m = model();
        let coeff = CoefficientField::constant(DMatrix::from_element(1, 1, 1.0)).unwrap();
        let payoff = Payoff::terminal(vec![1.0]);
        let s = LevelSchedule::dyadic(&m, vec![1, 1], true).unwrap();
        assert!(level_profile(&Problem::new(&m, &coeff, &[0.0], &payoff), &s, 0, 10, None).is_err());
    }

    #[test]
    fn case_advice() {
        let mk = |a| {
            LevyModel::pure_jump(JumpMeasure::TruncatedStable(TruncatedStable::new(a, 1.0, 1)), 1).unwrap()
        };
        assert_eq!(suggested_case(&mk(1.2)).unwrap(), 2);
        assert_eq!(suggested_case(&mk(1.5)).unwrap(), 1);
    }
}
