use std::fmt;

use rayon::prelude::*;

use super::Experiment;
use crate::error::Result;
use crate::mlmc::{estimate, LevelSchedule};
use crate::oracle::{ks_two_sample, measure_quadrature};
use crate::scheme::{simulate_level, simulate_pair};
use crate::stream::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable to this config; never fails a run.
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check {
        name,
        status: if pass { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn skip(name: &'static str, detail: impl Into<String>) -> Check {
    Check {
        name,
        status: Status::Skip,
        detail: detail.into(),
    }
}

fn from_result(name: &'static str, r: Result<Check>) -> Check {
    r.unwrap_or_else(|e| check(name, false, e.to_string()))
}

const KS_SAMPLES: u64 = 2000;
const DETERMINISM_CAP: u64 = 16;

/// Runs the invariant suites against one experiment.
pub fn verify(exp: &Experiment, seed: u64, workers: Option<usize>) -> Vec<Check> {
    let schedule = exp.schedule(None);
    let mut out = vec![
        from_result("quadrature", quadrature(exp)),
        from_result("domination", domination(exp)),
        from_result("doubling", doubling(exp)),
        from_result("ue", ue(exp)),
        check(
            "lipschitz",
            exp.coeff.spot_check_lipschitz(&exp.config.y0, 200, seed),
            format!("declared K = {}", exp.coeff.lipschitz_const()),
        ),
    ];
    match &schedule {
        Err(e) => {
            out.push(check("schedule", false, e.to_string()));
            for name in ["correction", "coupling_ks", "determinism"] {
                out.push(skip(name, "no schedule"));
            }
        }
        Ok(s) => {
            out.push(schedule_preconditions(s));
            out.push(from_result("correction", correction(exp, s)));
            out.push(from_result("coupling_ks", coupling(exp, s, seed, workers)));
            out.push(from_result("determinism", determinism(exp, s, seed)));
        }
    }
    out
}

fn h_grid(exp: &Experiment, n: usize) -> Vec<f64> {
    let r = exp.model.support_radius();
    let top = if r.is_finite() && r > 0.0 { r } else { 1.0 };
    (0..n)
        .map(|i| top * 10f64.powf(-3.0 + 3.0 * i as f64 / (n - 1) as f64))
        .collect()
}

fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

/// Closed-form tail mass, F, F₀ and small-jump covariance against adaptive
/// quadrature.
fn quadrature(exp: &Experiment) -> Result<Check> {
    let m = &exp.model;
    let tol = 1e-8;
    let mut worst: f64 = 0.0;
    for h in h_grid(exp, 12) {
        let q = match measure_quadrature(m, h, 1e-11) {
            Ok(q) => q,
            Err(e) => return Ok(skip("quadrature", e.to_string())),
        };
        let scale_x = m.tail_second_moment(h).sqrt().max(m.tail_mass(h)).max(1e-300);
        let f0 = m.f_zero(h);
        let cov = m.small_jump_cov(h);
        let errs = [
            rel_err(m.tail_mass(h), q.tail_mass, q.tail_mass),
            rel_err(m.f_small(h), q.f_small, q.f_small),
            rel_err(cov.trace(), m.f_small(h), m.f_small(h)),
            f0.iter().zip(&q.f_zero).map(|(a, b)| rel_err(*a, *b, scale_x)).fold(0.0, f64::max),
            (&cov - &q.small_jump_cov).amax() / q.small_jump_cov.amax().max(1e-300),
        ];
        worst = errs.into_iter().filter(|e| !e.is_nan()).fold(worst, f64::max);
    }
    Ok(check("quadrature", worst <= tol, format!("max relative error {worst:.3e} (tolerance {tol:e})")))
}

/// `∫(|x|²/h² ∧ 1) ν(dx) <= g(h)` by quadrature on a log grid.
fn domination(exp: &Experiment) -> Result<Check> {
    let m = &exp.model;
    let g = m.dominating_bound()?;
    let r = m.support_radius();
    let top = if r.is_finite() && r > 0.0 { r } else { 1.0 };
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let h = top * 10f64.powf(-4.0 + 5.0 * i as f64 / 49.0);
        let gbar = match measure_quadrature(m, h, 1e-11) {
            Ok(q) => q.f_small / (h * h) + q.tail_mass,
            Err(_) => m.g_integral(h),
        };
        worst = worst.max(gbar / g.eval(h));
    }
    Ok(check(
        "domination",
        worst <= 1.0 + 1e-9,
        format!("max ḡ/g = {worst:.6} for g(h) = {} h^-{}", g.coef, g.exponent),
    ))
}

fn doubling(exp: &Experiment) -> Result<Check> {
    let g = exp.model.dominating_bound()?;
    let gamma = g.doubling_threshold();
    let report = exp.model.validate_doubling(gamma, &h_grid(exp, 40))?;
    Ok(check(
        "doubling",
        gamma > 1.0 && report.holds,
        format!("γ = {gamma:.6}, {} violations", report.violations.len()),
    ))
}

fn ue(exp: &Experiment) -> Result<Check> {
    let r = exp.model.check_ue(&h_grid(exp, 12), 64, f64::INFINITY)?;
    Ok(check(
        "ue",
        r.pass,
        format!("ϑ = {:.6} on a {}-dimensional subspace", r.theta, r.subspace_dim),
    ))
}

fn schedule_preconditions(s: &LevelSchedule) -> Check {
    let eps1 = s.eps()[0];
    check(
        "schedule",
        s.cost_bound_applies(),
        format!(
            "m = {}, ε₁ = {eps1}, cost = {}, tail mass within 1/ε: {}",
            s.m(),
            s.cost(),
            (0..s.m()).all(|k| s.tail_masses()[k] <= 1.0 / s.eps()[k])
        ),
    )
}

/// `Σ⁽ᵐ⁾ Σ⁽ᵐ⁾* = C(h_m)` when corrected.
fn correction(exp: &Experiment, s: &LevelSchedule) -> Result<Check> {
    if !s.is_corrected() {
        return Ok(skip("correction", "correction disabled"));
    }
    let target = exp.model.small_jump_cov(s.h()[s.m() - 1]);
    let f = s.correction_factor();
    let err = (f * f.transpose() - &target).amax();
    let scale = target.amax();
    Ok(check(
        "correction",
        err <= 1e-10 * scale.max(f64::MIN_POSITIVE),
        format!("|ΣΣ* - C(h_m)| = {err:.3e}"),
    ))
}

/// Fine marginal of the finest coupled pair against a direct draw of the
/// finest level.
fn coupling(exp: &Experiment, s: &LevelSchedule, seed: u64, workers: Option<usize>) -> Result<Check> {
    if s.m() < 2 {
        return Ok(skip("coupling_ks", "single level"));
    }
    let i = s.m() - 1;
    let (fine, coarse) = (s.level_params(i), s.level_params(i - 1));
    let (m, c, y0) = (&exp.model, &exp.coeff, exp.config.y0.as_slice());
    let root = RngStream::new(seed);
    let (pairs, singles) = crate::mlmc::with_workers(workers, || -> Result<(Vec<f64>, Vec<f64>)> {
        let pairs = (0..KS_SAMPLES)
            .into_par_iter()
            .map(|j| Ok(simulate_pair(m, c, y0, &fine, &coarse, &root.split(100).split(j))?.0.terminal()[0]))
            .collect::<Result<Vec<f64>>>()?;
        let singles = (0..KS_SAMPLES)
            .into_par_iter()
            .map(|j| Ok(simulate_level(m, c, y0, &fine, &root.split(101).split(j))?.terminal()[0]))
            .collect::<Result<Vec<f64>>>()?;
        Ok((pairs, singles))
    })??;
    let (d, p) = ks_two_sample(&pairs, &singles);
    Ok(check(
        "coupling_ks",
        p > 0.01,
        format!("level {}, n = {KS_SAMPLES}, D = {d:.4}, p = {p:.4}", i + 1),
    ))
}

/// Identical bits across repeated runs and worker counts.
fn determinism(exp: &Experiment, s: &LevelSchedule, seed: u64) -> Result<Check> {
    let small = s.with_n(s.n().iter().map(|&n| n.min(DETERMINISM_CAP)).collect())?;
    let p = exp.problem();
    let runs = [
        estimate(&p, &small, seed, Some(1))?,
        estimate(&p, &small, seed, Some(1))?,
        estimate(&p, &small, seed, Some(3))?,
    ];
    let same = runs.iter().all(|r| r.estimate.to_bits() == runs[0].estimate.to_bits() && r == &runs[0]);
    Ok(check("determinism", same, format!("estimate {} over 3 runs", runs[0].estimate)))
}
