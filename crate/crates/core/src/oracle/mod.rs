//! Independent reference computations: quadrature of the Lévy measure,
//! closed forms for constant coefficients, Fourier inversion, plain Monte
//! Carlo at fine parameters and two-sample KS tests.

mod charfn;
mod ks;
mod quad;

use rayon::prelude::*;
use serde::Serialize;

pub use charfn::abs_moment_cf;
pub use ks::{kolmogorov_sf, ks_two_sample};
pub use quad::{integrate, integrate_from_zero, integrate_log, measure_quadrature, MeasureQuadrature};

use crate::error::{Error, Result};
use crate::levy_model::cov_factor;
use crate::mlmc::{LevelSchedule, Problem};
use crate::scheme::{simulate_level, LevelParams};
use crate::stream::RngStream;

/// `S(f) = ⟨w, y0 + A b⟩` for a constant coefficient `A` and a terminal
/// payoff, since `Y_1 = y0 + A X_1` and `E X_1 = b`.
pub fn closed_form_sf(problem: &Problem) -> Result<f64> {
    let a = problem.coeff.as_constant().ok_or(Error::NotConstantCoefficient)?;
    let w = problem
        .payoff
        .terminal_weights()
        .ok_or_else(|| Error::UnsupportedPayoff("closed form needs a terminal payoff".into()))?;
    if w.len() != a.nrows() || problem.y0.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: w.len(),
        });
    }
    let ab = a * problem.model.drift();
    Ok(w.iter()
        .zip(problem.y0)
        .zip(ab.iter())
        .map(|((wi, yi), abi)| wi * (yi + abi))
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub eps_ref: f64,
    pub h_ref: f64,
}

impl ReferenceEstimate {
    /// `eps_ref <= ε_m/4` and `h_ref <= h_m/2`.
    pub fn fine_enough_for(&self, schedule: &LevelSchedule) -> bool {
        let m = schedule.m() - 1;
        self.eps_ref <= schedule.eps()[m] / 4.0 && self.h_ref <= schedule.h()[m] / 2.0
    }
}

/// Plain Monte Carlo mean of `f(Υ)` on a single fine level with Gaussian
/// correction at `h_ref`.
pub fn reference_estimate(
    problem: &Problem,
    eps_ref: f64,
    h_ref: f64,
    n: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<ReferenceEstimate> {
    if n < 1000 {
        return Err(Error::Config(format!("reference needs n >= 1000, got {n}")));
    }
    let corr = cov_factor(&problem.model.small_jump_cov(h_ref))?;
    let params = LevelParams::new(eps_ref, h_ref, corr);
    let root = RngStream::new(seed);
    let values = crate::mlmc::with_workers(workers, || {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let path = simulate_level(problem.model, problem.coeff, problem.y0, &params, &root.split(i))?;
                problem.payoff.evaluate(&path)
            })
            .collect::<Result<Vec<f64>>>()
    })??;
    let (value, var) = crate::mlmc::mean_var(&values);
    Ok(ReferenceEstimate {
        value,
        stderr: (var / n as f64).sqrt(),
        n,
        eps_ref,
        h_ref,
    })
}
