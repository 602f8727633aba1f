use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::measure::RadialTable;
use super::{JumpMeasure, LevyModel, PowerLawBound};
use crate::error::{Error, Result};
use crate::stream::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    pub holds: bool,
    /// Exact largest admissible `γ` for power-law `g`.
    pub threshold: f64,
    /// Grid points where `g(γh/2) < 2 g(h)`.
    pub violations: Vec<f64>,
}

pub(super) fn validate_doubling(model: &LevyModel, gamma: f64, h_grid: &[f64]) -> Result<DoublingReport> {
    let g = model.dominating_bound()?;
    let violations: Vec<f64> = h_grid
        .iter()
        .copied()
        .filter(|&h| {
            let lhs = g.eval(gamma * h / 2.0);
            let rhs = 2.0 * g.eval(h);
            lhs < rhs * (1.0 - 1e-12)
        })
        .collect();
    Ok(DoublingReport {
        holds: violations.is_empty(),
        threshold: g.doubling_threshold(),
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BgIndex {
    pub value: f64,
    /// Set when the value comes from a numerical fit.
    pub approximate: bool,
}

pub(super) fn bg_index(model: &LevyModel) -> BgIndex {
    match model.measure() {
        JumpMeasure::TruncatedStable(s) => BgIndex {
            value: s.alpha,
            approximate: false,
        },
        JumpMeasure::FiniteActivity(_) => BgIndex {
            value: 0.0,
            approximate: false,
        },
        JumpMeasure::TabulatedRadial(t) => BgIndex {
            value: fitted_index(t),
            approximate: true,
        },
    }
}

/// Least-squares slope of `log ν(B(0,h)^c)` against `-log h` over the lowest
/// decade of the table; `∫_{B(0,1)} |x|^p ν` is finite iff `p` exceeds it.
fn fitted_index(t: &RadialTable) -> f64 {
    let r0 = t.radii()[0];
    let hi = (10.0 * r0).min(t.support_radius() / 4.0).max(r0 * 1.5);
    let n = 24;
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let h = r0 * (hi / r0).powf(i as f64 / (n - 1) as f64);
            (h.ln(), t.tail_mass(h).max(1e-300).ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (-sxy / sxx).clamp(0.0, 2.0)
}

/// Canonical `g` for a tabulated measure.
pub(super) fn tabulated_bound(model: &LevyModel, t: &RadialTable) -> PowerLawBound {
    let beta = t.head_index();
    if !(beta > 0.0 && beta < 2.0) {
        // finite activity head: ḡ(h) <= ∫|x|²ν / h² everywhere
        return PowerLawBound {
            coef: model.second_moment(),
            exponent: 2.0,
        };
    }
    let r0 = t.radii()[0];
    // ḡ(h) h^β tends to this as h → 0 (pure power-law head)
    let head_coef = t.density_at(r0) * r0.powf(1.0 + beta);
    let mut sup = head_coef * (1.0 / (2.0 - beta) + 1.0 / beta);
    let (lo, hi) = ((r0 * 1e-3).ln(), (t.support_radius() * 2.0).ln());
    let n = 2000;
    for i in 0..=n {
        let h = (lo + (hi - lo) * i as f64 / n as f64).exp();
        sup = sup.max(model.g_integral(h) * h.powf(beta));
    }
    PowerLawBound {
        coef: 1.01 * sup,
        exponent: beta,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UEReport {
    pub h_max: f64,
    pub theta: f64,
    pub subspace_dim: usize,
    pub pass: bool,
}

/// Ratio of largest to smallest directional second moment of the small jumps
/// over the support subspace, maximised over `h_grid`.
///
/// The support subspace must be spanned by coordinate axes; any other
/// degeneracy is reported as [`Error::DegenerateSmallJumps`].
pub(super) fn check_ue(
    model: &LevyModel,
    h_grid: &[f64],
    direction_samples: usize,
    theta_bound: f64,
) -> Result<UEReport> {
    let d = model.dim_x();
    let mut theta: f64 = 1.0;
    let mut subspace: Option<Vec<usize>> = None;
    let mut stable = true;
    let mut rng = RngStream::new(0x75e).rng();

    for &h in h_grid {
        let c = model.small_jump_cov(h);
        let trace = c.trace();
        if trace <= 0.0 {
            continue;
        }
        let tol = 1e-10 * trace;
        let axes: Vec<usize> = (0..d).filter(|&i| c[(i, i)] > tol).collect();
        let eig = SymmetricEigen::new(c.clone());
        let nonzero = eig.eigenvalues.iter().filter(|&&l| l > tol).count();
        if nonzero != axes.len() {
            return Err(Error::DegenerateSmallJumps { h });
        }
        match &subspace {
            None => subspace = Some(axes.clone()),
            Some(s) if *s != axes => stable = false,
            _ => {}
        }

        let embed = |v: &DVector<f64>| {
            let mut full = DVector::zeros(d);
            for (k, &i) in axes.iter().enumerate() {
                full[i] = v[k];
            }
            full
        };
        let k = axes.len();
        let mut probes: Vec<DVector<f64>> = (0..k)
            .map(|j| {
                let mut e = DVector::zeros(k);
                e[j] = 1.0;
                embed(&e)
            })
            .collect();
        for (j, l) in eig.eigenvalues.iter().enumerate() {
            if *l > tol {
                probes.push(eig.eigenvectors.column(j).into_owned());
            }
        }
        for _ in 0..direction_samples {
            let v: DVector<f64> = DVector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
            let n = v.norm();
            if n > 0.0 {
                probes.push(embed(&(v / n)));
            }
        }
        let moments: Vec<f64> = probes.iter().map(|y| directional(&c, y)).collect();
        let max = moments.iter().copied().fold(0.0, f64::max);
        let min = moments.iter().copied().fold(f64::INFINITY, f64::min);
        theta = theta.max(if min > 0.0 { max / min } else { f64::INFINITY });
    }

    let subspace_dim = subspace.map_or(0, |s| s.len());
    Ok(UEReport {
        h_max: h_grid.iter().copied().fold(0.0, f64::max),
        theta,
        subspace_dim,
        pass: stable && theta.is_finite() && theta <= theta_bound,
    })
}

fn directional(c: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    (y.transpose() * c * y)[(0, 0)] / y.norm_squared()
}
