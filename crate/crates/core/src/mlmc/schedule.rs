use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy_model::{cov_factor, LevyModel, PowerLawBound};
use crate::scheme::LevelParams;

/// How a schedule was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Provenance {
    Manual,
    Case1 { tau: f64, c1: f64, c2: f64 },
    Case2 { tau: f64, c1: f64, c2: f64, g_star: f64 },
}

/// A fully instantiated multilevel plan. Levels are stored 0-based; level
/// `k` in the usual 1-based numbering sits at index `k - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSchedule {
    eps: Vec<f64>,
    h: Vec<f64>,
    n: Vec<u64>,
    tail_mass: Vec<f64>,
    correction_factor: DMatrix<f64>,
    corrected: bool,
    provenance: Provenance,
}

impl LevelSchedule {
    /// Explicit levels. `eps` and `h` must be positive and nonincreasing;
    /// equal neighbours give a degenerate level.
    pub fn manual(model: &LevyModel, eps: Vec<f64>, h: Vec<f64>, n: Vec<u64>, corrected: bool) -> Result<Self> {
        Self::build(model, eps, h, n, corrected, Provenance::Manual)
    }

    /// `ε_k = 2^{-k}`, `h_k = g⁻¹(2^k)` for `k = 1..=n.len()`.
    pub fn dyadic(model: &LevyModel, n: Vec<u64>, corrected: bool) -> Result<Self> {
        let g = model.dominating_bound()?;
        let (eps, h) = dyadic_levels(&g, n.len());
        Self::build(model, eps, h, n, corrected, Provenance::Manual)
    }

    /// `m = ⌊log₂ C₁(τ ln τ)^{2/3}⌋`,
    /// `n_k = ⌊C₂ τ^{1/3} (ln τ)^{-2/3} g⁻¹(2^k)/g⁻¹(2^m)⌋`.
    pub fn case1(model: &LevyModel, tau: f64, c1: f64, c2: f64) -> Result<Self> {
        check_constants(c1, c2)?;
        let g = model.dominating_bound()?;
        let plan = |tau: f64| -> Option<(usize, f64)> {
            if !(tau > 1.0) {
                return None;
            }
            let l = tau.ln();
            let m = (c1 * (tau * l).powf(2.0 / 3.0)).log2().floor();
            let base = c2 * tau.cbrt() * l.powf(-2.0 / 3.0);
            (m >= 2.0 && m <= 60.0 && base >= 1.0).then_some((m as usize, base))
        };
        let (m, base) = plan(tau).ok_or_else(|| Error::TauTooSmall {
            tau,
            min_tau: min_admissible(tau, |t| plan(t).is_some()),
        })?;
        let (eps, h) = dyadic_levels(&g, m);
        let n = level_sizes(&h, |ratio| base * ratio);
        Self::build(model, eps, h, n, true, Provenance::Case1 { tau, c1, c2 })
    }

    /// `m = ⌊log₂ C₁ g*(τ)⌋`,
    /// `n_k = max(1, ⌊C₂ g*(τ)²/ln g*(τ) · g⁻¹(2^k) g⁻¹(2^m)⌋)`.
    /// Only `m >= 2` is required of `τ`.
    pub fn case2(model: &LevyModel, tau: f64, c1: f64, c2: f64) -> Result<Self> {
        check_constants(c1, c2)?;
        let g = model.dominating_bound()?;
        let solver = GStarSolver::new(g);
        let plan = |tau: f64| -> Option<(usize, f64, f64)> {
            let gs = solver.solve(tau).ok()?;
            let m = (c1 * gs).log2().floor();
            if !(2.0..=60.0).contains(&m) {
                return None;
            }
            let hm = g.inverse(2f64.powi(m as i32));
            // below 1 whenever g⁻¹ decays faster than 1/x; n_k is clamped
            let base = c2 * gs * gs / gs.ln() * hm * hm;
            Some((m as usize, base, gs))
        };
        let (m, base, g_star) = match plan(tau) {
            Some(p) => p,
            None => {
                solver.solve(tau)?;
                return Err(Error::TauTooSmall {
                    tau,
                    min_tau: min_admissible(tau, |t| plan(t).is_some()),
                });
            }
        };
        let (eps, h) = dyadic_levels(&g, m);
        let n = level_sizes(&h, |ratio| base * ratio);
        Self::build(model, eps, h, n, true, Provenance::Case2 { tau, c1, c2, g_star })
    }

    fn build(
        model: &LevyModel,
        eps: Vec<f64>,
        h: Vec<f64>,
        n: Vec<u64>,
        corrected: bool,
        provenance: Provenance,
    ) -> Result<Self> {
        let m = eps.len();
        if m == 0 || h.len() != m || n.len() != m {
            return Err(Error::InvalidSchedule(format!(
                "need equally many eps, h, n (got {}, {}, {}), at least one",
                eps.len(),
                h.len(),
                n.len()
            )));
        }
        if eps.iter().chain(&h).any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidSchedule("eps and h must be positive and finite".into()));
        }
        if eps.windows(2).any(|w| w[1] > w[0]) || h.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidSchedule("eps and h must be nonincreasing".into()));
        }
        if n.contains(&0) {
            return Err(Error::InvalidSchedule("every level needs n >= 1".into()));
        }
        let tail_mass: Vec<f64> = h.iter().map(|&x| model.tail_mass(x)).collect();
        if provenance != Provenance::Manual {
            if let Some(k) = (0..m).find(|&k| tail_mass[k] > 1.0 / eps[k] * (1.0 + 1e-12)) {
                return Err(Error::InvalidSchedule(format!(
                    "tail mass {} at level {} exceeds 1/eps = {}; g does not dominate",
                    tail_mass[k],
                    k + 1,
                    1.0 / eps[k]
                )));
            }
        }
        let d = model.dim_x();
        let correction_factor = if corrected {
            cov_factor(&model.small_jump_cov(h[m - 1]))?
        } else {
            DMatrix::zeros(d, d)
        };
        Ok(Self {
            eps,
            h,
            n,
            tail_mass,
            correction_factor,
            corrected,
            provenance,
        })
    }

    pub fn m(&self) -> usize {
        self.eps.len()
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn n(&self) -> &[u64] {
        &self.n
    }

    /// `ν(B(0,h_k)^c)` per level.
    pub fn tail_masses(&self) -> &[f64] {
        &self.tail_mass
    }

    /// `Σ⁽ᵐ⁾`, zero for an uncorrected schedule.
    pub fn correction_factor(&self) -> &DMatrix<f64> {
        &self.correction_factor
    }

    pub fn is_corrected(&self) -> bool {
        self.corrected
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Parameters of level index `i` (0-based).
    pub fn level_params(&self, i: usize) -> LevelParams {
        LevelParams::new(self.eps[i], self.h[i], self.correction_factor.clone())
    }

    /// Same levels with the Gaussian correction switched off.
    pub fn without_correction(&self) -> Self {
        let d = self.correction_factor.nrows();
        Self {
            correction_factor: DMatrix::zeros(d, d),
            corrected: false,
            ..self.clone()
        }
    }

    /// Same levels with new sample sizes.
    pub fn with_n(&self, n: Vec<u64>) -> Result<Self> {
        if n.len() != self.m() || n.contains(&0) {
            return Err(Error::InvalidSchedule("sample sizes must match levels and be >= 1".into()));
        }
        Ok(Self { n, ..self.clone() })
    }

    /// `Σ_k n_k [ν(B(0,h_k)^c) + 1/ε_k + 1]`.
    pub fn cost(&self) -> f64 {
        (0..self.m())
            .map(|k| self.n[k] as f64 * (self.tail_mass[k] + 1.0 / self.eps[k] + 1.0))
            .sum()
    }

    /// `3 Σ_k n_k/ε_k`, an upper bound of the cost when
    /// [`cost_bound_applies`](Self::cost_bound_applies).
    pub fn cost_bound(&self) -> f64 {
        3.0 * (0..self.m()).map(|k| self.n[k] as f64 / self.eps[k]).sum::<f64>()
    }

    /// `ε₁ <= 1` and `ν(B(0,h_k)^c) <= 1/ε_k` for every level.
    pub fn cost_bound_applies(&self) -> bool {
        self.eps[0] <= 1.0 && (0..self.m()).all(|k| self.tail_mass[k] <= 1.0 / self.eps[k])
    }
}

fn check_constants(c1: f64, c2: f64) -> Result<()> {
    if c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSchedule("C1 and C2 must be positive".into()))
    }
}

fn dyadic_levels(g: &PowerLawBound, m: usize) -> (Vec<f64>, Vec<f64>) {
    (1..=m)
        .map(|k| {
            let x = 2f64.powi(k as i32);
            (1.0 / x, g.inverse(x))
        })
        .unzip()
}

/// `n_k = max(1, ⌊size(h_k / h_m)⌋)`.
fn level_sizes(h: &[f64], size: impl Fn(f64) -> f64) -> Vec<u64> {
    let hm = h[h.len() - 1];
    h.iter().map(|&hk| (size(hk / hm).floor() as u64).max(1)).collect()
}

/// Smallest `τ' >= τ` accepted by `ok`, located by doubling and bisection.
fn min_admissible(tau: f64, ok: impl Fn(f64) -> bool) -> f64 {
    let mut lo = tau.max(1.0);
    let mut hi = lo * 2.0;
    while !ok(hi) {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Solver for `g*(τ) = inf{x : x³ g⁻¹(x)² / ln x >= τ}` on `[e, 2^60]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GStarSolver {
    g: PowerLawBound,
    lower: f64,
    upper: f64,
    rel_tol: f64,
}

impl GStarSolver {
    pub fn new(g: PowerLawBound) -> Self {
        Self {
            g,
            lower: std::f64::consts::E,
            upper: 2f64.powi(60),
            rel_tol: 1e-9,
        }
    }

    pub fn bracket(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    /// `x³ g⁻¹(x)² / ln x`.
    pub fn objective(&self, x: f64) -> f64 {
        let gi = self.g.inverse(x);
        x.powi(3) * gi * gi / x.ln()
    }

    /// First crossing of `τ` on a geometric scan of the bracket, refined by
    /// bisection. The result `x` satisfies `objective(x) >= τ` and
    /// `objective(x (1 - rel_tol)) < τ` unless it is the lower end.
    pub fn solve(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidSchedule(format!("tau must be positive, got {tau}")));
        }
        if self.objective(self.lower) >= tau {
            return Ok(self.lower);
        }
        let ratio = 2f64.powf(1.0 / 16.0);
        let mut lo = self.lower;
        let mut hi = lo;
        loop {
            hi = (hi * ratio).min(self.upper);
            if self.objective(hi) >= tau {
                break;
            }
            if hi >= self.upper {
                return Err(Error::InvalidSchedule(format!(
                    "g*({tau}) lies beyond 2^60; case II does not fit this g"
                )));
            }
            lo = hi;
        }
        while hi - lo > self.rel_tol * hi * 0.5 {
            let mid = 0.5 * (lo + hi);
            if self.objective(mid) >= tau {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}
