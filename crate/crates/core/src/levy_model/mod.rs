//! Parametric Lévy models `(ν, ΣΣ*, b)` and every analytic quantity the
//! multilevel algorithm needs from them.
//!
//! For a threshold `h > 0` the model exposes
//!
//! * `tail_mass(h)      = ν(B(0,h)^c)`
//! * `f_small(h)        = F(h)  = ∫_{B(0,h)} |x|² ν(dx)`
//! * `f_zero(h)         = F₀(h) = ∫_{B(0,h)^c} x ν(dx)`
//! * `small_jump_cov(h) = (∫_{B(0,h)} x_i x_j ν(dx))_{ij}`
//!
//! plus a dominating function `g` for `h ↦ ∫ (|x|²/h² ∧ 1) ν(dx)`, which
//! drives the level schedules. `B(0,h)` is the open ball, so jumps with
//! `|x| = h` count as large.

mod checks;
mod linalg;
pub mod measure;
mod sampler;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checks::{BgIndex, DoublingReport, UEReport};
pub use linalg::cov_factor;
pub use measure::{Atom, FiniteActivity, RadialTable, TruncatedStable};
pub use sampler::{magnitude, TailSampler};

/// Concrete jump measure `ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpMeasure {
    TruncatedStable(TruncatedStable),
    FiniteActivity(FiniteActivity),
    TabulatedRadial(RadialTable),
}

/// Power-law dominating function `g(h) = coef · h^{-exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLawBound {
    pub coef: f64,
    pub exponent: f64,
}

impl PowerLawBound {
    pub fn eval(&self, h: f64) -> f64 {
        self.coef * h.powf(-self.exponent)
    }

    pub fn inverse(&self, x: f64) -> f64 {
        (self.coef / x).powf(1.0 / self.exponent)
    }

    /// Largest `γ` with `g(γh/2) >= 2 g(h)`, i.e. `2^{1 - 1/exponent}`.
    pub fn doubling_threshold(&self) -> f64 {
        2f64.powf(1.0 - 1.0 / self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevyModel {
    sigma: DMatrix<f64>,
    drift: DVector<f64>,
    measure: JumpMeasure,
    lipschitz_budget: f64,
    dominating: Option<PowerLawBound>,
}

/// JSON form of a model:
/// `{"dim_x", "sigma", "drift", "measure": {"kind": ..}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dim_x: usize,
    pub sigma: Vec<Vec<f64>>,
    pub drift: Vec<f64>,
    pub measure: JumpMeasure,
    /// Constant `K`; defaults to the smallest admissible value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_budget: Option<f64>,
    /// Overrides the family's canonical `g`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<PowerLawBound>,
}

impl TryFrom<ModelSpec> for LevyModel {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        let d = spec.dim_x;
        if d == 0 {
            return Err(Error::InvalidModel("dim_x must be positive".into()));
        }
        if spec.sigma.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: spec.sigma.len(),
            });
        }
        for row in &spec.sigma {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
        }
        let sigma = DMatrix::from_fn(d, d, |i, j| spec.sigma[i][j]);
        if spec.drift.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: spec.drift.len(),
            });
        }
        let drift = DVector::from_vec(spec.drift);
        let model = LevyModel::new(sigma, drift, spec.measure, spec.lipschitz_budget)?;
        Ok(match spec.g {
            Some(g) => model.with_dominating_bound(g)?,
            None => model,
        })
    }
}

impl From<&LevyModel> for ModelSpec {
    fn from(m: &LevyModel) -> Self {
        let d = m.dim_x();
        ModelSpec {
            dim_x: d,
            sigma: (0..d).map(|i| (0..d).map(|j| m.sigma[(i, j)]).collect()).collect(),
            drift: m.drift.iter().copied().collect(),
            measure: m.measure.clone(),
            lipschitz_budget: Some(m.lipschitz_budget),
            g: m.dominating,
        }
    }
}

impl LevyModel {
    /// Validates dimensions and `|Σ| <= K`, `|b| <= K`, `∫|x|²ν <= K²`.
    /// Without an explicit `K` the smallest admissible one is used.
    pub fn new(
        sigma: DMatrix<f64>,
        drift: DVector<f64>,
        measure: JumpMeasure,
        lipschitz_budget: Option<f64>,
    ) -> Result<Self> {
        let d = drift.len();
        if d == 0 {
            return Err(Error::InvalidModel("dim_x must be positive".into()));
        }
        if sigma.nrows() != d || sigma.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: sigma.nrows().max(sigma.ncols()),
            });
        }
        if sigma.iter().chain(drift.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("sigma and drift must be finite".into()));
        }
        match &measure {
            JumpMeasure::TruncatedStable(s) => {
                s.validate()?;
                if s.dim != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: s.dim,
                    });
                }
            }
            JumpMeasure::FiniteActivity(fa) => fa.validate(d)?,
            JumpMeasure::TabulatedRadial(t) => {
                if t.dim() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: t.dim(),
                    });
                }
            }
        }
        let mut model = Self {
            sigma,
            drift,
            measure,
            lipschitz_budget: 0.0,
            dominating: None,
        };
        let second = model.second_moment();
        if !second.is_finite() {
            return Err(Error::InvalidModel("jump measure must have a finite second moment".into()));
        }
        let needed = model
            .sigma
            .norm()
            .max(model.drift.norm())
            .max(second.sqrt());
        let k = match lipschitz_budget {
            Some(k) => {
                if !(k > 0.0) || k < needed {
                    return Err(Error::InvalidModel(format!(
                        "lipschitz budget K = {k} violated: need K >= max(|sigma|, |b|, sqrt(∫|x|²ν)) = {needed}"
                    )));
                }
                k
            }
            None => needed.max(f64::MIN_POSITIVE),
        };
        model.lipschitz_budget = k;
        Ok(model)
    }

    /// Pure-jump martingale model (`Σ = 0`, `b = 0`).
    pub fn pure_jump(measure: JumpMeasure, dim_x: usize) -> Result<Self> {
        Self::new(
            DMatrix::zeros(dim_x, dim_x),
            DVector::zeros(dim_x),
            measure,
            None,
        )
    }

    /// Replaces the canonical dominating function.
    pub fn with_dominating_bound(mut self, g: PowerLawBound) -> Result<Self> {
        if !(g.coef > 0.0 && g.exponent > 0.0 && g.coef.is_finite() && g.exponent.is_finite()) {
            return Err(Error::InvalidModel("g needs positive coef and exponent".into()));
        }
        self.dominating = Some(g);
        Ok(self)
    }

    pub fn dim_x(&self) -> usize {
        self.drift.len()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn drift(&self) -> &DVector<f64> {
        &self.drift
    }

    pub fn measure(&self) -> &JumpMeasure {
        &self.measure
    }

    pub fn lipschitz_budget(&self) -> f64 {
        self.lipschitz_budget
    }

    /// Radius beyond which `ν` has no mass (infinite if unbounded).
    pub fn support_radius(&self) -> f64 {
        match &self.measure {
            JumpMeasure::TruncatedStable(s) => s.radius,
            JumpMeasure::FiniteActivity(fa) => fa
                .atoms
                .iter()
                .filter(|a| a.mass > 0.0)
                .map(|a| measure::norm(&a.position))
                .fold(0.0, f64::max),
            JumpMeasure::TabulatedRadial(t) => t.support_radius(),
        }
    }

    pub fn tail_mass(&self, h: f64) -> f64 {
        match &self.measure {
            JumpMeasure::TruncatedStable(s) => s.tail_mass(h),
            JumpMeasure::FiniteActivity(fa) => fa.tail_atoms(h).map(|a| a.mass).sum(),
            JumpMeasure::TabulatedRadial(t) => t.tail_mass(h),
        }
    }

    pub fn f_small(&self, h: f64) -> f64 {
        match &self.measure {
            JumpMeasure::TruncatedStable(s) => s.f_small(h),
            JumpMeasure::FiniteActivity(fa) => fa
                .ball_atoms(h)
                .map(|a| a.mass * a.position.iter().map(|v| v * v).sum::<f64>())
                .sum(),
            JumpMeasure::TabulatedRadial(t) => t.f_small(h),
        }
    }

    /// `∫_{B(0,h)^c} |x|² ν(dx)`.
    pub fn tail_second_moment(&self, h: f64) -> f64 {
        match &self.measure {
            JumpMeasure::TruncatedStable(s) => s.tail_second_moment(h),
            JumpMeasure::FiniteActivity(fa) => fa
                .tail_atoms(h)
                .map(|a| a.mass * a.position.iter().map(|v| v * v).sum::<f64>())
                .sum(),
            JumpMeasure::TabulatedRadial(t) => t.tail_second_moment(h),
        }
    }

    /// `∫ |x|² ν(dx)`.
    pub fn second_moment(&self) -> f64 {
        self.f_small(f64::INFINITY)
    }

    pub fn f_zero(&self, h: f64) -> DVector<f64> {
        let d = self.dim_x();
        match &self.measure {
            JumpMeasure::TruncatedStable(s) => {
                let mut v = DVector::zeros(d);
                if d == 1 {
                    v[0] = s.f_zero_scalar(h);
                }
                v
            }
            JumpMeasure::FiniteActivity(fa) => {
                let mut v = DVector::zeros(d);
                for a in fa.tail_atoms(h) {
                    for (vi, xi) in v.iter_mut().zip(&a.position) {
                        *vi += a.mass * xi;
                    }
                }
                v
            }
            JumpMeasure::TabulatedRadial(_) => DVector::zeros(d),
        }
    }

    pub fn small_jump_cov(&self, h: f64) -> DMatrix<f64> {
        let d = self.dim_x();
        match &self.measure {
            JumpMeasure::FiniteActivity(fa) => {
                let mut c = DMatrix::zeros(d, d);
                for a in fa.ball_atoms(h) {
                    for i in 0..d {
                        for j in 0..d {
                            c[(i, j)] += a.mass * a.position[i] * a.position[j];
                        }
                    }
                }
                c
            }
            // isotropic (or one-dimensional) families split the trace evenly
            _ => DMatrix::identity(d, d) * (self.f_small(h) / d as f64),
        }
    }

    /// `ḡ(h) = ∫ (|x|²/h² ∧ 1) ν(dx) = F(h)/h² + ν(B(0,h)^c)`.
    pub fn g_integral(&self, h: f64) -> f64 {
        self.f_small(h) / (h * h) + self.tail_mass(h)
    }

    /// The dominating function `g` used for scheduling.
    ///
    /// * truncated stable: `g(h) = κ (1/(2-α) + 1/α) h^{-α}` with `κ` the
    ///   radial coefficient (`c s_d`);
    /// * tabulated radial: power law with the head index, constant taken as
    ///   the supremum of `ḡ(h) h^β` over the table, inflated by 1%;
    /// * finite activity: none unless supplied.
    pub fn dominating_bound(&self) -> Result<PowerLawBound> {
        if let Some(g) = self.dominating {
            return Ok(g);
        }
        match &self.measure {
            JumpMeasure::TruncatedStable(s) => {
                let a = s.alpha;
                Ok(PowerLawBound {
                    coef: s.radial_coefficient() * (1.0 / (2.0 - a) + 1.0 / a),
                    exponent: a,
                })
            }
            JumpMeasure::FiniteActivity(_) => Err(Error::UnsupportedMeasure(
                "finite_activity has no registered g; supply one with `g`".into(),
            )),
            JumpMeasure::TabulatedRadial(t) => Ok(checks::tabulated_bound(self, t)),
        }
    }

    pub fn g_bound(&self, h: f64) -> Result<f64> {
        Ok(self.dominating_bound()?.eval(h))
    }

    pub fn g_inverse(&self, x: f64) -> Result<f64> {
        Ok(self.dominating_bound()?.inverse(x))
    }

    /// Prepares a sampler for the normalized tail law at threshold `h`.
    pub fn tail_sampler(&self, h: f64) -> Result<TailSampler> {
        TailSampler::new(self, h)
    }

    pub fn sample_tail_jump<R: Rng + ?Sized>(&self, h: f64, rng: &mut R) -> Result<DVector<f64>> {
        Ok(self.tail_sampler(h)?.sample(rng))
    }

    pub fn validate_doubling(&self, gamma: f64, h_grid: &[f64]) -> Result<DoublingReport> {
        checks::validate_doubling(self, gamma, h_grid)
    }

    pub fn bg_index(&self) -> BgIndex {
        checks::bg_index(self)
    }

    pub fn check_ue(&self, h_grid: &[f64], direction_samples: usize, theta_bound: f64) -> Result<UEReport> {
        checks::check_ue(self, h_grid, direction_samples, theta_bound)
    }
}
