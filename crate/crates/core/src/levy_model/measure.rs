//! Concrete Lévy measure families.
//!
//! Every family keeps its integrals in closed form: the truncated stable
//! density integrates to power laws, atoms are finite sums, and the tabulated
//! radial density is interpolated log-log linearly so that each table cell is
//! itself a power law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surface area of the unit sphere in `R^d` (s_1 = 2, s_2 = 2π, ...).
pub fn unit_sphere_area(dim: usize) -> f64 {
    use std::f64::consts::PI;
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        d => 2.0 * PI * unit_sphere_area(d - 2) / (d - 2) as f64,
    }
}

/// `ν(dx) = c |x|^{-α-d} dx` on `0 < |x| <= radius`.
///
/// In one dimension the negative half-line may carry its own intensity
/// (`intensity_negative`); the density is then `c_+ x^{-1-α}` for `x > 0` and
/// `c_- |x|^{-1-α}` for `x < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncatedStable {
    pub alpha: f64,
    pub intensity: f64,
    pub dim: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity_negative: Option<f64>,
}

fn default_radius() -> f64 {
    1.0
}

impl TruncatedStable {
    pub fn new(alpha: f64, intensity: f64, dim: usize) -> Self {
        Self {
            alpha,
            intensity,
            dim,
            radius: 1.0,
            intensity_negative: None,
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn one_sided(alpha: f64, intensity_positive: f64, intensity_negative: f64) -> Self {
        Self {
            alpha,
            intensity: intensity_positive,
            dim: 1,
            radius: 1.0,
            intensity_negative: Some(intensity_negative),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::InvalidModel(format!(
                "truncated stable alpha must lie in (0,2), got {}",
                self.alpha
            )));
        }
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::InvalidModel("intensity must be finite and >= 0".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidModel("radius must be positive".into()));
        }
        if self.dim == 0 {
            return Err(Error::InvalidModel("dim must be positive".into()));
        }
        if let Some(neg) = self.intensity_negative {
            if self.dim != 1 {
                return Err(Error::InvalidModel(
                    "intensity_negative is only defined for dim = 1".into(),
                ));
            }
            if !(neg >= 0.0 && neg.is_finite()) {
                return Err(Error::InvalidModel("intensity_negative must be >= 0".into()));
            }
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.intensity_negative.is_none_or(|n| n == self.intensity)
    }

    /// Coefficient `κ` of the radial law `ν(|x| ∈ dr) = κ r^{-1-α} dr`.
    pub fn radial_coefficient(&self) -> f64 {
        match self.intensity_negative {
            Some(neg) => self.intensity + neg,
            None => self.intensity * unit_sphere_area(self.dim),
        }
    }

    /// Probability that a tail jump is positive (dimension one only).
    pub(crate) fn positive_fraction(&self) -> f64 {
        match self.intensity_negative {
            Some(neg) if self.intensity + neg > 0.0 => self.intensity / (self.intensity + neg),
            _ => 0.5,
        }
    }

    /// `∫_{lo <= r < hi} r^k ν(|x| ∈ dr)` for `k > α` or `lo > 0`.
    fn radial_moment(&self, k: f64, lo: f64, hi: f64) -> f64 {
        let hi = hi.min(self.radius);
        if hi <= lo {
            return 0.0;
        }
        let e = k - self.alpha;
        let kappa = self.radial_coefficient();
        if e.abs() < 1e-14 {
            kappa * (hi / lo).ln()
        } else {
            kappa * (hi.powf(e) - lo.powf(e)) / e
        }
    }

    pub fn tail_mass(&self, h: f64) -> f64 {
        self.radial_moment(0.0, h, f64::INFINITY)
    }

    pub fn f_small(&self, h: f64) -> f64 {
        self.radial_moment(2.0, 0.0, h)
    }

    pub fn tail_second_moment(&self, h: f64) -> f64 {
        self.radial_moment(2.0, h, f64::INFINITY)
    }

    /// First component of `∫_{|x|>=h} x ν(dx)`; zero unless one-sided.
    pub fn f_zero_scalar(&self, h: f64) -> f64 {
        let Some(neg) = self.intensity_negative else {
            return 0.0;
        };
        let hi = self.radius;
        if h >= hi {
            return 0.0;
        }
        let e = 1.0 - self.alpha;
        let integral = if e.abs() < 1e-14 {
            (hi / h).ln()
        } else {
            (hi.powf(e) - h.powf(e)) / e
        };
        (self.intensity - neg) * integral
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub position: Vec<f64>,
    pub mass: f64,
}

/// Finite Lévy measure made of point masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteActivity {
    pub atoms: Vec<Atom>,
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl FiniteActivity {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Self { atoms }
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        for atom in &self.atoms {
            if atom.position.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: atom.position.len(),
                });
            }
            if !(atom.mass >= 0.0 && atom.mass.is_finite()) {
                return Err(Error::InvalidModel("atom masses must be finite and >= 0".into()));
            }
            if norm(&atom.position) == 0.0 || atom.position.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel("atoms must sit at finite nonzero points".into()));
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub(crate) fn tail_atoms(&self, h: f64) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(move |a| norm(&a.position) >= h)
    }

    pub(crate) fn ball_atoms(&self, h: f64) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(move |a| norm(&a.position) < h)
    }
}

/// Raw form of [`RadialTable`] as it appears in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialTableSpec {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub density: Vec<f64>,
}

/// Isotropic measure given by the density `q(r)` of `|x|` sampled on an
/// increasing grid of radii.
///
/// Between grid points `log q` is linear in `log r`; below the first radius
/// the first cell's power law is continued down to zero, and the measure
/// vanishes beyond the last radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RadialTableSpec", into = "RadialTableSpec")]
pub struct RadialTable {
    dim: usize,
    radii: Vec<f64>,
    density: Vec<f64>,
    exponents: Vec<f64>,
}

impl From<RadialTable> for RadialTableSpec {
    fn from(t: RadialTable) -> Self {
        Self {
            dim: t.dim,
            radii: t.radii,
            density: t.density,
        }
    }
}

impl TryFrom<RadialTableSpec> for RadialTable {
    type Error = Error;

    fn try_from(spec: RadialTableSpec) -> Result<Self> {
        RadialTable::new(spec.dim, spec.radii, spec.density)
    }
}

/// One power-law piece `q(r) = q_ref (r / r_ref)^p` on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PowerPiece {
    pub lo: f64,
    pub hi: f64,
    pub r_ref: f64,
    pub q_ref: f64,
    pub p: f64,
}

impl PowerPiece {
    /// `∫_a^b r^k q(r) dr` for `[a,b] ⊂ [lo,hi]`; `a = 0` allowed when convergent.
    pub fn moment(&self, k: f64, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let e = k + self.p + 1.0;
        let scale = self.q_ref * self.r_ref.powf(k + 1.0);
        let (sa, sb) = (a / self.r_ref, b / self.r_ref);
        if e.abs() < 1e-12 {
            scale * (sb / sa).ln()
        } else {
            scale * (sb.powf(e) - sa.powf(e)) / e
        }
    }

    /// Inverse CDF of the law `∝ q(r) dr` on `[a, b]`.
    pub fn inverse_cdf(&self, a: f64, b: f64, u: f64) -> f64 {
        let e = self.p + 1.0;
        let ratio = b / a;
        let r = if e.abs() < 1e-12 {
            a * ratio.powf(u)
        } else {
            a * (1.0 + u * (ratio.powf(e) - 1.0)).powf(1.0 / e)
        };
        r.clamp(a, b)
    }
}

impl RadialTable {
    pub fn new(dim: usize, radii: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidModel("dim must be positive".into()));
        }
        if radii.len() < 2 || radii.len() != density.len() {
            return Err(Error::InvalidModel(
                "radial table needs >= 2 radii and one density value per radius".into(),
            ));
        }
        if radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidModel(
                "radii must be positive and strictly increasing".into(),
            ));
        }
        if density.iter().any(|q| !(*q > 0.0 && q.is_finite())) {
            return Err(Error::InvalidModel("radial densities must be positive".into()));
        }
        let exponents: Vec<f64> = radii
            .windows(2)
            .zip(density.windows(2))
            .map(|(r, q)| (q[1] / q[0]).ln() / (r[1] / r[0]).ln())
            .collect();
        if exponents[0] + 3.0 <= 0.0 {
            return Err(Error::InvalidModel(
                "density near zero must decay slower than r^-3 (finite second moment)".into(),
            ));
        }
        Ok(Self {
            dim,
            radii,
            density,
            exponents,
        })
    }

    /// Tabulates `c s_d r^{-1-α}` on `n` log-spaced radii in `[r_min, radius]`.
    pub fn from_stable(alpha: f64, intensity: f64, dim: usize, r_min: f64, radius: f64, n: usize) -> Result<Self> {
        let kappa = intensity * unit_sphere_area(dim);
        let n = n.max(2);
        let (la, lb) = (r_min.ln(), radius.ln());
        let radii: Vec<f64> = (0..n)
            .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
            .collect();
        let density = radii.iter().map(|r| kappa * r.powf(-1.0 - alpha)).collect();
        Self::new(dim, radii, density)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn support_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    /// Interpolated radial density `q(r)`.
    pub fn density_at(&self, r: f64) -> f64 {
        if r <= 0.0 || r > self.support_radius() {
            return 0.0;
        }
        self.pieces()
            .find(|p| r <= p.hi)
            .map(|p| p.q_ref * (r / p.r_ref).powf(p.p))
            .unwrap_or(0.0)
    }

    /// Power-law index of the extrapolated head: `q(r) ~ r^{-1-β}` as `r → 0`.
    pub fn head_index(&self) -> f64 {
        -(self.exponents[0] + 1.0)
    }

    pub(crate) fn pieces(&self) -> impl Iterator<Item = PowerPiece> + '_ {
        let head = PowerPiece {
            lo: 0.0,
            hi: self.radii[0],
            r_ref: self.radii[0],
            q_ref: self.density[0],
            p: self.exponents[0],
        };
        let cells = (0..self.exponents.len()).map(move |i| PowerPiece {
            lo: self.radii[i],
            hi: self.radii[i + 1],
            r_ref: self.radii[i],
            q_ref: self.density[i],
            p: self.exponents[i],
        });
        std::iter::once(head).chain(cells)
    }

    /// `∫_{lo <= r < hi} r^k q(r) dr`.
    pub(crate) fn radial_moment(&self, k: f64, lo: f64, hi: f64) -> f64 {
        self.pieces()
            .map(|p| {
                let a = lo.max(p.lo);
                let b = hi.min(p.hi);
                if b > a {
                    p.moment(k, a, b)
                } else {
                    0.0
                }
            })
            .sum()
    }

    pub fn tail_mass(&self, h: f64) -> f64 {
        self.radial_moment(0.0, h, f64::INFINITY)
    }

    pub fn f_small(&self, h: f64) -> f64 {
        self.radial_moment(2.0, 0.0, h)
    }

    pub fn tail_second_moment(&self, h: f64) -> f64 {
        self.radial_moment(2.0, h, f64::INFINITY)
    }
}
