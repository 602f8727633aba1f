use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::measure::{norm, PowerPiece, RadialTable, TruncatedStable};
use super::{JumpMeasure, LevyModel};
use crate::error::{Error, Result};

/// Sampler for the normalized tail law `ν|_{B(0,h)^c} / ν(B(0,h)^c)`,
/// prepared once per threshold `h`.
#[derive(Debug, Clone)]
pub struct TailSampler {
    kind: Kind,
    dim: usize,
    mass: f64,
}

#[derive(Debug, Clone)]
enum Kind {
    Stable {
        h_pow: f64,
        r_pow: f64,
        alpha: f64,
        positive_fraction: f64,
    },
    Atoms {
        cumulative: Vec<f64>,
        positions: Vec<Vec<f64>>,
    },
    Radial {
        pieces: Vec<(PowerPiece, f64, f64)>,
        cumulative: Vec<f64>,
    },
}

fn uniform_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    if dim == 1 {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return DVector::from_element(1, s);
    }
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-300 {
            return v / n;
        }
    }
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    let target = u * cumulative.last().copied().unwrap_or(0.0);
    cumulative
        .partition_point(|c| *c <= target)
        .min(cumulative.len() - 1)
}

impl TailSampler {
    pub(crate) fn new(model: &LevyModel, h: f64) -> Result<Self> {
        let mass = model.tail_mass(h);
        if !(mass > 0.0) {
            return Err(Error::EmptyTail { h });
        }
        let dim = model.dim_x();
        let kind = match model.measure() {
            JumpMeasure::TruncatedStable(s) => stable_kind(s, h),
            JumpMeasure::FiniteActivity(fa) => {
                let mut cumulative = Vec::new();
                let mut positions = Vec::new();
                let mut acc = 0.0;
                for atom in fa.tail_atoms(h) {
                    acc += atom.mass;
                    cumulative.push(acc);
                    positions.push(atom.position.clone());
                }
                Kind::Atoms {
                    cumulative,
                    positions,
                }
            }
            JumpMeasure::TabulatedRadial(t) => radial_kind(t, h),
        };
        Ok(Self { kind, dim, mass })
    }

    /// `ν(B(0,h)^c)` for the threshold this sampler was built for.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        match &self.kind {
            Kind::Stable {
                h_pow,
                r_pow,
                alpha,
                positive_fraction,
            } => {
                let u: f64 = rng.random();
                let r = stable_radius(*h_pow, *r_pow, *alpha, u);
                if self.dim == 1 {
                    let positive = rng.random::<f64>() < *positive_fraction;
                    DVector::from_element(1, if positive { r } else { -r })
                } else {
                    uniform_direction(self.dim, rng) * r
                }
            }
            Kind::Atoms {
                cumulative,
                positions,
            } => {
                let i = pick(cumulative, rng.random());
                DVector::from_column_slice(&positions[i])
            }
            Kind::Radial { pieces, cumulative } => {
                let i = pick(cumulative, rng.random());
                let (piece, a, b) = pieces[i];
                let r = piece.inverse_cdf(a, b, rng.random());
                uniform_direction(self.dim, rng) * r
            }
        }
    }
}

/// Radius from the inverse tail CDF, `r = (h^{-α} - u (h^{-α} - R^{-α}))^{-1/α}`.
pub(crate) fn stable_radius(h_pow: f64, r_pow: f64, alpha: f64, u: f64) -> f64 {
    (h_pow - u * (h_pow - r_pow)).powf(-1.0 / alpha)
}

fn stable_kind(s: &TruncatedStable, h: f64) -> Kind {
    Kind::Stable {
        h_pow: h.powf(-s.alpha),
        r_pow: s.radius.powf(-s.alpha),
        alpha: s.alpha,
        positive_fraction: s.positive_fraction(),
    }
}

fn radial_kind(t: &RadialTable, h: f64) -> Kind {
    let mut pieces = Vec::new();
    let mut cumulative = Vec::new();
    let mut acc = 0.0;
    for p in t.pieces() {
        let a = h.max(p.lo);
        let b = p.hi;
        if b > a {
            let m = p.moment(0.0, a, b);
            if m > 0.0 {
                acc += m;
                pieces.push((p, a, b));
                cumulative.push(acc);
            }
        }
    }
    Kind::Radial { pieces, cumulative }
}

/// Convenience check used in tests: the magnitude of a sampled vector.
pub fn magnitude(x: &DVector<f64>) -> f64 {
    norm(x.as_slice())
}
