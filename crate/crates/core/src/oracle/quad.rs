use nalgebra::DMatrix;
use quadrature::double_exponential;

use crate::error::{Error, Result};
use crate::levy_model::{JumpMeasure, LevyModel, RadialTable, TruncatedStable};

/// `∫_a^b f` by tanh-sinh quadrature, refined until the error estimate is
/// below `rel_tol` times the magnitude of a first pass.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let rough = double_exponential::integrate(&f, a, b, 1e-6).integral.abs();
    if rough == 0.0 {
        return 0.0;
    }
    double_exponential::integrate(&f, a, b, rel_tol * rough * 1e-2).integral
}

/// `∫_0^h f` for `f` with an integrable power singularity `r^{-s}` at 0,
/// `s < 1`, via `r = h u^q` with `q = 2/(1 - s)`.
pub fn integrate_from_zero<F: Fn(f64) -> f64>(f: F, h: f64, singularity: f64, rel_tol: f64) -> f64 {
    let q = 2.0 / (1.0 - singularity.max(0.0));
    integrate(|u| f(h * u.powf(q)) * h * q * u.powf(q - 1.0), 0.0, 1.0, rel_tol)
}

/// `∫_a^b f` over a range spanning many decades, via `r = e^s`.
pub fn integrate_log<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    integrate(|s| {
        let r = s.exp();
        f(r) * r
    }, a.ln(), b.ln(), rel_tol)
}

/// Analytic quantities of a jump measure recomputed from its density.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureQuadrature {
    pub tail_mass: f64,
    pub f_small: f64,
    pub f_zero: Vec<f64>,
    pub small_jump_cov: DMatrix<f64>,
}

/// `∫ u_i u_j dσ(u)` over the unit sphere, by nested quadrature in polar or
/// spherical coordinates.
fn angular_moments(d: usize) -> Result<DMatrix<f64>> {
    use std::f64::consts::PI;
    let tol = 1e-12;
    let mut out = DMatrix::zeros(d, d);
    match d {
        1 => out[(0, 0)] = 2.0,
        2 => {
            let u = |t: f64| [t.cos(), t.sin()];
            for i in 0..2 {
                for j in 0..2 {
                    out[(i, j)] = integrate(|t| u(t)[i] * u(t)[j], 0.0, 2.0 * PI, tol);
                }
            }
        }
        3 => {
            let u = |th: f64, ph: f64| [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            for i in 0..3 {
                for j in 0..3 {
                    out[(i, j)] = integrate(
                        |th| th.sin() * integrate(|ph| u(th, ph)[i] * u(th, ph)[j], 0.0, 2.0 * PI, tol),
                        0.0,
                        PI,
                        tol,
                    );
                }
            }
        }
        _ => {
            return Err(Error::UnsupportedMeasure(format!(
                "angular quadrature implemented for d <= 3, got {d}"
            )))
        }
    }
    Ok(out)
}

fn stable_quadrature(s: &TruncatedStable, h: f64, rel_tol: f64) -> Result<MeasureQuadrature> {
    let (a, r) = (s.alpha, s.radius);
    let d = s.dim;
    let ang = angular_moments(d)?;
    // surface measure is the trace of the angular second moments
    let area = ang.trace();
    let (c_pos, c_neg) = match (d, s.intensity_negative) {
        (1, Some(cn)) => (s.intensity, cn),
        _ => (s.intensity, s.intensity),
    };
    // radial integrals of r^{d-1} · r^{-α-d} · r^k
    let tail_radial = integrate_log(|x| x.powf(-1.0 - a), h, r, rel_tol);
    let small_radial = integrate_from_zero(|x| x.powf(1.0 - a), h.min(r), a - 1.0, rel_tol);
    let (tail_mass, f_small, cov, f_zero) = if d == 1 {
        let first = integrate_log(|x| x.powf(-a), h, r, rel_tol);
        (
            (c_pos + c_neg) * tail_radial,
            (c_pos + c_neg) * small_radial,
            DMatrix::from_element(1, 1, (c_pos + c_neg) * small_radial),
            vec![(c_pos - c_neg) * first],
        )
    } else {
        let c = s.intensity;
        (c * area * tail_radial, c * area * small_radial, ang * (c * small_radial), vec![0.0; d])
    };
    Ok(MeasureQuadrature {
        tail_mass,
        f_small,
        f_zero,
        small_jump_cov: cov,
    })
}

fn radial_quadrature(t: &RadialTable, h: f64, rel_tol: f64) -> Result<MeasureQuadrature> {
    let d = t.dim();
    let ang = angular_moments(d)?;
    let area = ang.trace();
    let radii = t.radii();
    let top = t.support_radius();
    // integrate cell by cell so every piece is smooth
    let mut cuts: Vec<f64> = radii.iter().copied().filter(|&x| x > h && x < top).collect();
    cuts.insert(0, h.min(top));
    cuts.push(top);
    let tail: f64 = cuts
        .windows(2)
        .map(|w| integrate_log(|x| t.density_at(x), w[0], w[1], rel_tol))
        .sum();
    let r0 = radii[0];
    let beta = t.head_index();
    let head_end = h.min(r0);
    let mut small = integrate_from_zero(|x| x * x * t.density_at(x), head_end, beta - 1.0, rel_tol);
    let mut lo = r0;
    for &x in radii.iter().skip(1) {
        if lo >= h {
            break;
        }
        small += integrate(|y| y * y * t.density_at(y), lo, x.min(h), rel_tol);
        lo = x;
    }
    Ok(MeasureQuadrature {
        tail_mass: tail,
        f_small: small,
        f_zero: vec![0.0; d],
        small_jump_cov: ang * (small / area),
    })
}

/// Recomputes tail mass, `F`, `F₀` and the small-jump covariance at `h`
/// directly from the density of `model`'s jump measure.
pub fn measure_quadrature(model: &LevyModel, h: f64, rel_tol: f64) -> Result<MeasureQuadrature> {
    match model.measure() {
        JumpMeasure::TruncatedStable(s) => stable_quadrature(s, h, rel_tol),
        JumpMeasure::TabulatedRadial(t) => radial_quadrature(t, h, rel_tol),
        JumpMeasure::FiniteActivity(fa) => {
            let d = model.dim_x();
            let mut q = MeasureQuadrature {
                tail_mass: 0.0,
                f_small: 0.0,
                f_zero: vec![0.0; d],
                small_jump_cov: DMatrix::zeros(d, d),
            };
            for a in &fa.atoms {
                let r = a.position.iter().map(|x| x * x).sum::<f64>().sqrt();
                if r >= h {
                    q.tail_mass += a.mass;
                    for (z, x) in q.f_zero.iter_mut().zip(&a.position) {
                        *z += a.mass * x;
                    }
                } else {
                    q.f_small += a.mass * r * r;
                    for i in 0..d {
                        for j in 0..d {
                            q.small_jump_cov[(i, j)] += a.mass * a.position[i] * a.position[j];
                        }
                    }
                }
            }
            Ok(q)
        }
    }
}
