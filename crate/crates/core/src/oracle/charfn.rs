use std::f64::consts::PI;

use super::quad::{integrate, integrate_from_zero};
use crate::error::{Error, Result};
use crate::levy_model::{JumpMeasure, LevyModel};

/// `∫_0^Y (1 - cos y) y^{-1-α} dy`, period by period.
fn oscillatory_part(alpha: f64, upper: f64) -> f64 {
    let tol = 1e-12;
    let f = |y: f64| {
        // 1 - cos y without cancellation
        let s = (0.5 * y).sin();
        2.0 * s * s * y.powf(-1.0 - alpha)
    };
    let first = upper.min(PI);
    let mut total = integrate_from_zero(f, first, alpha - 1.0, tol);
    let mut lo = first;
    while lo < upper {
        let hi = (lo + PI).min(upper);
        total += integrate(f, lo, hi, tol);
        lo = hi;
    }
    total
}

/// `-ln φ(u)` for a symmetric one-dimensional truncated stable model without
/// drift: `σ² u²/2 + 2c ∫_0^R (1 - cos ux) x^{-1-α} dx`.
fn exponent(sigma: f64, alpha: f64, c: f64, radius: f64, u: f64) -> f64 {
    0.5 * sigma * sigma * u * u + 2.0 * c * u.powf(alpha) * oscillatory_part(alpha, u * radius)
}

/// `E|X_1|` by Fourier inversion, `E|X| = (2/π) ∫_0^∞ (1 - Re φ(u)) / u² du`.
///
/// Supports one-dimensional models with a symmetric truncated stable measure
/// and zero drift.
pub fn abs_moment_cf(model: &LevyModel) -> Result<f64> {
    let unsupported = |why: &str| Err(Error::UnsupportedMeasure(format!("characteristic-function oracle: {why}")));
    if model.dim_x() != 1 {
        return unsupported("dimension must be 1");
    }
    if model.drift()[0] != 0.0 {
        return unsupported("drift must be zero");
    }
    let s = match model.measure() {
        JumpMeasure::TruncatedStable(s) if s.is_symmetric() => s,
        _ => return unsupported("needs a symmetric truncated stable measure"),
    };
    let sigma = model.sigma()[(0, 0)];
    let psi = |u: f64| exponent(sigma, s.alpha, s.intensity, s.radius, u);
    // beyond `cut` the integrand is 1/u² up to e^{-60}
    let mut cut = 1.0;
    while psi(cut) < 60.0 || psi(2.0 * cut) < 60.0 {
        cut *= 2.0;
        if cut > 1e12 {
            return unsupported("characteristic function decays too slowly");
        }
    }
    let integrand = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        -(-psi(u)).exp_m1() / (u * u)
    };
    // split at 1 to resolve the small-u limit separately
    let body = integrate(integrand, 0.0, cut.min(1.0), 1e-11) + integrate(integrand, 1.0, cut, 1e-11);
    Ok(2.0 / PI * (body + 1.0 / cut))
}
