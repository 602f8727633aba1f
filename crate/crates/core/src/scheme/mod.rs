//! Jump-adapted Euler scheme.
//!
//! On each interval `(s, t]` of its grid a level moves by
//! `Υ_t = Υ_s + a(Υ_s) ΔX` with
//! `ΔX = Σ ΔW + Σ⁽ᵐ⁾ ΔB + (jumps ≥ h in (s,t]) − F₀(h)(t−s) + b(t−s)`,
//! and stays constant in between.

mod coefficient;

use nalgebra::DMatrix;
use serde::Serialize;

pub use coefficient::{CoefficientField, CoefficientSpec};

use crate::driving_path::{realize_level, realize_pair, DrivingRealization, Role};
use crate::error::{Error, Result};
use crate::levy_model::LevyModel;
use crate::stream::RngStream;

/// Piecewise-constant càdlàg path: `values[i]` holds on
/// `[breakpoints[i], breakpoints[i+1])`, the last one on `[.., 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSkeleton {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    dim_y: usize,
}

impl PathSkeleton {
    pub fn new(breakpoints: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: breakpoints.len(),
                found: values.len(),
            });
        }
        let ok = breakpoints.first() == Some(&0.0)
            && breakpoints.last() == Some(&1.0)
            && breakpoints.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::Config(
                "breakpoints must increase strictly from 0 to 1".into(),
            ));
        }
        let dim_y = values[0].len();
        if let Some(v) = values.iter().find(|v| v.len() != dim_y) {
            return Err(Error::DimensionMismatch {
                expected: dim_y,
                found: v.len(),
            });
        }
        Ok(Self {
            breakpoints,
            values: values.concat(),
            dim_y,
        })
    }

    /// Path constant at `y0`.
    pub fn constant(y0: &[f64]) -> Self {
        Self {
            breakpoints: vec![0.0, 1.0],
            values: [y0, y0].concat(),
            dim_y: y0.len(),
        }
    }

    pub fn dim_y(&self) -> usize {
        self.dim_y
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim_y..(i + 1) * self.dim_y]
    }

    pub fn values(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim_y)
    }

    pub fn terminal(&self) -> &[f64] {
        self.value(self.len() - 1)
    }

    /// Value at `t`: the one at the last breakpoint `<= t`.
    pub fn value_at(&self, t: f64) -> &[f64] {
        let i = self.breakpoints.partition_point(|&b| b <= t).max(1) - 1;
        self.value(i)
    }

    /// `{"t": [..], "y": [[..]]}`.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Dump<'a> {
            t: &'a [f64],
            y: Vec<&'a [f64]>,
        }
        serde_json::to_value(Dump {
            t: &self.breakpoints,
            y: self.values().collect(),
        })
        .expect("finite floats serialize")
    }
}

/// Parameters of one level: step `ε`, threshold `h` and the correction
/// factor `Σ⁽ᵐ⁾` shared by all levels of a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelParams {
    pub eps: f64,
    pub h: f64,
    pub correction_factor: DMatrix<f64>,
}

impl LevelParams {
    pub fn new(eps: f64, h: f64, correction_factor: DMatrix<f64>) -> Self {
        Self {
            eps,
            h,
            correction_factor,
        }
    }

    /// Level without Gaussian correction.
    pub fn uncorrected(eps: f64, h: f64, dim_x: usize) -> Self {
        Self::new(eps, h, DMatrix::zeros(dim_x, dim_x))
    }
}

fn check_dims(model: &LevyModel, coeff: &CoefficientField, y0: &[f64], params: &LevelParams) -> Result<()> {
    let d = model.dim_x();
    if coeff.dim_x() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: coeff.dim_x(),
        });
    }
    if y0.len() != coeff.dim_y() {
        return Err(Error::DimensionMismatch {
            expected: coeff.dim_y(),
            found: y0.len(),
        });
    }
    if params.correction_factor.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: params.correction_factor.nrows(),
        });
    }
    Ok(())
}

/// Runs the scheme for one member of a realization.
pub fn advance(
    model: &LevyModel,
    coeff: &CoefficientField,
    y0: &[f64],
    params: &LevelParams,
    realization: &DrivingRealization,
    which: Role,
) -> Result<PathSkeleton> {
    check_dims(model, coeff, y0, params)?;
    let (h, eps) = realization.params(which);
    if h != params.h || eps != params.eps {
        return Err(Error::IncompatibleRealization(format!(
            "realization has (h, eps) = ({h}, {eps}), params have ({}, {})",
            params.h, params.eps
        )));
    }
    let d = model.dim_x();
    let dy = coeff.dim_y();
    let sigma = model.sigma();
    let corr = &params.correction_factor;
    let use_sigma = sigma.iter().any(|v| *v != 0.0);
    let use_corr = corr.iter().any(|v| *v != 0.0);
    // compensated drift b − F₀(h)
    let drift: Vec<f64> = (model.drift() - model.f_zero(h)).iter().copied().collect();

    let grid = realization.grid(which).points();
    let union = realization.union_grid().points();
    let jumps = realization.jumps();

    let mut values = Vec::with_capacity(grid.len() * dy);
    values.extend_from_slice(y0);
    let mut y = y0.to_vec();
    let mut next = y.clone();
    let mut w = vec![0.0; d];
    let mut b = vec![0.0; d];
    let mut dx = vec![0.0; d];
    let mut gi = 1;
    let mut ji = 0;

    for (ui, win) in union.windows(2).enumerate() {
        let dw = realization.wiener_increment(ui);
        let db = realization.correction_increment(ui);
        for k in 0..d {
            w[k] += dw[k];
            b[k] += db[k];
        }
        let t = win[1];
        if t != grid[gi] {
            continue;
        }
        let s = grid[gi - 1];
        let dt = t - s;
        for k in 0..d {
            dx[k] = drift[k] * dt;
        }
        if use_sigma {
            for i in 0..d {
                for k in 0..d {
                    dx[i] += sigma[(i, k)] * w[k];
                }
            }
        }
        if use_corr {
            for i in 0..d {
                for k in 0..d {
                    dx[i] += corr[(i, k)] * b[k];
                }
            }
        }
        while ji < jumps.len() && jumps[ji].time <= t {
            if jumps[ji].magnitude >= h {
                for k in 0..d {
                    dx[k] += jumps[ji].size[k];
                }
            }
            ji += 1;
        }
        next.copy_from_slice(&y);
        coeff.apply(&y, &dx, &mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                time: t,
                level: None,
                sample: None,
            });
        }
        std::mem::swap(&mut y, &mut next);
        values.extend_from_slice(&y);
        w.iter_mut().for_each(|v| *v = 0.0);
        b.iter_mut().for_each(|v| *v = 0.0);
        gi += 1;
    }
    Ok(PathSkeleton {
        breakpoints: grid.to_vec(),
        values,
        dim_y: dy,
    })
}

/// One path of a single level.
pub fn simulate_level(
    model: &LevyModel,
    coeff: &CoefficientField,
    y0: &[f64],
    params: &LevelParams,
    stream: &RngStream,
) -> Result<PathSkeleton> {
    let r = realize_level(model, params.h, params.eps, stream)?;
    advance(model, coeff, y0, params, &r, Role::Fine)
}

/// Coupled `(fine, coarse)` paths driven by one realization.
pub fn simulate_pair(
    model: &LevyModel,
    coeff: &CoefficientField,
    y0: &[f64],
    fine: &LevelParams,
    coarse: &LevelParams,
    stream: &RngStream,
) -> Result<(PathSkeleton, PathSkeleton)> {
    if fine.correction_factor != coarse.correction_factor {
        return Err(Error::InvalidSchedule(
            "levels of a pair must share the correction factor".into(),
        ));
    }
    if fine.h > coarse.h || fine.eps > coarse.eps {
        return Err(Error::InvalidSchedule(
            "fine level must have h and eps no larger than the coarse level".into(),
        ));
    }
    let r = realize_pair(model, fine.h, fine.eps, coarse.h, coarse.eps, stream)?;
    Ok((
        advance(model, coeff, y0, fine, &r, Role::Fine)?,
        advance(model, coeff, y0, coarse, &r, Role::Coarse)?,
    ))
}
