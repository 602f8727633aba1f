//! Random inputs of one level or one coupled level pair.
//!
//! A realization holds every jump of size at least `h_fine` on `[0,1]`, the
//! jump-adapted grids of the fine and coarse level, and raw Gaussian
//! increments (covariance `δ I`) of the Wiener process `W` and of the
//! correction process `B` on every interval of the union grid. Scaling by
//! `Σ` and by the correction factor happens in the scheme.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::Serialize;

use crate::error::Result;
use crate::levy_model::{magnitude, LevyModel};
use crate::stream::{role, RngStream};

#[derive(Debug, Clone, PartialEq)]
pub struct JumpRecord {
    pub time: f64,
    pub size: DVector<f64>,
    /// `|size|`, cached for threshold comparisons.
    pub magnitude: f64,
}

/// Strictly increasing times from 0 to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_gap(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.points.binary_search_by(|p| p.total_cmp(&t)).is_ok()
    }

    /// Sorted union of two grids.
    pub fn union(&self, other: &TimeGrid) -> TimeGrid {
        let (a, b) = (&self.points, &other.points);
        let mut points = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x < y => {
                    i += 1;
                    x
                }
                (Some(&x), Some(&y)) if y < x => {
                    j += 1;
                    y
                }
                (Some(&x), Some(_)) => {
                    i += 1;
                    j += 1;
                    x
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            points.push(next);
        }
        TimeGrid { points }
    }
}

/// Jump-adapted grid: `T_0 = 0` and `T_{j+1}` is the first jump time after
/// `T_j` or `T_j + eps`, whichever comes first. The horizon 1 is always the
/// last point.
///
/// `jump_times` must be sorted and lie in `(0, 1]`. A jump landing exactly on
/// `T_j + eps` yields a single point.
pub fn build_grid(jump_times: &[f64], eps: f64) -> TimeGrid {
    assert!(eps > 0.0, "grid step must be positive");
    let mut points = Vec::with_capacity((1.0 / eps) as usize + jump_times.len() + 2);
    points.push(0.0);
    let mut current = 0.0;
    let mut next_jump = 0;
    loop {
        while next_jump < jump_times.len() && jump_times[next_jump] <= current {
            next_jump += 1;
        }
        let stepped = current + eps;
        let candidate = match jump_times.get(next_jump) {
            Some(&t) if t <= stepped => t,
            _ => stepped,
        };
        if candidate >= 1.0 {
            points.push(1.0);
            break;
        }
        points.push(candidate);
        current = candidate;
    }
    TimeGrid { points }
}

/// All jumps with `|size| >= h` on `[0,1]`: a Poisson(`ν(B(0,h)^c)`) count,
/// sorted uniform times, i.i.d. sizes from the normalized tail law.
pub fn sample_jumps(model: &LevyModel, h: f64, stream: &RngStream) -> Result<Vec<JumpRecord>> {
    let mass = model.tail_mass(h);
    if !(mass > 0.0) {
        return Ok(Vec::new());
    }
    let sampler = model.tail_sampler(h)?;
    let mut rng = stream.rng();
    let count = Poisson::new(mass)
        .map(|p| p.sample(&mut rng) as usize)
        .unwrap_or(0);
    let mut times: Vec<f64> = (0..count).map(|_| 1.0 - rng.random::<f64>()).collect();
    times.sort_by(|a, b| a.total_cmp(b));
    Ok(times
        .into_iter()
        .map(|time| {
            let size = sampler.sample(&mut rng);
            JumpRecord {
                time,
                magnitude: magnitude(&size),
                size,
            }
        })
        .collect())
}

/// Shared randomness of a coupled pair (fine, coarse).
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingRealization {
    dim_x: usize,
    h_fine: f64,
    eps_fine: f64,
    h_coarse: f64,
    eps_coarse: f64,
    jumps: Vec<JumpRecord>,
    grid_fine: TimeGrid,
    grid_coarse: TimeGrid,
    union: TimeGrid,
    wiener: Vec<f64>,
    correction: Vec<f64>,
}

/// Which member of a coupled pair to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Fine,
    Coarse,
}

fn gaussian_increments(union: &TimeGrid, dim: usize, stream: &RngStream) -> Vec<f64> {
    let mut rng = stream.rng();
    let mut out = Vec::with_capacity((union.len() - 1) * dim);
    for w in union.points().windows(2) {
        let sd = (w[1] - w[0]).sqrt();
        for _ in 0..dim {
            let z: f64 = StandardNormal.sample(&mut rng);
            out.push(sd * z);
        }
    }
    out
}

/// Jumps are drawn once at `h_fine`; the coarse level sees the subset with
/// `|size| >= h_coarse`. `W` and `B` increments live on the union grid, so
/// both levels are driven by the same Gaussian paths.
pub fn realize_pair(
    model: &LevyModel,
    h_fine: f64,
    eps_fine: f64,
    h_coarse: f64,
    eps_coarse: f64,
    stream: &RngStream,
) -> Result<DrivingRealization> {
    debug_assert!(h_fine <= h_coarse && eps_fine <= eps_coarse);
    let jumps = sample_jumps(model, h_fine, &stream.split(role::JUMPS))?;
    let fine_times: Vec<f64> = jumps.iter().map(|j| j.time).collect();
    let grid_fine = build_grid(&fine_times, eps_fine);
    let grid_coarse = if h_coarse == h_fine && eps_coarse == eps_fine {
        grid_fine.clone()
    } else {
        let coarse_times: Vec<f64> = jumps
            .iter()
            .filter(|j| j.magnitude >= h_coarse)
            .map(|j| j.time)
            .collect();
        build_grid(&coarse_times, eps_coarse)
    };
    let union = grid_fine.union(&grid_coarse);
    let d = model.dim_x();
    let wiener = gaussian_increments(&union, d, &stream.split(role::WIENER));
    let correction = gaussian_increments(&union, d, &stream.split(role::CORRECTION));
    Ok(DrivingRealization {
        dim_x: d,
        h_fine,
        eps_fine,
        h_coarse,
        eps_coarse,
        jumps,
        grid_fine,
        grid_coarse,
        union,
        wiener,
        correction,
    })
}

/// Single-level realization (fine and coarse coincide).
pub fn realize_level(model: &LevyModel, h: f64, eps: f64, stream: &RngStream) -> Result<DrivingRealization> {
    realize_pair(model, h, eps, h, eps, stream)
}

impl DrivingRealization {
    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn jumps(&self) -> &[JumpRecord] {
        &self.jumps
    }

    pub fn grid_fine(&self) -> &TimeGrid {
        &self.grid_fine
    }

    pub fn grid_coarse(&self) -> &TimeGrid {
        &self.grid_coarse
    }

    pub fn union_grid(&self) -> &TimeGrid {
        &self.union
    }

    pub fn grid(&self, role: Role) -> &TimeGrid {
        match role {
            Role::Fine => &self.grid_fine,
            Role::Coarse => &self.grid_coarse,
        }
    }

    /// `(h, eps)` the given role was generated with.
    pub fn params(&self, role: Role) -> (f64, f64) {
        match role {
            Role::Fine => (self.h_fine, self.eps_fine),
            Role::Coarse => (self.h_coarse, self.eps_coarse),
        }
    }

    /// Raw `ΔW` on union interval `i`.
    pub fn wiener_increment(&self, i: usize) -> &[f64] {
        &self.wiener[i * self.dim_x..(i + 1) * self.dim_x]
    }

    /// Raw `ΔB` on union interval `i`.
    pub fn correction_increment(&self, i: usize) -> &[f64] {
        &self.correction[i * self.dim_x..(i + 1) * self.dim_x]
    }

    /// Raw Gaussian increments of both processes summed over the intervals of
    /// `role`'s grid.
    pub fn aggregated_increments(&self, role: Role) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let grid = self.grid(role).points();
        let d = self.dim_x;
        let mut w_out = Vec::with_capacity(grid.len() - 1);
        let mut b_out = Vec::with_capacity(grid.len() - 1);
        let mut w = vec![0.0; d];
        let mut b = vec![0.0; d];
        let mut gi = 1;
        for (i, win) in self.union.points().windows(2).enumerate() {
            for k in 0..d {
                w[k] += self.wiener_increment(i)[k];
                b[k] += self.correction_increment(i)[k];
            }
            if win[1] == grid[gi] {
                w_out.push(std::mem::replace(&mut w, vec![0.0; d]));
                b_out.push(std::mem::replace(&mut b, vec![0.0; d]));
                gi += 1;
            }
        }
        (w_out, b_out)
    }

    /// Debug dump `{"jumps": [{"t", "x"}], "grid_fine", "grid_coarse"}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "jumps": self.jumps.iter().map(|j| serde_json::json!({
                "t": j.time,
                "x": j.size.iter().copied().collect::<Vec<f64>>(),
            })).collect::<Vec<_>>(),
            "grid_fine": self.grid_fine,
            "grid_coarse": self.grid_coarse,
        })
    }
}
