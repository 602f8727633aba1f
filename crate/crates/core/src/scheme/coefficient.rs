use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::RngStream;

type CustomFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Lipschitz coefficient `a: R^{d_Y} -> R^{d_Y × d_X}`.
#[derive(Clone)]
pub struct CoefficientField {
    dim_y: usize,
    dim_x: usize,
    kind: Kind,
    lipschitz: f64,
}

#[derive(Clone)]
enum Kind {
    Constant(DMatrix<f64>),
    /// `a(y) = base + Σ_l y_l slopes[l]`
    Affine {
        base: DMatrix<f64>,
        slopes: Vec<DMatrix<f64>>,
    },
    /// `a(y)_{ij} = amplitude_{ij} cos(y_i)`
    Cosine(DMatrix<f64>),
    Custom(CustomFn),
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            Kind::Constant(_) => "constant",
            Kind::Affine { .. } => "affine",
            Kind::Cosine(_) => "cosine",
            Kind::Custom(_) => "custom",
        };
        f.debug_struct("CoefficientField")
            .field("kind", &kind)
            .field("dim_y", &self.dim_y)
            .field("dim_x", &self.dim_x)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Config("coefficient entries must be finite".into()))
    }
}

impl CoefficientField {
    /// `a ≡ matrix`; Lipschitz constant 0.
    pub fn constant(matrix: DMatrix<f64>) -> Result<Self> {
        check_finite(&matrix)?;
        Ok(Self {
            dim_y: matrix.nrows(),
            dim_x: matrix.ncols(),
            kind: Kind::Constant(matrix),
            lipschitz: 0.0,
        })
    }

    /// `a(y) = base + Σ_l y_l slopes[l]` with one slope per coordinate of `y`.
    /// Lipschitz constant `(Σ_l |slopes[l]|_F²)^{1/2}`.
    pub fn affine(base: DMatrix<f64>, slopes: Vec<DMatrix<f64>>) -> Result<Self> {
        check_finite(&base)?;
        let (dy, dx) = base.shape();
        if slopes.len() != dy {
            return Err(Error::DimensionMismatch {
                expected: dy,
                found: slopes.len(),
            });
        }
        for s in &slopes {
            check_finite(s)?;
            if s.shape() != (dy, dx) {
                return Err(Error::DimensionMismatch {
                    expected: dy * dx,
                    found: s.len(),
                });
            }
        }
        let lipschitz = slopes.iter().map(|s| s.norm_squared()).sum::<f64>().sqrt();
        Ok(Self {
            dim_y: dy,
            dim_x: dx,
            kind: Kind::Affine { base, slopes },
            lipschitz,
        })
    }

    /// Built-in nonlinear map `a(y)_{ij} = amplitude_{ij} cos(y_i)`, Lipschitz
    /// with constant `|amplitude|_F`.
    pub fn cosine(amplitude: DMatrix<f64>) -> Result<Self> {
        check_finite(&amplitude)?;
        Ok(Self {
            dim_y: amplitude.nrows(),
            dim_x: amplitude.ncols(),
            lipschitz: amplitude.norm(),
            kind: Kind::Cosine(amplitude),
        })
    }

    /// User map with a declared Lipschitz constant (recorded, not verified).
    pub fn custom<F>(dim_y: usize, dim_x: usize, lipschitz: f64, f: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self {
            dim_y,
            dim_x,
            kind: Kind::Custom(Arc::new(f)),
            lipschitz,
        }
    }

    pub fn dim_y(&self) -> usize {
        self.dim_y
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn lipschitz_const(&self) -> f64 {
        self.lipschitz
    }

    /// The matrix of a constant field.
    pub fn as_constant(&self) -> Option<&DMatrix<f64>> {
        match &self.kind {
            Kind::Constant(a) => Some(a),
            _ => None,
        }
    }

    pub fn eval(&self, y: &[f64]) -> DMatrix<f64> {
        match &self.kind {
            Kind::Constant(a) => a.clone(),
            Kind::Affine { base, slopes } => {
                let mut a = base.clone();
                for (yl, s) in y.iter().zip(slopes) {
                    a += s * *yl;
                }
                a
            }
            Kind::Cosine(amp) => {
                let mut a = amp.clone();
                for (i, yi) in y.iter().enumerate() {
                    let c = yi.cos();
                    a.row_mut(i).scale_mut(c);
                }
                a
            }
            Kind::Custom(f) => f(y),
        }
    }

    /// `out += a(y) dx`.
    pub(crate) fn apply(&self, y: &[f64], dx: &[f64], out: &mut [f64]) {
        match &self.kind {
            Kind::Constant(a) => mat_vec_add(a, dx, out, |_| 1.0),
            Kind::Cosine(amp) => {
                mat_vec_add(amp, dx, out, |i| y[i].cos());
            }
            _ => {
                let a = self.eval(y);
                mat_vec_add(&a, dx, out, |_| 1.0);
            }
        }
    }

    /// Spot check of `|a(y) - a(y')|_F <= K |y - y'|` on `pairs` random pairs
    /// around `y0`.
    pub fn spot_check_lipschitz(&self, y0: &[f64], pairs: usize, seed: u64) -> bool {
        let mut rng = RngStream::new(seed).rng();
        let tol = 1e-9;
        (0..pairs).all(|_| {
            let y: Vec<f64> = y0.iter().map(|v| v + rng.random_range(-5.0..5.0)).collect();
            let z: Vec<f64> = y.iter().map(|v| v + rng.random_range(-1.0..1.0)).collect();
            let dist = y.iter().zip(&z).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let diff = (self.eval(&y) - self.eval(&z)).norm();
            diff <= self.lipschitz * dist * (1.0 + tol) + tol
        })
    }
}

fn mat_vec_add(a: &DMatrix<f64>, x: &[f64], out: &mut [f64], row_scale: impl Fn(usize) -> f64) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, xj) in x.iter().enumerate() {
            s += a[(i, j)] * xj;
        }
        *o += row_scale(i) * s;
    }
}

/// JSON form of a built-in coefficient field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Constant { matrix: Vec<Vec<f64>> },
    Affine {
        base: Vec<Vec<f64>>,
        slopes: Vec<Vec<Vec<f64>>>,
    },
    Cosine { amplitude: Vec<Vec<f64>> },
}

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return Err(Error::Config("coefficient matrix must be non-empty".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

impl TryFrom<&CoefficientSpec> for CoefficientField {
    type Error = Error;

    fn try_from(spec: &CoefficientSpec) -> Result<Self> {
        match spec {
            CoefficientSpec::Constant { matrix } => Self::constant(to_matrix(matrix)?),
            CoefficientSpec::Affine { base, slopes } => Self::affine(
                to_matrix(base)?,
                slopes.iter().map(|s| to_matrix(s)).collect::<Result<_>>()?,
            ),
            CoefficientSpec::Cosine { amplitude } => Self::cosine(to_matrix(amplitude)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_kinds() {
        let c = CoefficientField::constant(DMatrix::from_element(1, 1, 2.0)).unwrap();
        assert_eq!(c.eval(&[7.0])[(0, 0)], 2.0);
        assert_eq!(c.lipschitz_const(), 0.0);

        let a = CoefficientField::affine(
            DMatrix::from_element(1, 1, 1.0),
            vec![DMatrix::from_element(1, 1, 0.5)],
        )
        .unwrap();
        assert_eq!(a.eval(&[2.0])[(0, 0)], 2.0);
        assert_eq!(a.lipschitz_const(), 0.5);

        let s = CoefficientField::cosine(DMatrix::from_element(1, 1, 3.0)).unwrap();
        assert!((s.eval(&[0.0])[(0, 0)] - 3.0).abs() < 1e-15);
        let mut out = [1.0];
        s.apply(&[std::f64::consts::PI], &[2.0], &mut out);
        assert!((out[0] + 5.0).abs() < 1e-14);
    }

    #[test]
    fn lipschitz_spot_checks() {
        let amp = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.3, 2.0]);
        assert!(CoefficientField::cosine(amp).unwrap().spot_check_lipschitz(&[0.0, 1.0], 500, 1));
        let base = DMatrix::zeros(2, 1);
        let slopes = vec![DMatrix::from_element(2, 1, 1.0), DMatrix::from_element(2, 1, -2.0)];
        assert!(CoefficientField::affine(base, slopes).unwrap().spot_check_lipschitz(&[0.0, 0.0], 500, 2));
        let lying = CoefficientField::custom(1, 1, 0.1, |y| DMatrix::from_element(1, 1, y[0]));
        assert!(!lying.spot_check_lipschitz(&[0.0], 100, 3));
    }

    #[test]
    fn spec_round_trip_and_shape_errors() {
        let spec: CoefficientSpec = serde_json::from_str(r#"{"kind":"constant","matrix":[[2.0]]}"#).unwrap();
        let c = CoefficientField::try_from(&spec).unwrap();
        assert_eq!(c.as_constant().unwrap()[(0, 0)], 2.0);
        let bad = CoefficientSpec::Affine {
            base: vec![vec![1.0]],
            slopes: vec![],
        };
        assert!(matches!(CoefficientField::try_from(&bad), Err(Error::DimensionMismatch { .. })));
        assert!(serde_json::from_str::<CoefficientSpec>(r#"{"kind":"constant","matrix":[[1]],"x":1}"#).is_err());
    }
}
