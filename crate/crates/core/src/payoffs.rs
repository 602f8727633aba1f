//! Lipschitz path functionals, evaluated exactly on piecewise-constant
//! skeletons.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scheme::PathSkeleton;

type CustomFn = Arc<dyn Fn(&PathSkeleton) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum PayoffKind {
    /// `⟨w, y(1)⟩`
    Terminal { weights: Vec<f64> },
    /// `sup_t y_c(t)`
    Lookback { coordinate: usize },
    /// `∫_0^1 ⟨w, y(t)⟩ dt`
    AsianAverage { weights: Vec<f64> },
    /// Path-independent constant.
    Constant { value: f64 },
    Custom(CustomFn),
}

impl fmt::Debug for PayoffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Terminal { weights } => f.debug_struct("Terminal").field("weights", weights).finish(),
            Self::Lookback { coordinate } => f.debug_struct("Lookback").field("coordinate", coordinate).finish(),
            Self::AsianAverage { weights } => f.debug_struct("AsianAverage").field("weights", weights).finish(),
            Self::Constant { value } => f.debug_struct("Constant").field("value", value).finish(),
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// A functional `f: D[0,1] -> R` with its sup-norm Lipschitz constant.
#[derive(Debug, Clone)]
pub struct Payoff {
    kind: PayoffKind,
    lip_const: f64,
    dim_y: Option<usize>,
}

fn euclid(w: &[f64]) -> f64 {
    w.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl Payoff {
    pub fn terminal(weights: Vec<f64>) -> Self {
        Self {
            lip_const: euclid(&weights),
            dim_y: Some(weights.len()),
            kind: PayoffKind::Terminal { weights },
        }
    }

    pub fn lookback(coordinate: usize) -> Self {
        Self {
            kind: PayoffKind::Lookback { coordinate },
            lip_const: 1.0,
            dim_y: None,
        }
    }

    pub fn asian(weights: Vec<f64>) -> Self {
        Self {
            lip_const: euclid(&weights),
            dim_y: Some(weights.len()),
            kind: PayoffKind::AsianAverage { weights },
        }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            kind: PayoffKind::Constant { value },
            lip_const: 0.0,
            dim_y: None,
        }
    }

    /// User functional; `lip_const` is recorded, not verified.
    pub fn custom<F>(lip_const: f64, f: F) -> Self
    where
        F: Fn(&PathSkeleton) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: PayoffKind::Custom(Arc::new(f)),
            lip_const,
            dim_y: None,
        }
    }

    pub fn kind(&self) -> &PayoffKind {
        &self.kind
    }

    pub fn lip_const(&self) -> f64 {
        self.lip_const
    }

    /// Checks that the payoff can read paths of dimension `dim_y`.
    pub fn check_dim(&self, dim_y: usize) -> Result<()> {
        if let Some(d) = self.dim_y {
            if d != dim_y {
                return Err(Error::DimensionMismatch {
                    expected: dim_y,
                    found: d,
                });
            }
        }
        if let PayoffKind::Lookback { coordinate } = self.kind {
            if coordinate >= dim_y {
                return Err(Error::DimensionMismatch {
                    expected: dim_y,
                    found: coordinate + 1,
                });
            }
        }
        Ok(())
    }

    /// Terminal weights, if this is a terminal payoff.
    pub fn terminal_weights(&self) -> Option<&[f64]> {
        match &self.kind {
            PayoffKind::Terminal { weights } => Some(weights),
            _ => None,
        }
    }

    pub fn evaluate(&self, path: &PathSkeleton) -> Result<f64> {
        self.check_dim(path.dim_y())?;
        Ok(match &self.kind {
            PayoffKind::Terminal { weights } => dot(weights, path.terminal()),
            PayoffKind::Lookback { coordinate } => path
                .values()
                .map(|v| v[*coordinate])
                .fold(f64::NEG_INFINITY, f64::max),
            PayoffKind::AsianAverage { weights } => {
                let t = path.breakpoints();
                t.windows(2)
                    .zip(path.values())
                    .map(|(w, y)| dot(weights, y) * (w[1] - w[0]))
                    .sum()
            }
            PayoffKind::Constant { value } => *value,
            PayoffKind::Custom(f) => f(path),
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// JSON form: `{"kind": "terminal"|"lookback"|"asian"|"constant", ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffSpec {
    Terminal { weights: Vec<f64> },
    Lookback {
        #[serde(default)]
        coordinate: usize,
    },
    Asian { weights: Vec<f64> },
    Constant { value: f64 },
}

impl From<&PayoffSpec> for Payoff {
    fn from(spec: &PayoffSpec) -> Self {
        match spec {
            PayoffSpec::Terminal { weights } => Payoff::terminal(weights.clone()),
            PayoffSpec::Lookback { coordinate } => Payoff::lookback(*coordinate),
            PayoffSpec::Asian { weights } => Payoff::asian(weights.clone()),
            PayoffSpec::Constant { value } => Payoff::constant(*value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_piece() -> PathSkeleton {
        PathSkeleton::new(vec![0.0, 0.5, 1.0], vec![vec![1.0], vec![3.0], vec![3.0]]).unwrap()
    }

    #[test]
    fn hand_computed_two_piece() {
        let p = two_piece();
        assert_eq!(Payoff::lookback(0).evaluate(&p).unwrap(), 3.0);
        assert_eq!(Payoff::asian(vec![1.0]).evaluate(&p).unwrap(), 2.0);
        assert_eq!(Payoff::terminal(vec![1.0]).evaluate(&p).unwrap(), 3.0);
    }

    #[test]
    fn constant_path() {
        let p = PathSkeleton::constant(&[2.5]);
        for f in [Payoff::terminal(vec![1.0]), Payoff::lookback(0), Payoff::asian(vec![1.0])] {
            assert_eq!(f.evaluate(&p).unwrap(), 2.5);
        }
        assert_eq!(Payoff::constant(-1.0).evaluate(&p).unwrap(), -1.0);
    }

    #[test]
    fn dimension_errors() {
        let p = two_piece();
        assert!(matches!(
            Payoff::terminal(vec![1.0, 1.0]).evaluate(&p),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Payoff::lookback(1).evaluate(&p).is_err());
    }

    #[test]
    fn lip_constants() {
        assert_eq!(Payoff::terminal(vec![3.0, 4.0]).lip_const(), 5.0);
        assert_eq!(Payoff::lookback(0).lip_const(), 1.0);
        assert_eq!(Payoff::constant(7.0).lip_const(), 0.0);
    }

    #[test]
    fn spec_parsing() {
        let s: PayoffSpec = serde_json::from_str(r#"{"kind":"asian","weights":[1.0]}"#).unwrap();
        assert_eq!(Payoff::from(&s).lip_const(), 1.0);
        assert!(serde_json::from_str::<PayoffSpec>(r#"{"kind":"terminal","weights":[1],"coordinate":0}"#).is_err());
    }

    fn skeleton_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (2usize..30).prop_flat_map(|n| {
            (
                proptest::collection::vec(0.001f64..1.0, n - 1),
                proptest::collection::vec(-10.0f64..10.0, n),
                proptest::collection::vec(-10.0f64..10.0, n),
            )
        })
    }

    fn build(gaps: &[f64], ys: &[f64]) -> PathSkeleton {
        let total: f64 = gaps.iter().sum();
        let mut t = vec![0.0];
        let mut acc = 0.0;
        for g in &gaps[..gaps.len() - 1] {
            acc += g / total;
            t.push(acc);
        }
        t.push(1.0);
        PathSkeleton::new(t, ys.iter().map(|v| vec![*v]).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn lipschitz_certificate((gaps, xs, ys) in skeleton_pair()) {
            let (a, b) = (build(&gaps, &xs), build(&gaps, &ys));
            let dist = xs.iter().zip(&ys).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            for f in [Payoff::terminal(vec![1.0]), Payoff::lookback(0), Payoff::asian(vec![1.0])] {
                let gap = (f.evaluate(&a).unwrap() - f.evaluate(&b).unwrap()).abs();
                prop_assert!(gap <= f.lip_const() * dist * (1.0 + 1e-12) + 1e-12);
            }
        }

        #[test]
        fn shift_equivariance((gaps, xs, _ys) in skeleton_pair(), c in -5.0f64..5.0) {
            let a = build(&gaps, &xs);
            let shifted: Vec<f64> = xs.iter().map(|v| v + c).collect();
            let b = build(&gaps, &shifted);
            for f in [Payoff::terminal(vec![1.0]), Payoff::lookback(0), Payoff::asian(vec![1.0])] {
                let d = f.evaluate(&b).unwrap() - f.evaluate(&a).unwrap() - c;
                prop_assert!(d.abs() < 1e-9);
            }
        }
    }
}
