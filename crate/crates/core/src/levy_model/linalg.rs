use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric PSD square root `S` of a covariance, so that `S Sᵀ = cov`.
///
/// Eigenvalues down to `-1e-12 |cov|` are treated as rounding noise and
/// clamped to zero; anything more negative is rejected.
pub fn cov_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    if cov.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: cov.ncols(),
        });
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let scale = cov.norm();
    let asymmetry = (cov - cov.transpose()).amax();
    if asymmetry > 1e-10 * scale.max(1.0) {
        return Err(Error::NonSymmetric { asymmetry });
    }
    if scale == 0.0 {
        return Ok(DMatrix::zeros(n, n));
    }
    if n == 1 {
        let v = cov[(0, 0)];
        if v < -1e-12 * scale {
            return Err(Error::IndefiniteMatrix { eigenvalue: v });
        }
        return Ok(DMatrix::from_element(1, 1, v.max(0.0).sqrt()));
    }
    let sym = (cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    if let Some(&min) = eig.eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
        if min < -1e-12 * scale {
            return Err(Error::IndefiniteMatrix { eigenvalue: min });
        }
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = &eig.eigenvectors;
    let root = v * DMatrix::from_diagonal(&roots) * v.transpose();
    // symmetrize away rounding
    Ok((&root + root.transpose()) * 0.5)
}
