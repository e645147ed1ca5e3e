use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{DleError, Result};
use crate::hilbert::C64;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Ascending eigenpairs of a real symmetric matrix; eigenvectors are columns.
pub(crate) fn eigh_real(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = m.nrows();
    let eig = SymmetricEigen::try_new(m, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| DleError::Eigensolver(format!("no convergence for dimension {dim}")))?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// `exp(−i t H)` for Hermitian `H`, via its eigendecomposition.
pub(crate) fn expm_hermitian(h: &DMatrix<C64>, t: f64) -> Result<DMatrix<C64>> {
    let dim = h.nrows();
    let eig = SymmetricEigen::try_new(h.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| DleError::Eigensolver(format!("no convergence for dimension {dim}")))?;
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (mut col, &e) in scaled.column_iter_mut().zip(eig.eigenvalues.iter()) {
        col *= C64::from_polar(1.0, -t * e);
    }
    Ok(scaled * v.adjoint())
}
