//! Dense factorizations, computed by `faer` on copies of nalgebra matrices.

use faer::{Mat, MatRef, Side};

use super::DenseMatrix;
use crate::error::{Error, Result};

fn to_faer(m: &DenseMatrix) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: MatRef<'_, f64>) -> DenseMatrix {
    DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// `m = U diag(s) V^T` with `p = min(rows, cols)` columns in `U` and `V`
/// and `s` nonincreasing.
#[derive(Debug, Clone)]
pub(crate) struct ThinSvd {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

pub(crate) fn thin_svd(m: &DenseMatrix) -> Result<ThinSvd> {
    let svd = to_faer(m)
        .thin_svd()
        .map_err(|_| Error::NoConvergence("singular value decomposition"))?;
    let s = svd.S().column_vector().iter().copied().collect();
    Ok(ThinSvd {
        u: from_faer(svd.U()),
        s,
        v: from_faer(svd.V()),
    })
}

/// Singular values, nonincreasing.
pub(crate) fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    to_faer(m)
        .singular_values()
        .map_err(|_| Error::NoConvergence("singular value decomposition"))
}

/// Eigenvalues (nondecreasing) and orthonormal eigenvectors of a symmetric
/// matrix.
pub(crate) fn symmetric_eigen(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let evd = to_faer(m)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence("symmetric eigendecomposition"))?;
    let values = evd.S().column_vector().iter().copied().collect();
    Ok((values, from_faer(evd.U())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn svd_reconstructs_clustered_spectrum() {
        // Orthogonal factors around a spectrum with nine nearly equal values.
        let n = 10;
        let q1 = DenseMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64).sin())
            .qr()
            .q();
        let q2 = DenseMatrix::from_fn(n, n, |i, j| ((i * 5 + j * 11) as f64).cos())
            .qr()
            .q();
        let d = DenseMatrix::from_fn(n, n, |i, j| match (i == j, i) {
            (false, _) => 0.0,
            (true, 9) => 0.068,
            (true, _) => 1.0 - i as f64 * 1e-9,
        });
        let m = &q1 * d * q2.transpose();
        let svd = thin_svd(&m).unwrap();
        let rec = &svd.u * DenseMatrix::from_diagonal(&svd.s.clone().into()) * svd.v.transpose();
        assert!((rec - &m).norm() < 1e-13);
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eigen_of_diagonal() {
        let (vals, vecs) = symmetric_eigen(&dmatrix![3.0, 0.0; 0.0, 1.0]).unwrap();
        assert_eq!(vals, vec![1.0, 3.0]);
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }
}
