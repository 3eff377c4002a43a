use super::decomp::{symmetric_eigen, thin_svd};
use super::{default_rank_tol, ensure_finite, DenseMatrix, GridInnerProduct, Signal};
use crate::error::{Error, Result};

/// Basis of a subspace of the grid space, orthonormal under the weighted
/// inner product (`weight * B^T B = I`).
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    basis: DenseMatrix,
    ip: GridInnerProduct,
    tol_used: f64,
}

impl SubspaceBasis {
    pub(crate) fn from_orthonormal(basis: DenseMatrix, ip: GridInnerProduct, tol_used: f64) -> Self {
        Self { basis, ip, tol_used }
    }

    /// The trivial subspace `{0}` of an `n`-dimensional grid space.
    pub fn empty(ambient_dim: usize, ip: GridInnerProduct) -> Self {
        Self {
            basis: DenseMatrix::zeros(ambient_dim, 0),
            ip,
            tol_used: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &DenseMatrix {
        &self.basis
    }

    pub fn ip(&self) -> GridInnerProduct {
        self.ip
    }

    pub fn tol_used(&self) -> f64 {
        self.tol_used
    }

    /// Coordinates of the orthogonal projection in this basis.
    pub fn coords(&self, x: &Signal) -> Signal {
        self.ip.analysis(&self.basis, x)
    }

    pub fn project(&self, x: &Signal) -> Signal {
        &self.basis * self.coords(x)
    }

    /// `x - P_V x`.
    pub fn residual(&self, x: &Signal) -> Signal {
        x - self.project(x)
    }

    /// `||P_{V^perp} x||`, computed from the residual itself rather than by
    /// subtracting squared norms.
    pub fn residual_norm(&self, x: &Signal) -> f64 {
        self.ip.norm(&self.residual(x))
    }

    /// Dense orthogonal projector `B B^T weight`.
    pub fn projector_matrix(&self) -> DenseMatrix {
        &self.basis * self.basis.transpose() * self.ip.weight()
    }

    /// `|| weight * B^T B - I ||_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.ip.gram(&self.basis, &self.basis);
        (g - DenseMatrix::identity(self.dim(), self.dim())).norm()
    }

    /// `sin(x, V)`; zero for `x = 0`.
    pub fn sin_to(&self, x: &Signal) -> f64 {
        let nx = self.ip.norm(x);
        if nx == 0.0 {
            0.0
        } else {
            (self.residual_norm(x) / nx).min(1.0)
        }
    }

    pub(crate) fn check_same_space(&self, other: &SubspaceBasis) -> Result<()> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::GridMismatch {
                expected: self.ambient_dim(),
                got: other.ambient_dim(),
            });
        }
        if self.ip != other.ip {
            return Err(Error::InvalidArgument(
                "subspaces use different inner-product weights".into(),
            ));
        }
        Ok(())
    }
}

/// Orthonormal basis of `range(m)` plus the retained singular values of the
/// weighted matrix `sqrt(weight) * m`.
pub(crate) fn orthonormal_basis_with_spectrum(
    m: &DenseMatrix,
    ip: GridInnerProduct,
    tol: Option<f64>,
) -> Result<(SubspaceBasis, Vec<f64>)> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::ZeroSubspace);
    }
    let tol = tol.unwrap_or_else(|| default_rank_tol(rows, cols));
    let sw = ip.weight().sqrt();
    let scaled = m * sw;

    // Left singular vectors and singular values of `scaled`.
    let (u, s) = if rows > 2 * cols {
        let qr = scaled.qr();
        let svd = thin_svd(&qr.r())?;
        (qr.q() * svd.u, svd.s)
    } else {
        let svd = thin_svd(&scaled)?;
        (svd.u, svd.s)
    };
    let smax = s[0];
    if smax == 0.0 {
        return Err(Error::ZeroSubspace);
    }
    let rank = s.iter().take_while(|&&v| v > tol * smax).count();
    let basis = u.columns(0, rank) / sw;
    let kept = s[..rank].to_vec();
    Ok((SubspaceBasis::from_orthonormal(basis, ip, tol), kept))
}

/// Orthonormal basis of the column space of `m`. The numerical rank counts
/// singular values above `tol * sigma_max` (default [`default_rank_tol`]).
pub fn orthonormal_basis(m: &DenseMatrix, ip: GridInnerProduct, tol: Option<f64>) -> Result<SubspaceBasis> {
    orthonormal_basis_with_spectrum(m, ip, tol).map(|(b, _)| b)
}

/// Basis of `V^perp` inside the `ambient_dim`-dimensional grid space.
pub fn orthogonal_complement(v: &SubspaceBasis, ambient_dim: usize) -> Result<SubspaceBasis> {
    if ambient_dim != v.ambient_dim() {
        return Err(Error::GridMismatch {
            expected: v.ambient_dim(),
            got: ambient_dim,
        });
    }
    let n = ambient_dim;
    if v.dim() >= n {
        return Err(Error::ZeroSubspace);
    }
    let sw = v.ip().weight().sqrt();
    if v.is_empty() {
        return Ok(SubspaceBasis::from_orthonormal(
            DenseMatrix::identity(n, n) / sw,
            v.ip(),
            v.tol_used(),
        ));
    }
    // I - Y Y^T with Y = sqrt(w) B is an exact orthogonal projector in the
    // Euclidean metric; its unit eigenvalues span the complement.
    let y = v.basis() * sw;
    let comp = DenseMatrix::identity(n, n) - &y * y.transpose();
    let (_, vectors) = symmetric_eigen(&comp)?;
    let k = n - v.dim();
    let basis = vectors.columns(n - k, k) / sw;
    Ok(SubspaceBasis::from_orthonormal(basis, v.ip(), v.tol_used()))
}
