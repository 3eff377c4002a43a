//! Dense linear algebra under a weighted grid inner product.
//!
//! Signals live on a uniform grid and the inner product is the Riemann sum
//! `<x, y> = dt * sum(x[i] * y[i])`, so discrete norms approximate L2 norms.
//! Every subspace is carried as a basis that is orthonormal under that
//! weighted product, and all angle computations go through singular values
//! of cross-Gram matrices of such bases.

mod angles;
mod decomp;
mod operator;
pub(crate) mod projector;
pub(crate) mod subspace;

pub use angles::{angle_cos, angle_cos_sin, angle_sin, SubspaceRef};
pub use operator::FactoredOperator;
pub use projector::{
    direct_sum_ratio, oblique_from_bases, oblique_projector, orthogonal_projector, Projector, ProjectorKind,
    DIRECT_SUM_THRESHOLD,
};
pub use subspace::{orthogonal_complement, orthonormal_basis, SubspaceBasis};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;
pub type Signal = DVector<f64>;

/// `<x, y> = weight * sum(x[i] * y[i])` with `weight` the grid step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridInnerProduct {
    weight: f64,
}

impl GridInnerProduct {
    pub fn new(weight: f64) -> Result<Self> {
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "inner-product weight must be positive and finite, got {weight}"
            )));
        }
        Ok(Self { weight })
    }

    /// Plain Euclidean inner product.
    pub fn unit() -> Self {
        Self { weight: 1.0 }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn inner(&self, x: &Signal, y: &Signal) -> f64 {
        self.weight * x.dot(y)
    }

    pub fn norm(&self, x: &Signal) -> f64 {
        (self.weight * x.norm_squared()).sqrt()
    }

    /// Weighted Gram `weight * a^T b`.
    pub fn gram(&self, a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        a.tr_mul(b) * self.weight
    }

    /// Analysis operator of a frame: `c[n] = <x, f_n>`.
    pub fn analysis(&self, frame: &DenseMatrix, x: &Signal) -> Signal {
        frame.tr_mul(x) * self.weight
    }
}

/// Default relative rank cutoff: `max(rows, cols) * eps`.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols).max(1) as f64 * f64::EPSILON
}

pub(crate) fn ensure_finite(m: &DenseMatrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteInput)
    }
}

pub(crate) fn ensure_finite_vec(v: &Signal) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteInput)
    }
}

/// Singular values in descending order. Tall inputs are reduced by QR first,
/// which is much cheaper than bidiagonalizing the full matrix.
pub(crate) fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok(Vec::new());
    }
    if r > 2 * c {
        decomp::singular_values(&m.clone().qr().r())
    } else {
        decomp::singular_values(m)
    }
}

/// Moore-Penrose pseudoinverse. Singular values below `tol * sigma_max` are
/// treated as zero; `tol = None` uses [`default_rank_tol`].
pub fn pseudoinverse(m: &DenseMatrix, tol: Option<f64>) -> Result<DenseMatrix> {
    ensure_finite(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(DenseMatrix::zeros(cols, rows));
    }
    let tol = tol.unwrap_or_else(|| default_rank_tol(rows, cols));
    if tol < 0.0 || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!("rank tolerance {tol}")));
    }
    let svd = decomp::thin_svd(m)?;
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let mut out = DenseMatrix::zeros(cols, rows);
    if smax == 0.0 {
        return Ok(out);
    }
    let cutoff = tol * smax;
    for (i, &s) in svd.s.iter().enumerate().take_while(|(_, &s)| s > cutoff) {
        // out += v_i u_i^T / s
        out.ger(1.0 / s, &svd.v.column(i), &svd.u.column(i), 1.0);
    }
    Ok(out)
}
