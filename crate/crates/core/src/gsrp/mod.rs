//! Frames, sampling and synthesis, and the five sampling schemes.
//!
//! A frame's column space is carried by a weighted-orthonormal basis `Q`
//! together with coefficients `C = <Q, F>`, so `F = Q C` with `C` of full
//! row rank. All correction filters are assembled from these factors, which
//! keeps redundant frames exact without forming squared Gram matrices.

mod modified;
mod scheme;

pub use modified::{modified_subspace_b, ModifiedSubspace};
pub use scheme::{
    beta_constraint_level, build_consistent, build_constrained, build_orthogonal, build_regret,
    build_subspace, combine_constrained, constraint_value, reconstruct, GsrpScheme, SchemeTag,
};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::subspace::orthonormal_basis_with_spectrum;
use crate::numerics::{
    ensure_finite_vec, pseudoinverse, DenseMatrix, GridInnerProduct, Signal, SubspaceBasis,
};

#[derive(Debug)]
struct FrameInner {
    synthesis: DenseMatrix,
    ip: GridInnerProduct,
    basis: SubspaceBasis,
    coeff_pinv: DenseMatrix,
    bounds: (f64, f64),
}

/// Synthesis operator of a frame on the grid; analysis is its adjoint under
/// the grid inner product. Cloning is cheap.
#[derive(Debug, Clone)]
pub struct Frame(Arc<FrameInner>);

impl Frame {
    pub fn new(synthesis: DenseMatrix, ip: GridInnerProduct) -> Result<Self> {
        Self::with_tol(synthesis, ip, None)
    }

    /// As [`Frame::new`] with an explicit relative rank cutoff.
    pub fn with_tol(synthesis: DenseMatrix, ip: GridInnerProduct, tol: Option<f64>) -> Result<Self> {
        let (basis, spectrum) = orthonormal_basis_with_spectrum(&synthesis, ip, tol)?;
        let coeffs = ip.gram(basis.basis(), &synthesis);
        let coeff_pinv = pseudoinverse(&coeffs, Some(basis.tol_used()))?;
        let beta = spectrum[0] * spectrum[0];
        let alpha = spectrum[spectrum.len() - 1].powi(2);
        Ok(Self(Arc::new(FrameInner {
            synthesis,
            ip,
            basis,
            coeff_pinv,
            bounds: (alpha, beta),
        })))
    }

    pub fn synthesis(&self) -> &DenseMatrix {
        &self.0.synthesis
    }

    pub fn ip(&self) -> GridInnerProduct {
        self.0.ip
    }

    /// Orthonormal basis of the frame's span.
    pub fn basis(&self) -> &SubspaceBasis {
        &self.0.basis
    }

    /// Number of frame vectors.
    pub fn len(&self) -> usize {
        self.0.synthesis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dimension of the spanned subspace.
    pub fn rank(&self) -> usize {
        self.0.basis.dim()
    }

    pub fn grid_len(&self) -> usize {
        self.0.synthesis.nrows()
    }

    /// Frame bounds `(alpha, beta)`.
    pub fn bounds(&self) -> (f64, f64) {
        self.0.bounds
    }

    /// `C^+` for `F = Q C`, so `(C^T)^+ = (C^+)^T`.
    pub(crate) fn coeff_pinv(&self) -> &DenseMatrix {
        &self.0.coeff_pinv
    }

    pub(crate) fn same_grid(&self, other: &Frame) -> Result<()> {
        self.basis().check_same_space(other.basis())
    }

    fn check_signal(&self, x: &Signal) -> Result<()> {
        if x.len() != self.grid_len() {
            return Err(Error::GridMismatch {
                expected: self.grid_len(),
                got: x.len(),
            });
        }
        ensure_finite_vec(x)
    }
}

/// `(alpha, beta)`: extreme nonzero squared singular values of the weighted
/// synthesis matrix.
pub fn frame_bounds(f: &Frame) -> (f64, f64) {
    f.bounds()
}

/// Samples `c[n] = <x, f_n>` indexed like the frame's columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSequence {
    values: Signal,
}

impl SampleSequence {
    pub fn new(values: Signal) -> Result<Self> {
        ensure_finite_vec(&values)?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &Signal {
        &self.values
    }

    pub fn into_values(self) -> Signal {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn sample(s: &Frame, x: &Signal) -> Result<SampleSequence> {
    s.check_signal(x)?;
    Ok(SampleSequence {
        values: s.ip().analysis(s.synthesis(), x),
    })
}

/// `sum_n c[n] w_n`.
pub fn synthesize(w: &Frame, c: &SampleSequence) -> Result<Signal> {
    if c.len() != w.len() {
        return Err(Error::LengthMismatch {
            expected: w.len(),
            got: c.len(),
        });
    }
    Ok(w.synthesis() * c.values())
}
