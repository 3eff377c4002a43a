use super::subspace::{orthogonal_complement, orthonormal_basis, SubspaceBasis};
use super::{ensure_finite_vec, pseudoinverse, singular_values, DenseMatrix, GridInnerProduct, Signal};
use crate::error::{Error, Result};

/// Smallest admissible conditioning reported by [`direct_sum_ratio`].
pub const DIRECT_SUM_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorKind {
    Orthogonal,
    Oblique,
}

/// Idempotent operator together with orthonormal bases of its range and
/// nullspace.
#[derive(Debug, Clone)]
pub struct Projector {
    matrix: DenseMatrix,
    kind: ProjectorKind,
    range_basis: SubspaceBasis,
    nullspace_basis: SubspaceBasis,
}

impl Projector {
    pub(crate) fn from_parts(
        matrix: DenseMatrix,
        kind: ProjectorKind,
        range_basis: SubspaceBasis,
        nullspace_basis: SubspaceBasis,
    ) -> Self {
        Self {
            matrix,
            kind,
            range_basis,
            nullspace_basis,
        }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.matrix
    }

    pub fn kind(&self) -> ProjectorKind {
        self.kind
    }

    pub fn range_basis(&self) -> &SubspaceBasis {
        &self.range_basis
    }

    pub fn nullspace_basis(&self) -> &SubspaceBasis {
        &self.nullspace_basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &Signal) -> Result<Signal> {
        if x.len() != self.dim() {
            return Err(Error::GridMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        ensure_finite_vec(x)?;
        Ok(&self.matrix * x)
    }

    /// `||P^2 - P||_F`.
    pub fn idempotence_defect(&self) -> f64 {
        (&self.matrix * &self.matrix - &self.matrix).norm()
    }

    /// `||P - P^*||_F` under the grid inner product. A scalar weight makes
    /// the adjoint the plain transpose.
    pub fn self_adjoint_defect(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).norm()
    }
}

pub(crate) fn complement_or_empty(v: &SubspaceBasis) -> Result<SubspaceBasis> {
    let n = v.ambient_dim();
    if v.dim() == n {
        Ok(SubspaceBasis::empty(n, v.ip()))
    } else {
        orthogonal_complement(v, n)
    }
}

/// `P_V = Q Q^T dt` for an orthonormal `Q`.
pub fn orthogonal_projector(v: &SubspaceBasis) -> Result<Projector> {
    if v.is_empty() {
        return Err(Error::ZeroSubspace);
    }
    Ok(Projector::from_parts(
        v.projector_matrix(),
        ProjectorKind::Orthogonal,
        v.clone(),
        complement_or_empty(v)?,
    ))
}

/// Conditioning of the direct sum `range (+) sampling^perp`: the smallest
/// singular value of the cross-Gram of the two orthonormal bases, which is
/// the cosine of their largest principal angle. Orthonormality pins
/// `sigma_max <= 1`, so this is a lower bound on `sigma_min / sigma_max` that
/// stays meaningful when both are tiny. Zero when the dimensions differ.
pub fn direct_sum_ratio(range: &SubspaceBasis, sampling: &SubspaceBasis) -> Result<f64> {
    range.check_same_space(sampling)?;
    if range.is_empty() || sampling.is_empty() {
        return Err(Error::ZeroSubspace);
    }
    if range.dim() != sampling.dim() {
        return Ok(0.0);
    }
    let s = singular_values(&range.ip().gram(sampling.basis(), range.basis()))?;
    Ok(s[s.len() - 1])
}

/// Verifies `range (+) sampling^perp = H` and returns the conditioning ratio.
pub(crate) fn check_direct_sum(range: &SubspaceBasis, sampling: &SubspaceBasis, pair: &str) -> Result<f64> {
    let ratio = direct_sum_ratio(range, sampling)?;
    if range.dim() != sampling.dim() || ratio < DIRECT_SUM_THRESHOLD {
        return Err(Error::DirectSumViolation {
            pair: pair.to_string(),
            range_dim: range.dim(),
            sampling_dim: sampling.dim(),
            ratio,
        });
    }
    Ok(ratio)
}

/// Dense `Q1 (<Qs, Q1>)^{-1} <Qs, .>`, the oblique projection onto `range`
/// along `sampling^perp`. Assumes the direct sum was already checked.
pub(crate) fn oblique_matrix(range: &SubspaceBasis, sampling: &SubspaceBasis) -> Result<DenseMatrix> {
    let ip = range.ip();
    let g = ip.gram(sampling.basis(), range.basis());
    let ginv = pseudoinverse(&g, None)?;
    Ok(range.basis() * ginv * sampling.basis().transpose() * ip.weight())
}

/// Oblique projector onto `range` along `sampling^perp`.
pub fn oblique_from_bases(range: &SubspaceBasis, sampling: &SubspaceBasis) -> Result<Projector> {
    check_direct_sum(range, sampling, "range/sampling")?;
    Ok(Projector::from_parts(
        oblique_matrix(range, sampling)?,
        ProjectorKind::Oblique,
        range.clone(),
        complement_or_empty(sampling)?,
    ))
}

/// `P_{V1 S^perp} = V1 (S^* V1)^+ S^*` for frames `V1` and `S` on the grid.
pub fn oblique_projector(
    range_frame: &DenseMatrix,
    sampling_frame: &DenseMatrix,
    ip: GridInnerProduct,
    tol: Option<f64>,
) -> Result<Projector> {
    let range = orthonormal_basis(range_frame, ip, tol)?;
    let sampling = orthonormal_basis(sampling_frame, ip, tol)?;
    oblique_from_bases(&range, &sampling)
}
