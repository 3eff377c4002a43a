use super::Frame;
use crate::error::{Error, Result};
use crate::numerics::projector::{check_direct_sum, complement_or_empty, oblique_matrix};
use crate::numerics::subspace::orthonormal_basis_with_spectrum;
use crate::numerics::{
    angle_cos_sin, orthonormal_basis, pseudoinverse, DenseMatrix, GridInnerProduct, Projector, ProjectorKind,
    Signal, SubspaceBasis, SubspaceRef,
};

/// Family of ranges of `B = lambda P_{A S^perp} + (1 - lambda) P_S`.
///
/// `S` and `A` both lie in the joint space `U = S + A`, and so does every
/// `range(B) = range(B Q_S) = range((1 - lambda) Q_S + lambda Q_A G^{-1})`
/// with `G = <Q_S, Q_A>`. All per-lambda work happens in coordinates of an
/// orthonormal basis of `U`, whose dimension is at most `dim S + dim A`.
#[derive(Debug, Clone)]
pub struct ModifiedSubspace {
    sampling: SubspaceBasis,
    joint: SubspaceBasis,
    s_coords: DenseMatrix,
    a_coords: DenseMatrix,
}

impl ModifiedSubspace {
    pub fn new(sampling: &SubspaceBasis, prior: &SubspaceBasis) -> Result<Self> {
        sampling.check_same_space(prior)?;
        check_direct_sum(prior, sampling, "A/S")?;
        let ip = sampling.ip();
        let g_inv = pseudoinverse(&ip.gram(sampling.basis(), prior.basis()), None)?;
        let a_mapped = prior.basis() * g_inv;
        let (n, k) = (sampling.ambient_dim(), sampling.dim());
        let mut both = DenseMatrix::zeros(n, 2 * k);
        both.columns_mut(0, k).copy_from(sampling.basis());
        both.columns_mut(k, k).copy_from(prior.basis());
        let (joint, _) = orthonormal_basis_with_spectrum(&both, ip, None)?;
        let s_coords = ip.gram(joint.basis(), sampling.basis());
        let a_coords = ip.gram(joint.basis(), &a_mapped);
        Ok(Self {
            sampling: sampling.clone(),
            joint,
            s_coords,
            a_coords,
        })
    }

    pub fn ip(&self) -> GridInnerProduct {
        self.sampling.ip()
    }

    pub fn ambient_dim(&self) -> usize {
        self.sampling.ambient_dim()
    }

    /// Orthonormal (Euclidean) basis of `range(B)` in joint coordinates.
    fn range_coords(&self, lambda: f64) -> Result<DenseMatrix> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::LambdaOutOfRange(lambda));
        }
        let c = &self.s_coords * (1.0 - lambda) + &self.a_coords * lambda;
        Ok(c.qr().q())
    }

    /// Weighted-orthonormal basis of `range(B)` on the grid.
    pub fn range_basis(&self, lambda: f64) -> Result<SubspaceBasis> {
        let y = self.range_coords(lambda)?;
        Ok(SubspaceBasis::from_orthonormal(
            self.joint.basis() * y,
            self.ip(),
            self.joint.tol_used(),
        ))
    }

    /// `(cos(B, S), sin(B, S), cos(B^perp, S), sin(B^perp, S))`.
    pub fn sampling_angles(&self, lambda: f64) -> Result<[f64; 4]> {
        let unit = GridInnerProduct::unit();
        let y = SubspaceBasis::from_orthonormal(self.range_coords(lambda)?, unit, 0.0);
        let s = SubspaceBasis::from_orthonormal(self.s_coords.clone(), unit, 0.0);
        let (cos_bs, sin_bs) = angle_cos_sin(SubspaceRef::Span(&y), SubspaceRef::Span(&s))?;
        // U^perp lies in B^perp and is orthogonal to S whenever it is nonzero.
        let (cos_bp, sin_bp) = if self.joint.dim() < self.ambient_dim() {
            (0.0, 1.0)
        } else {
            angle_cos_sin(SubspaceRef::Complement(&y), SubspaceRef::Span(&s))?
        };
        Ok([cos_bs, sin_bs, cos_bp, sin_bp])
    }

    /// `||P_{B^perp} x||`, split as `||P_{U^perp} x||^2 + ||P_{U - B} x||^2`
    /// so no large norms are subtracted.
    pub fn perp_residual_norm(&self, lambda: f64, x: &Signal) -> Result<f64> {
        if x.len() != self.ambient_dim() {
            return Err(Error::GridMismatch {
                expected: self.ambient_dim(),
                got: x.len(),
            });
        }
        let y = self.range_coords(lambda)?;
        let xu = self.joint.coords(x);
        let outside = self.ip().norm(&(x - self.joint.basis() * &xu));
        let inside = (&xu - &y * y.tr_mul(&xu)).norm();
        Ok(outside.hypot(inside))
    }
}

/// Dense `B = lambda P_{A S^perp} + (1 - lambda) P_S`, an oblique projector
/// along `S^perp`.
pub fn modified_subspace_b(s: &Frame, a: &Frame, lambda: f64) -> Result<Projector> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    s.same_grid(a)?;
    let (sb, ab) = (s.basis(), a.basis());
    check_direct_sum(ab, sb, "A/S")?;
    let matrix = oblique_matrix(ab, sb)? * lambda + sb.projector_matrix() * (1.0 - lambda);
    let range = orthonormal_basis(&(&matrix * sb.basis()), sb.ip(), None)?;
    Ok(Projector::from_parts(
        matrix,
        ProjectorKind::Oblique,
        range,
        complement_or_empty(sb)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{angle_cos, orthogonal_complement};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(rng: &mut ChaCha8Rng, n: usize, k: usize, ip: GridInnerProduct) -> Frame {
        Frame::new(DenseMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0)), ip).unwrap()
    }

    #[test]
    fn endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ip = GridInnerProduct::new(0.5).unwrap();
        let s = random_frame(&mut rng, 6, 2, ip);
        let a = random_frame(&mut rng, 6, 2, ip);
        let b0 = modified_subspace_b(&s, &a, 0.0).unwrap();
        assert!((b0.matrix() - s.basis().projector_matrix()).norm() < 1e-12);
        let b1 = modified_subspace_b(&s, &a, 1.0).unwrap();
        let oracle = oblique_matrix(a.basis(), s.basis()).unwrap();
        assert!((b1.matrix() - oracle).norm() < 1e-12);
    }

    #[test]
    fn idempotent_and_alternative_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ip = GridInnerProduct::unit();
        let s = random_frame(&mut rng, 8, 3, ip);
        let a = random_frame(&mut rng, 8, 3, ip);
        let b = modified_subspace_b(&s, &a, 0.3).unwrap();
        assert!(b.idempotence_defect() < 1e-10);
        let p_s = s.basis().projector_matrix();
        let p_sperp = DenseMatrix::identity(8, 8) - &p_s;
        let alt = &p_s + p_sperp * oblique_matrix(a.basis(), s.basis()).unwrap() * 0.3;
        assert!((b.matrix() - alt).norm() < 1e-10);
    }

    #[test]
    fn thin_family_matches_dense_projector() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ip = GridInnerProduct::new(0.2).unwrap();
        for (n, k) in [(9, 3), (6, 3), (7, 4)] {
            let s = random_frame(&mut rng, n, k, ip);
            let a = random_frame(&mut rng, n, k, ip);
            let fam = ModifiedSubspace::new(s.basis(), a.basis()).unwrap();
            for lambda in [0.0, 0.25, 0.8, 1.0] {
                let b = modified_subspace_b(&s, &a, lambda).unwrap();
                let thin = fam.range_basis(lambda).unwrap();
                assert!((thin.projector_matrix() - b.range_basis().projector_matrix()).norm() < 1e-9);

                let x = Signal::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
                let range = b.range_basis();
                assert!(
                    (fam.perp_residual_norm(lambda, &x).unwrap() - range.residual_norm(&x)).abs() < 1e-10
                );

                let [cos_bs, _, cos_bp, sin_bp] = fam.sampling_angles(lambda).unwrap();
                assert!((cos_bs - angle_cos(range, s.basis()).unwrap()).abs() < 1e-10);
                let b_perp = orthogonal_complement(range, n).unwrap();
                let (c, si) =
                    angle_cos_sin(SubspaceRef::Span(&b_perp), SubspaceRef::Span(s.basis())).unwrap();
                assert!((cos_bp - c).abs() < 1e-9 && (sin_bp - si).abs() < 1e-9);
            }
        }
    }
}
