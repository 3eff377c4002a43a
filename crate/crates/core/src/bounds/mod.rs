//! Error measurement and the regret-error bounds of every sampling scheme.
//!
//! Bounds are evaluated from an [`AngleSet`] and the residual norms of the
//! input, then compared against the measured error with a [`SlackPolicy`].

mod checks;

pub use checks::{
    b_angle_inequalities, b_angle_report, convexity_bound_check, convexity_check_schemes, BAngleReport,
    ConvexityCheck, ConvexityPair,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gsrp::{reconstruct, Frame, GsrpScheme, ModifiedSubspace, SchemeTag};
use crate::numerics::{
    angle_cos_sin, direct_sum_ratio, ensure_finite_vec, Signal, SubspaceBasis, SubspaceRef,
};

/// Cosines and sines of every subspace pair the bound formulas reference.
/// Field `x_y` holds the angle from `X` to `Y`; `perp` marks a complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleSet {
    pub lambda: f64,
    pub cos_ws: f64,
    pub sin_ws: f64,
    pub cos_wperp_s: f64,
    pub sin_wperp_s: f64,
    pub cos_as: f64,
    pub sin_as: f64,
    pub cos_sa: f64,
    pub sin_sa: f64,
    pub cos_aperp_s: f64,
    pub sin_aperp_s: f64,
    pub cos_a_sperp: f64,
    pub sin_a_sperp: f64,
    pub cos_aw: f64,
    pub sin_aw: f64,
    pub cos_a_wperp: f64,
    pub sin_a_wperp: f64,
    pub cos_bs: f64,
    pub sin_bs: f64,
    pub cos_bperp_s: f64,
    pub sin_bperp_s: f64,
}

impl AngleSet {
    /// `(cos, sin)` pairs, labelled, for invariant checks and printing.
    pub fn pairs(&self) -> [(&'static str, f64, f64); 10] {
        [
            ("(W, S)", self.cos_ws, self.sin_ws),
            ("(W^perp, S)", self.cos_wperp_s, self.sin_wperp_s),
            ("(A, S)", self.cos_as, self.sin_as),
            ("(S, A)", self.cos_sa, self.sin_sa),
            ("(A^perp, S)", self.cos_aperp_s, self.sin_aperp_s),
            ("(A, S^perp)", self.cos_a_sperp, self.sin_a_sperp),
            ("(A, W)", self.cos_aw, self.sin_aw),
            ("(A, W^perp)", self.cos_a_wperp, self.sin_a_wperp),
            ("(B, S)", self.cos_bs, self.sin_bs),
            ("(B^perp, S)", self.cos_bperp_s, self.sin_bperp_s),
        ]
    }

    /// Largest `|cos^2 + sin^2 - 1|` over all stored pairs.
    pub fn pythagorean_defect(&self) -> f64 {
        self.pairs()
            .iter()
            .map(|(_, c, s)| (c * c + s * s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `|cos(A, S) - cos(S, A)|`, zero under the direct sum.
    pub fn commutativity_defect(&self) -> f64 {
        (self.cos_as - self.cos_sa)
            .abs()
            .max((self.sin_as - self.sin_sa).abs())
    }
}

fn pair(a: SubspaceRef<'_>, b: SubspaceRef<'_>) -> Result<(f64, f64)> {
    angle_cos_sin(a, b)
}

/// Everything about `(S, W, A)` that does not depend on the input or on
/// lambda, plus the family of modified subspaces.
#[derive(Debug, Clone)]
pub struct BoundContext {
    sampling: Frame,
    reconstruction: Frame,
    prior: Frame,
    family: ModifiedSubspace,
    base: AngleSet,
    direct_sum_ratio: f64,
}

impl BoundContext {
    pub fn new(s: &Frame, w: &Frame, a: &Frame) -> Result<Self> {
        use SubspaceRef::{Complement as C, Span as V};
        let (sb, wb, ab) = (s.basis(), w.basis(), a.basis());
        let family = ModifiedSubspace::new(sb, ab)?;
        let (cos_ws, sin_ws) = pair(V(wb), V(sb))?;
        let (cos_wperp_s, sin_wperp_s) = pair(C(wb), V(sb))?;
        let (cos_as, sin_as) = pair(V(ab), V(sb))?;
        let (cos_sa, sin_sa) = pair(V(sb), V(ab))?;
        let (cos_aperp_s, sin_aperp_s) = pair(C(ab), V(sb))?;
        let (cos_a_sperp, sin_a_sperp) = pair(V(ab), C(sb))?;
        let (cos_aw, sin_aw) = pair(V(ab), V(wb))?;
        let (cos_a_wperp, sin_a_wperp) = pair(V(ab), C(wb))?;
        let base = AngleSet {
            lambda: 0.0,
            cos_ws,
            sin_ws,
            cos_wperp_s,
            sin_wperp_s,
            cos_as,
            sin_as,
            cos_sa,
            sin_sa,
            cos_aperp_s,
            sin_aperp_s,
            cos_a_sperp,
            sin_a_sperp,
            cos_aw,
            sin_aw,
            cos_a_wperp,
            sin_a_wperp,
            cos_bs: 1.0,
            sin_bs: 0.0,
            cos_bperp_s: 0.0,
            sin_bperp_s: 1.0,
        };
        Ok(Self {
            sampling: s.clone(),
            reconstruction: w.clone(),
            prior: a.clone(),
            direct_sum_ratio: direct_sum_ratio(ab, sb)?,
            family,
            base,
        })
    }

    pub fn sampling(&self) -> &Frame {
        &self.sampling
    }

    pub fn reconstruction(&self) -> &Frame {
        &self.reconstruction
    }

    pub fn prior(&self) -> &Frame {
        &self.prior
    }

    pub fn family(&self) -> &ModifiedSubspace {
        &self.family
    }

    /// Conditioning of the `A (+) S^perp` direct sum.
    pub fn direct_sum_ratio(&self) -> f64 {
        self.direct_sum_ratio
    }

    pub fn slack(&self) -> SlackPolicy {
        SlackPolicy::for_conditioning(self.direct_sum_ratio)
    }

    pub fn angle_set(&self, lambda: f64) -> Result<AngleSet> {
        let [cos_bs, sin_bs, cos_bperp_s, sin_bperp_s] = self.family.sampling_angles(lambda)?;
        Ok(AngleSet {
            lambda,
            cos_bs,
            sin_bs,
            cos_bperp_s,
            sin_bperp_s,
            ..self.base
        })
    }

    /// Residual norms of `x` against every subspace a bound row uses.
    pub fn residuals(&self, x: &Signal, lambda: f64) -> Result<ResidualNorms> {
        let wb = self.reconstruction.basis();
        if x.len() != wb.ambient_dim() {
            return Err(Error::GridMismatch {
                expected: wb.ambient_dim(),
                got: x.len(),
            });
        }
        ensure_finite_vec(x)?;
        Ok(ResidualNorms {
            input: wb.ip().norm(x),
            w_perp: wb.residual_norm(x),
            a_perp: self.prior.basis().residual_norm(x),
            s_perp: self.sampling.basis().residual_norm(x),
            b_perp: self.family.perp_residual_norm(lambda, x)?,
        })
    }
}

/// Every angle of `(S, W, A)` with the modified subspace taken at `lambda`.
pub fn angle_set(s: &Frame, w: &Frame, a: &Frame, lambda: f64) -> Result<AngleSet> {
    BoundContext::new(s, w, a)?.angle_set(lambda)
}

/// `||x||` and `||P_{V^perp} x||` for `V` in `{W, A, S, B}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualNorms {
    pub input: f64,
    pub w_perp: f64,
    pub a_perp: f64,
    pub s_perp: f64,
    pub b_perp: f64,
}

/// Measured reconstruction errors of one input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    /// `||x||`
    pub signal_norm: f64,
    /// `||x - T x||`
    pub absolute_error: f64,
    /// `||P_W x - T x||`
    pub regret_error: f64,
    /// `||P_{W^perp} x||`
    pub optimal_error: f64,
    /// `20 log10(||x|| / ||x - T x||)`, infinite for exact reconstruction.
    pub snr_db: f64,
}

impl ErrorReport {
    /// `|abs^2 - opt^2 - reg^2| / max(abs^2, tiny)`.
    pub fn pythagorean_defect(&self) -> f64 {
        let a2 = self.absolute_error * self.absolute_error;
        let d = a2 - self.optimal_error.powi(2) - self.regret_error.powi(2);
        d.abs() / a2.max(f64::MIN_POSITIVE)
    }
}

pub fn snr_db(signal_norm: f64, error_norm: f64) -> f64 {
    if error_norm > 0.0 {
        20.0 * (signal_norm / error_norm).log10()
    } else {
        f64::INFINITY
    }
}

/// Error report for a reconstruction `tx` of `x` into `span(W)`.
pub fn error_report_from(w: &SubspaceBasis, x: &Signal, tx: &Signal) -> Result<ErrorReport> {
    if x.len() != w.ambient_dim() || tx.len() != x.len() {
        return Err(Error::GridMismatch {
            expected: w.ambient_dim(),
            got: if x.len() != w.ambient_dim() {
                x.len()
            } else {
                tx.len()
            },
        });
    }
    let ip = w.ip();
    let pwx = w.project(x);
    let absolute_error = ip.norm(&(x - tx));
    let signal_norm = ip.norm(x);
    Ok(ErrorReport {
        signal_norm,
        absolute_error,
        regret_error: ip.norm(&(&pwx - tx)),
        optimal_error: ip.norm(&(x - &pwx)),
        snr_db: snr_db(signal_norm, absolute_error),
    })
}

pub fn error_report(scheme: &GsrpScheme, x: &Signal) -> Result<ErrorReport> {
    let tx = reconstruct(scheme, x)?;
    error_report_from(scheme.reconstruction().basis(), x, &tx)
}

/// Tolerance for comparing a measurement with an exact inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlackPolicy {
    pub relative: f64,
}

impl SlackPolicy {
    pub const STANDARD: SlackPolicy = SlackPolicy { relative: 1e-8 };
    pub const DEGENERATE: SlackPolicy = SlackPolicy { relative: 1e-5 };

    /// Standard slack, widened when the direct-sum conditioning is below `1e-4`.
    pub fn for_conditioning(ratio: f64) -> Self {
        if ratio < 1e-4 {
            Self::DEGENERATE
        } else {
            Self::STANDARD
        }
    }

    /// Allowed violation for values of magnitude `magnitude` on an input of
    /// norm `scale`.
    pub fn allowance(&self, magnitude: f64, scale: f64) -> f64 {
        self.relative * (magnitude.abs() + scale.abs())
    }
}

/// A two-sided inequality `lower <= measured <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub lower: f64,
    pub upper: f64,
    pub measured: f64,
    /// `measured - lower`
    pub slack_lower: f64,
    /// `upper - measured`
    pub slack_upper: f64,
    pub tolerance: f64,
}

impl BoundReport {
    pub fn new(lower: f64, upper: f64, measured: f64, scale: f64, policy: SlackPolicy) -> Self {
        let finite_upper = if upper.is_finite() { upper } else { 0.0 };
        let magnitude = lower.abs().max(finite_upper.abs()).max(measured.abs());
        Self {
            lower,
            upper,
            measured,
            slack_lower: measured - lower,
            slack_upper: upper - measured,
            tolerance: policy.allowance(magnitude, scale),
        }
    }

    pub fn holds(&self) -> bool {
        self.slack_lower >= -self.tolerance && self.slack_upper >= -self.tolerance
    }
}

/// `num / den` with `0 / 0 = 0` and `x / 0 = inf`.
fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Scalars `(alpha, beta)` scaling the constrained row's bounds.
pub fn constrained_scalars(angles: &AngleSet, lambda: f64) -> (f64, f64) {
    let l2 = lambda * lambda;
    let cot_aperp = ratio(angles.cos_aperp_s, angles.sin_aperp_s);
    let tan_a = ratio(angles.sin_as, angles.cos_as);
    let alpha = (1.0 + l2 * cot_aperp * cot_aperp).sqrt() * angles.cos_wperp_s;
    let beta = (1.0 + l2 * tan_a * tan_a).sqrt() * angles.sin_ws;
    (alpha, beta)
}

/// `(lower, upper)` factors and the residual norm they multiply.
fn row(tag: SchemeTag, angles: &AngleSet, norms: &ResidualNorms) -> Result<(f64, f64, f64)> {
    let a = angles;
    Ok(match tag {
        SchemeTag::Orthogonal => return Err(Error::UnsupportedRow(tag.name().into())),
        SchemeTag::Consistent => (
            ratio(a.cos_wperp_s, a.sin_wperp_s),
            ratio(a.sin_ws, a.cos_ws),
            norms.w_perp,
        ),
        SchemeTag::Subspace => (
            ratio(a.cos_wperp_s, a.sin_aperp_s),
            ratio(a.sin_ws, a.cos_as),
            norms.a_perp,
        ),
        SchemeTag::Regret => (a.cos_wperp_s, a.sin_ws, norms.s_perp),
        SchemeTag::Constrained => {
            let (alpha, beta) = constrained_scalars(a, a.lambda);
            (alpha, beta, norms.b_perp)
        }
    })
}

fn scaled(factor: f64, norm: f64) -> f64 {
    if norm == 0.0 {
        0.0
    } else {
        factor * norm
    }
}

/// Regret-error bounds of the row for `tag`. The constrained row uses the
/// lambda stored in `angles`.
pub fn regret_bounds(
    tag: SchemeTag,
    angles: &AngleSet,
    norms: &ResidualNorms,
    measured: f64,
    policy: SlackPolicy,
) -> Result<BoundReport> {
    let (lo, hi, norm) = row(tag, angles, norms)?;
    Ok(BoundReport::new(
        scaled(lo, norm),
        scaled(hi, norm),
        measured,
        norms.input,
        policy,
    ))
}

/// Bounds for inputs inside the prior subspace `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InputBounds {
    pub regret: BoundReport,
    pub absolute: BoundReport,
}

/// Regret and absolute-error bounds of the constrained scheme for `x` in `A`.
/// `report` holds the measured errors of `x`.
pub fn subspace_input_bounds(
    angles: &AngleSet,
    prior: &SubspaceBasis,
    x: &Signal,
    report: &ErrorReport,
    policy: SlackPolicy,
) -> Result<InputBounds> {
    let sin_to_a = prior.sin_to(x);
    if sin_to_a > 1e-8 {
        return Err(Error::InputNotInSubspace(sin_to_a));
    }
    let a = angles;
    let m = 1.0 - a.lambda;
    let reg_lo = m * a.cos_a_sperp * a.cos_wperp_s;
    let reg_hi = m * a.sin_as * a.sin_ws;
    let abs_lo = (a.cos_a_wperp.powi(2) + reg_lo * reg_lo).sqrt();
    let abs_hi = (a.sin_aw.powi(2) + reg_hi * reg_hi).sqrt();
    let xn = prior.ip().norm(x);
    Ok(InputBounds {
        regret: BoundReport::new(
            scaled(reg_lo, xn),
            scaled(reg_hi, xn),
            report.regret_error,
            xn,
            policy,
        ),
        absolute: BoundReport::new(
            scaled(abs_lo, xn),
            scaled(abs_hi, xn),
            report.absolute_error,
            xn,
            policy,
        ),
    })
}

/// A mixing weight for which `||R x|| <= sqrt(2) ||x||` and
/// `||E x|| <= sqrt(3) ||x||` hold for every input.
pub fn safe_lambda(angles: &AngleSet) -> f64 {
    angles.cos_as
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsrp::{build_consistent, build_orthogonal, build_regret};
    use crate::numerics::{DenseMatrix, GridInnerProduct};
    use nalgebra::{dmatrix, dvector};

    fn frame(m: DenseMatrix) -> Frame {
        Frame::new(m, GridInnerProduct::unit()).unwrap()
    }

    fn triple() -> (Frame, Frame, Frame) {
        let s = frame(dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0; 0.0, 0.0]);
        let w = frame(dmatrix![1.0, 0.0; 0.2, 1.0; 0.5, 0.1; 0.0, 0.3]);
        let a = frame(dmatrix![1.0, 0.0; 0.0, 1.0; 0.7, -0.4; 0.2, 0.9]);
        (s, w, a)
    }

    #[test]
    fn orthogonal_scheme_has_zero_regret() {
        let (_, w, _) = triple();
        let t = build_orthogonal(&w, None).unwrap();
        let r = error_report(&t, &dvector![1.0, -2.0, 0.5, 3.0]).unwrap();
        assert_eq!(r.regret_error, 0.0);
        assert!(r.pythagorean_defect() < 1e-12);
    }

    #[test]
    fn consistent_exact_on_w() {
        let (s, w, _) = triple();
        let t = build_consistent(&s, &w).unwrap();
        let x = w.synthesis() * dvector![0.3, -1.1];
        let r = error_report(&t, &x).unwrap();
        assert!(r.absolute_error < 1e-14);
    }

    #[test]
    fn snr_definition() {
        assert!((snr_db(1.0, 0.1) - 20.0).abs() < 1e-12);
        assert_eq!(snr_db(1.0, 0.0), f64::INFINITY);
    }

    #[test]
    fn angle_set_with_prior_equal_sampling() {
        let (s, w, _) = triple();
        let set = angle_set(&s, &w, &s, 0.4).unwrap();
        assert!((set.cos_as - 1.0).abs() < 1e-14 && set.sin_as < 1e-14);
        assert!((set.cos_bs - 1.0).abs() < 1e-14);
        assert_eq!(safe_lambda(&set), set.cos_as);
    }

    #[test]
    fn lambda_zero_gives_b_equal_s() {
        let (s, w, a) = triple();
        let set = angle_set(&s, &w, &a, 0.0).unwrap();
        assert!((set.cos_bs - 1.0).abs() < 1e-14);
        assert!(set.pythagorean_defect() < 1e-12);
        assert!(set.commutativity_defect() < 1e-12);
    }

    #[test]
    fn regret_row_vanishes_on_s() {
        let (s, w, a) = triple();
        let ctx = BoundContext::new(&s, &w, &a).unwrap();
        let t = build_regret(&s, &w).unwrap();
        let x = dvector![0.4, -1.0, 0.0, 0.0];
        let rep = error_report(&t, &x).unwrap();
        let b = regret_bounds(
            SchemeTag::Regret,
            &ctx.angle_set(0.0).unwrap(),
            &ctx.residuals(&x, 0.0).unwrap(),
            rep.regret_error,
            SlackPolicy::STANDARD,
        )
        .unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        assert!(b.measured < 1e-13 && b.holds());
    }

    #[test]
    fn orthogonal_row_unsupported() {
        let (s, w, a) = triple();
        let ctx = BoundContext::new(&s, &w, &a).unwrap();
        let x = dvector![1.0, 0.0, 0.0, 0.0];
        let r = regret_bounds(
            SchemeTag::Orthogonal,
            &ctx.angle_set(0.0).unwrap(),
            &ctx.residuals(&x, 0.0).unwrap(),
            0.0,
            SlackPolicy::STANDARD,
        );
        assert!(matches!(r, Err(Error::UnsupportedRow(_))));
    }

    #[test]
    fn consistent_lower_bound_grows_as_w_perp_nears_s() {
        // W = span{(1, 0.1)} and S = span{(0.1, 1)}: sin(W^perp, S) = 0.1 / |.|.
        let w = frame(dmatrix![1.0; 0.1]);
        let s_vec = dvector![0.1, 1.0].normalize();
        let s = frame(DenseMatrix::from_column_slice(2, 1, s_vec.as_slice()));
        let ctx = BoundContext::new(&s, &w, &s).unwrap();
        let set = ctx.angle_set(0.0).unwrap();
        let t = build_consistent(&s, &w).unwrap();
        let x = dvector![-0.1, 1.0];
        let rep = error_report(&t, &x).unwrap();
        let b = regret_bounds(
            SchemeTag::Consistent,
            &set,
            &ctx.residuals(&x, 0.0).unwrap(),
            rep.regret_error,
            SlackPolicy::STANDARD,
        )
        .unwrap();
        assert!(set.sin_wperp_s < 0.2);
        assert!(b.lower > 4.0 * rep.optimal_error && b.holds());
    }

    #[test]
    fn input_outside_prior_rejected() {
        let (s, w, a) = triple();
        let set = angle_set(&s, &w, &a, 0.5).unwrap();
        let x = dvector![0.0, 0.0, 1.0, 0.0];
        let t = build_regret(&s, &w).unwrap();
        let rep = error_report(&t, &x).unwrap();
        let r = subspace_input_bounds(&set, a.basis(), &x, &rep, SlackPolicy::STANDARD);
        assert!(matches!(r, Err(Error::InputNotInSubspace(_))));
    }
}
