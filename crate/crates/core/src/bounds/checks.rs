use serde::Serialize;

use super::{error_report, AngleSet, BoundContext, SlackPolicy};
use crate::error::Result;
use crate::gsrp::{build_regret, build_subspace, combine_constrained, Frame, GsrpScheme};
use crate::numerics::Signal;

/// Two-sided bounds on `cos^2(B, S)` and `sin^2(B^perp, S)`, plus the
/// ordering `cos^2(B, S) >= cos^2(A, S)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BAngleReport {
    pub lambda: f64,
    pub cos2_bs: f64,
    pub cos2_lower: f64,
    pub cos2_upper: f64,
    pub sin2_bperp_s: f64,
    pub sin2_lower: f64,
    pub sin2_upper: f64,
    pub cos2_as: f64,
    pub tolerance: f64,
}

impl BAngleReport {
    pub fn cos_holds(&self) -> bool {
        within(self.cos2_lower, self.cos2_bs, self.cos2_upper, self.tolerance)
    }

    pub fn sin_holds(&self) -> bool {
        within(
            self.sin2_lower,
            self.sin2_bperp_s,
            self.sin2_upper,
            self.tolerance,
        )
    }

    pub fn ordering_holds(&self) -> bool {
        self.cos2_bs >= self.cos2_as - self.tolerance
    }

    pub fn all_hold(&self) -> bool {
        self.cos_holds() && self.sin_holds() && self.ordering_holds()
    }
}

fn within(lo: f64, v: f64, hi: f64, tol: f64) -> bool {
    v >= lo - tol && v <= hi + tol
}

/// `1 / (1 + lambda^2 (num / den)^2)`, with `den = 0` sending it to zero.
fn damped(lambda: f64, num: f64, den: f64) -> f64 {
    if lambda == 0.0 || num == 0.0 {
        1.0
    } else if den == 0.0 {
        0.0
    } else {
        let r = lambda * num / den;
        1.0 / (1.0 + r * r)
    }
}

/// Evaluates the modified-subspace angle inequalities on a computed set.
pub fn b_angle_report(angles: &AngleSet, policy: SlackPolicy) -> BAngleReport {
    let a = angles;
    let l = a.lambda;
    BAngleReport {
        lambda: l,
        cos2_bs: a.cos_bs * a.cos_bs,
        cos2_lower: damped(l, a.sin_as, a.cos_as),
        cos2_upper: damped(l, a.cos_a_sperp, a.sin_a_sperp),
        sin2_bperp_s: a.sin_bperp_s * a.sin_bperp_s,
        sin2_lower: damped(l, a.sin_as, a.cos_as),
        sin2_upper: damped(l, a.cos_aperp_s, a.sin_aperp_s),
        cos2_as: a.cos_as * a.cos_as,
        tolerance: policy.relative,
    }
}

/// As [`b_angle_report`], computing the angles of `B` from the frames. The
/// reconstruction frame plays no role, so `S` stands in for it.
pub fn b_angle_inequalities(s: &Frame, a: &Frame, lambda: f64) -> Result<BAngleReport> {
    let ctx = BoundContext::new(s, s, a)?;
    Ok(b_angle_report(&ctx.angle_set(lambda)?, ctx.slack()))
}

/// `lhs <= rhs` for one error kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityPair {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl ConvexityPair {
    fn new(lhs: f64, rhs: f64, scale: f64, policy: SlackPolicy) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs <= rhs + policy.allowance(rhs, scale),
        }
    }
}

/// `||E_l x|| <= l ||E_sub x|| + (1 - l) ||E_reg x||`, and the same for `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityCheck {
    pub error: ConvexityPair,
    pub regret: ConvexityPair,
}

impl ConvexityCheck {
    pub fn holds(&self) -> bool {
        self.error.holds && self.regret.holds
    }
}

/// Convexity check from already built subspace and regret schemes.
pub fn convexity_check_schemes(
    sub: &GsrpScheme,
    reg: &GsrpScheme,
    lambda: f64,
    x: &Signal,
    policy: SlackPolicy,
) -> Result<ConvexityCheck> {
    let con = combine_constrained(sub, reg, lambda)?;
    let e_sub = error_report(sub, x)?;
    let e_reg = error_report(reg, x)?;
    let e_con = error_report(&con, x)?;
    let m = 1.0 - lambda;
    Ok(ConvexityCheck {
        error: ConvexityPair::new(
            e_con.absolute_error,
            lambda * e_sub.absolute_error + m * e_reg.absolute_error,
            e_con.signal_norm,
            policy,
        ),
        regret: ConvexityPair::new(
            e_con.regret_error,
            lambda * e_sub.regret_error + m * e_reg.regret_error,
            e_con.signal_norm,
            policy,
        ),
    })
}

pub fn convexity_bound_check(
    s: &Frame,
    w: &Frame,
    a: &Frame,
    lambda: f64,
    x: &Signal,
) -> Result<ConvexityCheck> {
    let sub = build_subspace(s, w, a)?;
    let reg = build_regret(s, w)?;
    convexity_check_schemes(&sub, &reg, lambda, x, SlackPolicy::STANDARD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{DenseMatrix, GridInnerProduct};
    use nalgebra::{dmatrix, dvector};

    fn frame(m: DenseMatrix) -> Frame {
        Frame::new(m, GridInnerProduct::unit()).unwrap()
    }

    fn pair() -> (Frame, Frame) {
        let s = frame(dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0; 0.0, 0.0]);
        let a = frame(dmatrix![1.0, 0.0; 0.0, 1.0; 0.7, -0.4; 0.2, 0.9]);
        (s, a)
    }

    #[test]
    fn lambda_zero_bounds_are_one() {
        let (s, a) = pair();
        let r = b_angle_inequalities(&s, &a, 0.0).unwrap();
        assert!((r.cos2_bs - 1.0).abs() < 1e-14);
        assert_eq!((r.cos2_upper, r.sin2_upper), (1.0, 1.0));
        assert!(r.all_hold());
    }

    #[test]
    fn lambda_one_bounds_bracket_prior_angle() {
        let (s, a) = pair();
        let r = b_angle_inequalities(&s, &a, 1.0).unwrap();
        // B = P_{A S^perp} at lambda = 1, so cos(B, S) = cos(A, S) and the
        // lower bound cos^2 / (cos^2 + sin^2) collapses onto it.
        assert!((r.cos2_bs - r.cos2_as).abs() < 1e-12);
        assert!((r.cos2_lower - r.cos2_as).abs() < 1e-12);
        assert!(r.all_hold());
    }

    #[test]
    fn convexity_endpoints_are_equalities() {
        let (s, a) = pair();
        let w = frame(dmatrix![1.0; 0.5; 0.5; 0.2]);
        let x = dvector![0.3, -0.2, 1.0, 0.4];
        for lambda in [0.0, 1.0] {
            let c = convexity_bound_check(&s, &w, &a, lambda, &x).unwrap();
            assert!((c.error.lhs - c.error.rhs).abs() < 1e-14);
            assert!((c.regret.lhs - c.regret.rhs).abs() < 1e-14);
            assert!(c.holds());
        }
    }
}
