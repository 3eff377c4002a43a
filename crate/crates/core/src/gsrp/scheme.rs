use super::{Frame, SampleSequence};
use crate::error::{Error, Result};
use crate::numerics::projector::check_direct_sum;
use crate::numerics::{angle_sin, ensure_finite_vec, pseudoinverse, DenseMatrix, FactoredOperator, Signal};

/// `sin(W, S)` below this marks `W` as contained in `S`.
const INCLUSION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeTag {
    Orthogonal,
    Consistent,
    Subspace,
    Regret,
    Constrained,
}

impl SchemeTag {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeTag::Orthogonal => "orthogonal",
            SchemeTag::Consistent => "consistent",
            SchemeTag::Subspace => "subspace",
            SchemeTag::Regret => "regret",
            SchemeTag::Constrained => "constrained",
        }
    }
}

impl std::fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A built sampling-reconstruction chain `x -> W Q S^* x`.
///
/// The orthogonal reference stores `P_W` as its operator and carries a
/// correction filter only when `W` lies inside `S`.
#[derive(Debug, Clone)]
pub struct GsrpScheme {
    tag: SchemeTag,
    lambda: Option<f64>,
    correction: Option<DenseMatrix>,
    operator: FactoredOperator,
    realizable: bool,
    sampling: Option<Frame>,
    reconstruction: Frame,
    prior: Option<Frame>,
}

impl GsrpScheme {
    pub fn tag(&self) -> SchemeTag {
        self.tag
    }

    /// Mixing weight; present only for the constrained scheme.
    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    /// Correction filter `Q` mapping samples to synthesis coefficients.
    pub fn correction(&self) -> Option<&DenseMatrix> {
        self.correction.as_ref()
    }

    /// End-to-end operator `T`.
    pub fn operator(&self) -> &FactoredOperator {
        &self.operator
    }

    pub fn operator_dense(&self) -> DenseMatrix {
        self.operator.to_dense()
    }

    /// Whether `T = W Q S^*` for the stored correction.
    pub fn is_realizable(&self) -> bool {
        self.realizable
    }

    pub fn sampling(&self) -> Option<&Frame> {
        self.sampling.as_ref()
    }

    pub fn reconstruction(&self) -> &Frame {
        &self.reconstruction
    }

    pub fn prior(&self) -> Option<&Frame> {
        self.prior.as_ref()
    }

    /// Builds `W Q S^*` in factored form.
    fn realized(
        tag: SchemeTag,
        lambda: Option<f64>,
        s: &Frame,
        w: &Frame,
        a: Option<&Frame>,
        q: DenseMatrix,
    ) -> Result<Self> {
        let left = w.synthesis() * &q;
        let right = s.synthesis() * s.ip().weight();
        Ok(Self {
            tag,
            lambda,
            operator: FactoredOperator::outer(left, right)?,
            correction: Some(q),
            realizable: true,
            sampling: Some(s.clone()),
            reconstruction: w.clone(),
            prior: a.cloned(),
        })
    }
}

fn weighted_cross(a: &Frame, b: &Frame) -> DenseMatrix {
    a.ip().gram(a.basis().basis(), b.basis().basis())
}

/// `(W^*W)^+ W^* S (S^*S)^+ = C_W^+ <Q_W, Q_S> (C_S^+)^T`.
fn regret_correction(s: &Frame, w: &Frame) -> DenseMatrix {
    w.coeff_pinv() * weighted_cross(w, s) * s.coeff_pinv().transpose()
}

/// `(W^*W)^+ W^* A (S^*A)^+ = C_W^+ <Q_W, Q_A> <Q_S, Q_A>^{-1} (C_S^+)^T`.
fn subspace_correction(s: &Frame, w: &Frame, a: &Frame) -> Result<DenseMatrix> {
    let g_sa_inv = pseudoinverse(&weighted_cross(s, a), None)?;
    Ok(w.coeff_pinv() * weighted_cross(w, a) * g_sa_inv * s.coeff_pinv().transpose())
}

/// Reference scheme `T = P_W`. With a sampling frame whose span contains
/// `W`, the regret filter realizes it and is attached.
pub fn build_orthogonal(w: &Frame, s: Option<&Frame>) -> Result<GsrpScheme> {
    let q_w = w.basis().basis();
    let operator = FactoredOperator::outer(q_w.clone(), q_w * w.ip().weight())?;
    let mut correction = None;
    if let Some(s) = s {
        s.same_grid(w)?;
        if angle_sin(w.basis(), s.basis())? < INCLUSION_TOL {
            correction = Some(regret_correction(s, w));
        }
    }
    Ok(GsrpScheme {
        tag: SchemeTag::Orthogonal,
        lambda: None,
        realizable: correction.is_some(),
        correction,
        operator,
        sampling: s.cloned(),
        reconstruction: w.clone(),
        prior: None,
    })
}

/// `Q = (S^*W)^+`, giving `T = P_{W S^perp}`.
pub fn build_consistent(s: &Frame, w: &Frame) -> Result<GsrpScheme> {
    s.same_grid(w)?;
    check_direct_sum(w.basis(), s.basis(), "W/S")?;
    let g_sw_inv = pseudoinverse(&weighted_cross(s, w), None)?;
    let q = w.coeff_pinv() * g_sw_inv * s.coeff_pinv().transpose();
    GsrpScheme::realized(SchemeTag::Consistent, None, s, w, None, q)
}

/// `Q = (W^*W)^+ W^* A (S^*A)^+`, giving `T = P_W P_{A S^perp}`.
pub fn build_subspace(s: &Frame, w: &Frame, a: &Frame) -> Result<GsrpScheme> {
    s.same_grid(w)?;
    s.same_grid(a)?;
    check_direct_sum(a.basis(), s.basis(), "A/S")?;
    let q = subspace_correction(s, w, a)?;
    GsrpScheme::realized(SchemeTag::Subspace, None, s, w, Some(a), q)
}

/// `Q = (W^*W)^+ W^* S (S^*S)^+`, giving `T = P_W P_S`.
pub fn build_regret(s: &Frame, w: &Frame) -> Result<GsrpScheme> {
    s.same_grid(w)?;
    let q = regret_correction(s, w);
    GsrpScheme::realized(SchemeTag::Regret, None, s, w, None, q)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    Ok(())
}

/// `Q = lambda Q_sub + (1 - lambda) Q_reg`.
pub fn build_constrained(s: &Frame, w: &Frame, a: &Frame, lambda: f64) -> Result<GsrpScheme> {
    check_lambda(lambda)?;
    let sub = build_subspace(s, w, a)?;
    let reg = build_regret(s, w)?;
    combine_constrained(&sub, &reg, lambda)
}

/// Constrained scheme from already built subspace and regret schemes over
/// the same frames. The operator keeps both factor pairs, so it equals
/// `lambda T_sub + (1 - lambda) T_reg` term by term.
pub fn combine_constrained(sub: &GsrpScheme, reg: &GsrpScheme, lambda: f64) -> Result<GsrpScheme> {
    check_lambda(lambda)?;
    if sub.tag != SchemeTag::Subspace || reg.tag != SchemeTag::Regret {
        return Err(Error::InvalidArgument(format!(
            "expected subspace and regret schemes, got {} and {}",
            sub.tag, reg.tag
        )));
    }
    let (Some(q_sub), Some(q_reg)) = (&sub.correction, &reg.correction) else {
        return Err(Error::InvalidArgument("schemes lack correction filters".into()));
    };
    if q_sub.shape() != q_reg.shape() {
        return Err(Error::InvalidArgument(
            "subspace and regret schemes were built on different frames".into(),
        ));
    }
    let q = q_sub * lambda + q_reg * (1.0 - lambda);
    Ok(GsrpScheme {
        tag: SchemeTag::Constrained,
        lambda: Some(lambda),
        correction: Some(q),
        operator: sub.operator.combine(lambda, &reg.operator, 1.0 - lambda)?,
        realizable: true,
        sampling: sub.sampling.clone(),
        reconstruction: sub.reconstruction.clone(),
        prior: sub.prior.clone(),
    })
}

/// `x_r = T x`.
pub fn reconstruct(scheme: &GsrpScheme, x: &Signal) -> Result<Signal> {
    ensure_finite_vec(x)?;
    scheme.operator.apply(x)
}

/// `S (S^*S)^+ c` and `A (S^*A)^+ c`: the minimum-norm element of `S` and the
/// unique element of `A` consistent with the samples `c`.
fn sample_preimages(s: &Frame, a: &Frame, c: &SampleSequence) -> Result<(Signal, Signal)> {
    if c.len() != s.len() {
        return Err(Error::LengthMismatch {
            expected: s.len(),
            got: c.len(),
        });
    }
    let coords = s.coeff_pinv().tr_mul(c.values());
    let in_s = s.basis().basis() * &coords;
    let g_sa_inv = pseudoinverse(&weighted_cross(s, a), None)?;
    let in_a = a.basis().basis() * (g_sa_inv * coords);
    Ok((in_s, in_a))
}

/// `beta(c) = ||P_W S (S^*S)^+ c - P_W A (S^*A)^+ c||`.
pub fn beta_constraint_level(s: &Frame, w: &Frame, a: &Frame, c: &SampleSequence) -> Result<f64> {
    s.same_grid(w)?;
    s.same_grid(a)?;
    check_direct_sum(a.basis(), s.basis(), "A/S")?;
    let (in_s, in_a) = sample_preimages(s, a, c)?;
    Ok(w.basis().ip().norm(&w.basis().project(&(in_s - in_a))))
}

/// `||P_W S (S^*S)^+ c - W Q c||` for a constrained scheme; it equals
/// `lambda * beta(c)`.
pub fn constraint_value(scheme: &GsrpScheme, c: &SampleSequence) -> Result<f64> {
    let (Some(s), Some(a), Some(q)) = (scheme.sampling(), scheme.prior(), scheme.correction()) else {
        return Err(Error::InvalidArgument(
            "constraint value needs a scheme with sampling and prior frames".into(),
        ));
    };
    let w = scheme.reconstruction();
    let (in_s, _) = sample_preimages(s, a, c)?;
    let target = w.basis().project(&in_s);
    let rec = w.synthesis() * (q * c.values());
    Ok(w.ip().norm(&(target - rec)))
}
