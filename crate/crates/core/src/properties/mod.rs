//! Randomized invariant suites over small finite-dimensional instances.
//!
//! Each property draws fresh random instances per trial and records the
//! worst ratio of observed violation to allowed tolerance. A ratio at most 1
//! passes. Suites are deterministic for a given seed.

mod instance;

pub use instance::{
    gaussian_matrix, gaussian_vector, random_frame_matrix, random_instance, Instance, InstanceShape,
};

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    b_angle_report, constrained_scalars, convexity_check_schemes, error_report, regret_bounds,
    subspace_input_bounds, BoundContext, SlackPolicy,
};
use crate::error::Result;
use crate::gsrp::{
    beta_constraint_level, build_consistent, build_orthogonal, build_regret, build_subspace,
    combine_constrained, constraint_value, modified_subspace_b, reconstruct, sample, SchemeTag,
};
use crate::numerics::{
    angle_cos_sin, oblique_from_bases, orthogonal_complement, orthogonal_projector, orthonormal_basis,
    DenseMatrix, Projector, SubspaceBasis, SubspaceRef,
};

/// Result of one property suite.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Largest violation / tolerance seen; at most 1 on success.
    pub worst_ratio: f64,
    pub first_failure: Option<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.trials > 0
    }
}

/// Per-suite accumulator. A trial fails if any of its checks fails.
#[derive(Debug, Default)]
pub struct Tally {
    trials: usize,
    failures: usize,
    worst: f64,
    first: Option<String>,
    trial_failed: bool,
}

impl Tally {
    /// Records `violation <= tolerance`.
    pub fn check(&mut self, violation: f64, tolerance: f64, what: impl FnOnce() -> String) {
        let ratio = if violation <= 0.0 {
            0.0
        } else if tolerance > 0.0 {
            violation / tolerance
        } else {
            f64::INFINITY
        };
        let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
        self.worst = self.worst.max(ratio);
        if ratio > 1.0 {
            self.fail(format!(
                "{} (violation {violation:.3e}, tolerance {tolerance:.3e})",
                what()
            ));
        }
    }

    /// Records a boolean outcome.
    pub fn ensure(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.worst = f64::INFINITY;
            self.fail(what());
        }
    }

    fn fail(&mut self, msg: String) {
        self.trial_failed = true;
        if self.first.is_none() {
            self.first = Some(msg);
        }
    }

    fn close_trial(&mut self, result: Result<()>) {
        if let Err(e) = result {
            self.fail(format!("error: {e}"));
        }
        self.trials += 1;
        if self.trial_failed {
            self.failures += 1;
        }
        self.trial_failed = false;
    }
}

type Body = fn(&mut ChaCha8Rng, &mut Tally) -> Result<()>;

/// A named randomized invariant.
#[derive(Clone, Copy)]
pub struct Property {
    pub name: &'static str,
    pub description: &'static str,
    body: Body,
}

impl std::fmt::Debug for Property {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Property").field("name", &self.name).finish()
    }
}

impl Property {
    pub fn run(&self, trials: usize, seed: u64) -> PropertyOutcome {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv(self.name));
        let mut tally = Tally::default();
        for _ in 0..trials {
            let r = (self.body)(&mut rng, &mut tally);
            tally.close_trial(r);
        }
        PropertyOutcome {
            name: self.name,
            trials: tally.trials,
            failures: tally.failures,
            worst_ratio: tally.worst,
            first_failure: tally.first,
            elapsed: start.elapsed(),
        }
    }
}

/// Stable per-name seed offset.
fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn scale(m: &DenseMatrix) -> f64 {
    m.norm().max(1.0)
}

macro_rules! property {
    ($name:literal, $desc:literal, $body:expr) => {
        Property {
            name: $name,
            description: $desc,
            body: $body,
        }
    };
}

/// Every suite, in a fixed order.
pub fn all_properties() -> Vec<Property> {
    vec![
        property!(
            "projector_idempotence",
            "P^2 = P, range fixed, nullspace annihilated",
            projector_idempotence
        ),
        property!(
            "shared_nullspace_projectors",
            "projectors with one nullspace: P1 P2 = P1 and affine combinations stay idempotent",
            shared_nullspace
        ),
        property!(
            "complementary_projectors",
            "P_{V1 V2} + P_{V2 V1} = I",
            complementarity
        ),
        property!(
            "angle_identities",
            "cos^2 + sin^2 = 1 and cos(V1, V2) = cos(V2^perp, V1^perp)",
            angle_identities
        ),
        property!(
            "angle_norm_sandwiches",
            "orthogonal and oblique projection norms bracketed by angles",
            angle_sandwiches
        ),
        property!(
            "error_split",
            "||E x||^2 = ||P_W^perp x||^2 + ||R x||^2 and T x in W",
            error_split
        ),
        property!(
            "regret_bound_rows",
            "consistent, subspace, regret and constrained regret bounds",
            regret_rows
        ),
        property!(
            "prior_input_rows",
            "regret and absolute-error bounds for x in A",
            prior_input_rows
        ),
        property!(
            "convexity",
            "constrained errors below the convex combination of subspace and regret errors",
            convexity
        ),
        property!(
            "constraint_equality",
            "constraint value equals lambda * beta(c)",
            constraint_equality
        ),
        property!(
            "modified_subspace_projector",
            "B idempotent, B = P_S + lambda P_S^perp P_{A S^perp}, B S^perp = 0",
            modified_projector
        ),
        property!(
            "modified_subspace_angles",
            "bounds on cos^2(B, S), sin^2(B^perp, S) and cos(B, S) >= cos(A, S)",
            modified_angles
        ),
        property!(
            "safe_lambda_caps",
            "lambda = cos(A, S) gives ||R x|| <= sqrt 2 ||x|| and ||E x|| <= sqrt 3 ||x||",
            safe_lambda_caps
        ),
        property!(
            "prior_regret_linearity",
            "||R_l x|| = (1 - l) ||P_W P_S^perp x|| for x in A",
            prior_linearity
        ),
        property!("sample_consistency", "S^* T_con x = S^* x", sample_consistency),
        property!(
            "regret_cap",
            "||R_reg x|| <= ||x|| and ||E_reg x|| <= sqrt 2 ||x||",
            regret_cap
        ),
        property!("bound_scalars_ordered", "alpha_l <= beta_l", scalars_ordered),
    ]
}

/// Q-form versus projector-form operators for every scheme.
pub fn oracle_equivalence() -> Property {
    property!(
        "oracle_equivalence",
        "W Q S^* equals the projector form of each scheme",
        oracle_body
    )
}

pub fn find_property(name: &str) -> Option<Property> {
    all_properties()
        .into_iter()
        .chain(std::iter::once(oracle_equivalence()))
        .find(|p| p.name == name)
}

/// Runs every suite with `trials` trials each, in parallel across suites.
pub fn run_all(trials: usize, seed: u64) -> Vec<PropertyOutcome> {
    all_properties().par_iter().map(|p| p.run(trials, seed)).collect()
}

fn check_projector(t: &mut Tally, p: &Projector, label: &str) {
    let tol = 1e-10 * scale(p.matrix());
    t.check(p.idempotence_defect(), tol, || format!("{label}: P^2 != P"));
    let m = p.matrix();
    let r = p.range_basis().basis();
    t.check((m * r - r).norm(), tol, || format!("{label}: range not fixed"));
    let nb = p.nullspace_basis().basis();
    if nb.ncols() > 0 {
        t.check((m * nb).norm(), tol, || {
            format!("{label}: nullspace not annihilated")
        });
    }
}

fn projector_idempotence(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    let orth = orthogonal_projector(inst.s.basis())?;
    check_projector(t, &orth, "orthogonal");
    t.check(orth.self_adjoint_defect(), 1e-10 * scale(orth.matrix()), || {
        "orthogonal projector not self-adjoint".into()
    });
    check_projector(t, &oblique_from_bases(inst.a.basis(), inst.s.basis())?, "oblique");
    let lambda = rng.random_range(0.0..=1.0);
    check_projector(t, &modified_subspace_b(&inst.s, &inst.a, lambda)?, "modified");
    Ok(())
}

fn shared_nullspace(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(
        rng,
        InstanceShape {
            square_w: true,
            ..Default::default()
        },
    );
    let p1 = oblique_from_bases(inst.a.basis(), inst.s.basis())?;
    let p2 = oblique_from_bases(inst.w.basis(), inst.s.basis())?;
    let (m1, m2) = (p1.matrix(), p2.matrix());
    let tol = 1e-9 * scale(m1) * scale(m2);
    t.check((m1 * m2 - m1).norm(), tol, || "P1 P2 != P1".into());
    t.check((m2 * m1 - m2).norm(), tol, || "P2 P1 != P2".into());
    for l in [-0.5, 0.0, 0.3, 1.0, 1.7] {
        let c = m1 * l + m2 * (1.0 - l);
        let tol_c = 1e-9 * scale(&c) * scale(&c);
        t.check((&c * &c - &c).norm(), tol_c, || {
            format!("combination {l} not idempotent")
        });
    }
    Ok(())
}

fn complement(v: &SubspaceBasis) -> Result<SubspaceBasis> {
    orthogonal_complement(v, v.ambient_dim())
}

fn complementarity(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    // V1 = A, V2 = S^perp: P_{A S^perp} + P_{S^perp A} = I.
    let s_perp = complement(inst.s.basis())?;
    let a_perp = complement(inst.a.basis())?;
    let p12 = oblique_from_bases(inst.a.basis(), inst.s.basis())?;
    let p21 = oblique_from_bases(&s_perp, &a_perp)?;
    let sum = p12.matrix() + p21.matrix();
    let tol = 1e-9 * scale(p12.matrix());
    t.check((sum - DenseMatrix::identity(inst.n, inst.n)).norm(), tol, || {
        "P_{V1 V2} + P_{V2 V1} != I".into()
    });
    Ok(())
}

fn random_subspace(rng: &mut ChaCha8Rng, inst: &Instance) -> Result<SubspaceBasis> {
    let k = rng.random_range(1..inst.n);
    orthonormal_basis(&gaussian_matrix(rng, inst.n, k), inst.ip, None)
}

fn angle_identities(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    let v1 = random_subspace(rng, &inst)?;
    let v2 = random_subspace(rng, &inst)?;
    let (c, s) = angle_cos_sin(SubspaceRef::Span(&v1), SubspaceRef::Span(&v2))?;
    t.check((c * c + s * s - 1.0).abs(), 1e-10, || {
        format!("cos^2 + sin^2 = {}", c * c + s * s)
    });
    let (cc, _) = angle_cos_sin(
        SubspaceRef::Span(&complement(&v2)?),
        SubspaceRef::Span(&complement(&v1)?),
    )?;
    t.check((c - cc).abs(), 1e-9, || {
        format!("cos(V1, V2) = {c} but cos(V2^perp, V1^perp) = {cc}")
    });
    Ok(())
}

fn angle_sandwiches(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    let v1 = random_subspace(rng, &inst)?;
    let v2 = random_subspace(rng, &inst)?;
    let ip = inst.ip;
    let x = v1.basis() * gaussian_vector(rng, v1.dim());
    let xn = ip.norm(&x);
    let (c12, _) = angle_cos_sin(SubspaceRef::Span(&v1), SubspaceRef::Span(&v2))?;
    let (_, s12p) = angle_cos_sin(SubspaceRef::Span(&v1), SubspaceRef::Complement(&v2))?;
    let pn = ip.norm(&v2.project(&x));
    let tol = 1e-9 * xn;
    t.check(c12 * xn - pn, tol, || "cos(V1, V2) ||x|| > ||P_V2 x||".into());
    t.check(pn - s12p * xn, tol, || {
        "||P_V2 x|| > sin(V1, V2^perp) ||x||".into()
    });

    // Oblique projection onto A along S^perp.
    let (a, s) = (inst.a.basis(), inst.s.basis());
    let p = oblique_from_bases(a, s)?;
    let y = inst.random_signal(rng);
    let on = ip.norm(&p.apply(&y)?);
    let ps = ip.norm(&s.project(&y));
    let (c_as, _) = angle_cos_sin(SubspaceRef::Span(a), SubspaceRef::Span(s))?;
    let (_, s_a_sperp) = angle_cos_sin(SubspaceRef::Span(a), SubspaceRef::Complement(s))?;
    let tol = 1e-9 * (on + ps);
    t.check(ps / s_a_sperp - on, tol, || "oblique lower bound".into());
    t.check(on - ps / c_as, tol, || "oblique upper bound".into());
    Ok(())
}

fn error_split(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(
        rng,
        InstanceShape {
            square_w: true,
            ..Default::default()
        },
    );
    let x = inst.random_signal(rng);
    let lambda = rng.random_range(0.0..=1.0);
    let sub = build_subspace(&inst.s, &inst.w, &inst.a)?;
    let reg = build_regret(&inst.s, &inst.w)?;
    let schemes = [
        build_orthogonal(&inst.w, Some(&inst.s))?,
        build_consistent(&inst.s, &inst.w)?,
        combine_constrained(&sub, &reg, lambda)?,
        sub,
        reg,
    ];
    for scheme in &schemes {
        let r = error_report(scheme, &x)?;
        t.check(r.pythagorean_defect(), 1e-8, || {
            format!("{} error split", scheme.tag())
        });
        let tx = reconstruct(scheme, &x)?;
        let outside = inst.w.basis().residual_norm(&tx);
        t.check(
            outside,
            1e-9 * inst.ip.norm(&tx).max(r.signal_norm * 1e-3),
            || format!("{} reconstruction leaves W", scheme.tag()),
        );
    }
    Ok(())
}

fn regret_rows(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let square = rng.random_bool(0.5);
    let inst = random_instance(
        rng,
        InstanceShape {
            square_w: square,
            ..Default::default()
        },
    );
    let ctx = BoundContext::new(&inst.s, &inst.w, &inst.a)?;
    let lambda = rng.random_range(0.0..=1.0);
    let angles = ctx.angle_set(lambda)?;
    let x = inst.random_signal(rng);
    let norms = ctx.residuals(&x, lambda)?;
    let policy = ctx.slack();
    let sub = build_subspace(&inst.s, &inst.w, &inst.a)?;
    let reg = build_regret(&inst.s, &inst.w)?;
    let mut schemes = vec![combine_constrained(&sub, &reg, lambda)?, sub, reg];
    if square {
        schemes.push(build_consistent(&inst.s, &inst.w)?);
    }
    for scheme in &schemes {
        let measured = error_report(scheme, &x)?.regret_error;
        let b = regret_bounds(scheme.tag(), &angles, &norms, measured, policy)?;
        t.check(-b.slack_lower.min(b.slack_upper), b.tolerance, || {
            format!(
                "{} row: {:.6e} <= {:.6e} <= {:.6e}",
                scheme.tag(),
                b.lower,
                b.measured,
                b.upper
            )
        });
    }
    Ok(())
}

fn prior_input_rows(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    let ctx = BoundContext::new(&inst.s, &inst.w, &inst.a)?;
    let lambda = rng.random_range(0.0..=1.0);
    let angles = ctx.angle_set(lambda)?;
    let x = inst.random_prior_signal(rng);
    let scheme = build_constrained_from(&inst, lambda)?;
    let rep = error_report(&scheme, &x)?;
    let b = subspace_input_bounds(&angles, inst.a.basis(), &x, &rep, ctx.slack())?;
    for (label, r) in [("regret", b.regret), ("absolute", b.absolute)] {
        t.check(-r.slack_lower.min(r.slack_upper), r.tolerance, || {
            format!(
                "{label}: {:.6e} <= {:.6e} <= {:.6e}",
                r.lower, r.measured, r.upper
            )
        });
    }
    Ok(())
}

fn build_constrained_from(inst: &Instance, lambda: f64) -> Result<crate::gsrp::GsrpScheme> {
    let sub = build_subspace(&inst.s, &inst.w, &inst.a)?;
    let reg = build_regret(&inst.s, &inst.w)?;
    combine_constrained(&sub, &reg, lambda)
}

fn convexity(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    let lambda = rng.random_range(0.0..=1.0);
    let x = inst.random_signal(rng);
    let sub = build_subspace(&inst.s, &inst.w, &inst.a)?;
    let reg = build_regret(&inst.s, &inst.w)?;
    let c = convexity_check_schemes(&sub, &reg, lambda, &x, SlackPolicy { relative: 1e-9 })?;
    let tol = 1e-9 * (c.error.rhs + inst.ip.norm(&x));
    t.check(c.error.lhs - c.error.rhs, tol, || {
        "absolute error above convex combination".into()
    });
    t.check(c.regret.lhs - c.regret.rhs, tol, || {
        "regret above convex combination".into()
    });
    Ok(())
}

fn constraint_equality(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    let lambda = rng.random_range(0.0..=1.0);
    let scheme = build_constrained_from(&inst, lambda)?;
    let c = sample(&inst.s, &inst.random_signal(rng))?;
    let beta = beta_constraint_level(&inst.s, &inst.w, &inst.a, &c)?;
    let value = constraint_value(&scheme, &c)?;
    let scale = beta.max(inst.ip.norm(&(inst.s.synthesis() * c.values())) * 1e-3);
    t.check((value - lambda * beta).abs(), 1e-9 * scale, || {
        format!("constraint {value:.6e} vs lambda beta {:.6e}", lambda * beta)
    });
    Ok(())
}

fn modified_projector(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    let lambda = rng.random_range(0.0..=1.0);
    let b = modified_subspace_b(&inst.s, &inst.a, lambda)?;
    let m = b.matrix();
    let tol = 1e-10 * scale(m);
    t.check(b.idempotence_defect(), tol, || "B^2 != B".into());
    let p_s = orthogonal_projector(inst.s.basis())?.into_matrix();
    let p_sperp = DenseMatrix::identity(inst.n, inst.n) - &p_s;
    let p_as = oblique_from_bases(inst.a.basis(), inst.s.basis())?.into_matrix();
    let alt = &p_s + p_sperp * p_as * lambda;
    t.check((m - alt).norm(), tol, || {
        "B differs from P_S + lambda P_S^perp P_{A S^perp}".into()
    });
    let s_perp = complement(inst.s.basis())?;
    t.check((m * s_perp.basis()).norm(), tol, || {
        "B does not vanish on S^perp".into()
    });
    Ok(())
}

fn modified_angles(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    let ctx = BoundContext::new(&inst.s, &inst.w, &inst.a)?;
    let lambda = rng.random_range(0..=10) as f64 / 10.0;
    let angles = ctx.angle_set(lambda)?;
    let policy = ctx.slack();
    let r = b_angle_report(&angles, policy);
    let tol = r.tolerance;
    t.check(
        (r.cos2_lower - r.cos2_bs).max(r.cos2_bs - r.cos2_upper),
        tol,
        || {
            format!(
                "cos^2(B, S) = {} outside [{}, {}]",
                r.cos2_bs, r.cos2_lower, r.cos2_upper
            )
        },
    );
    t.check(
        (r.sin2_lower - r.sin2_bperp_s).max(r.sin2_bperp_s - r.sin2_upper),
        tol,
        || {
            format!(
                "sin^2(B^perp, S) = {} outside [{}, {}]",
                r.sin2_bperp_s, r.sin2_lower, r.sin2_upper
            )
        },
    );
    t.check(r.cos2_as - r.cos2_bs, tol, || "cos(B, S) < cos(A, S)".into());
    t.check(angles.cos_as - angles.cos_bs, 1e-9, || "angle ordering".into());
    t.check(angles.commutativity_defect(), 1e-9, || {
        format!("cos(A, S) = {} but cos(S, A) = {}", angles.cos_as, angles.cos_sa)
    });
    t.check(angles.pythagorean_defect(), 1e-9, || {
        "angle set cos^2 + sin^2 != 1".into()
    });
    Ok(())
}

fn safe_lambda_caps(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    let ctx = BoundContext::new(&inst.s, &inst.w, &inst.a)?;
    let lambda = crate::bounds::safe_lambda(&ctx.angle_set(0.0)?);
    let scheme = build_constrained_from(&inst, lambda)?;
    let x = inst.random_signal(rng);
    let r = error_report(&scheme, &x)?;
    let xn = r.signal_norm;
    t.check(r.regret_error - 2f64.sqrt() * xn, 1e-9 * xn, || {
        "||R x|| > sqrt 2 ||x||".into()
    });
    t.check(r.absolute_error - 3f64.sqrt() * xn, 1e-9 * xn, || {
        "||E x|| > sqrt 3 ||x||".into()
    });
    Ok(())
}

fn prior_linearity(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    let x = inst.random_prior_signal(rng);
    let sub = build_subspace(&inst.s, &inst.w, &inst.a)?;
    let reg = build_regret(&inst.s, &inst.w)?;
    let w = inst.w.basis();
    let base = inst.ip.norm(&w.project(&inst.s.basis().residual(&x)));
    let xn = inst.ip.norm(&x);
    for i in 0..=10 {
        let lambda = i as f64 / 10.0;
        let measured = error_report(&combine_constrained(&sub, &reg, lambda)?, &x)?.regret_error;
        t.check((measured - (1.0 - lambda) * base).abs(), 1e-9 * xn, || {
            format!("lambda {lambda}: {measured:.6e} vs {:.6e}", (1.0 - lambda) * base)
        });
    }
    Ok(())
}

fn sample_consistency(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(
        rng,
        InstanceShape {
            square_w: true,
            ..Default::default()
        },
    );
    let con = build_consistent(&inst.s, &inst.w)?;
    let x = inst.random_signal(rng);
    let c = sample(&inst.s, &x)?;
    let c_rec = sample(&inst.s, &reconstruct(&con, &x)?)?;
    let tol = 1e-9 * scale(&con.operator_dense()) * (c.values().norm() + inst.ip.norm(&x));
    t.check((c_rec.values() - c.values()).norm(), tol, || {
        "S^* T x != S^* x".into()
    });
    Ok(())
}

fn regret_cap(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    let reg = build_regret(&inst.s, &inst.w)?;
    let x = inst.random_signal(rng);
    let r = error_report(&reg, &x)?;
    t.check(r.regret_error - r.signal_norm, 1e-9 * r.signal_norm, || {
        "||R_reg x|| > ||x||".into()
    });
    t.check(
        r.absolute_error - 2f64.sqrt() * r.signal_norm,
        1e-9 * r.signal_norm,
        || "||E_reg x|| > sqrt 2 ||x||".into(),
    );
    Ok(())
}

fn scalars_ordered(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(rng, InstanceShape::default());
    let ctx = BoundContext::new(&inst.s, &inst.w, &inst.a)?;
    let lambda = rng.random_range(0.0..=1.0);
    let (alpha, beta) = constrained_scalars(&ctx.angle_set(lambda)?, lambda);
    t.check(alpha - beta, 1e-9 * beta.max(1.0), || {
        format!("alpha {alpha} > beta {beta}")
    });
    Ok(())
}

fn oracle_body(rng: &mut ChaCha8Rng, t: &mut Tally) -> Result<()> {
    let inst = random_instance(
        rng,
        InstanceShape {
            square_w: true,
            ..Default::default()
        },
    );
    let lambda = rng.random_range(0.0..=1.0);
    let (s, w, a) = (&inst.s, &inst.w, &inst.a);
    let s_star = s.synthesis().transpose() * inst.ip.weight();
    let q_form = |q: &DenseMatrix| w.synthesis() * q * &s_star;
    let p_w = orthogonal_projector(w.basis())?.into_matrix();
    let p_s = orthogonal_projector(s.basis())?.into_matrix();
    let p_ws = oblique_from_bases(w.basis(), s.basis())?.into_matrix();
    let p_as = oblique_from_bases(a.basis(), s.basis())?.into_matrix();
    let b = modified_subspace_b(s, a, lambda)?.into_matrix();

    let sub = build_subspace(s, w, a)?;
    let reg = build_regret(s, w)?;
    let con = combine_constrained(&sub, &reg, lambda)?;
    let cases = [
        (build_consistent(s, w)?, p_ws),
        (sub, &p_w * p_as),
        (reg, &p_w * &p_s),
        (con, &p_w * b),
    ];
    for (scheme, oracle) in &cases {
        let q = scheme.correction().expect("realizable scheme");
        let tol = 1e-9 * scale(oracle);
        t.check((q_form(q) - oracle).norm(), tol, || {
            format!("{} Q-form differs", scheme.tag())
        });
        t.check((scheme.operator_dense() - oracle).norm(), tol, || {
            format!("{} stored operator differs", scheme.tag())
        });
    }

    let nested = random_instance(
        rng,
        InstanceShape {
            w_inside_s: true,
            ..Default::default()
        },
    );
    let orth = build_orthogonal(&nested.w, Some(&nested.s))?;
    t.ensure(
        orth.is_realizable() && orth.tag() == SchemeTag::Orthogonal,
        || "orthogonal scheme with W in S not realizable".into(),
    );
    if let Some(q) = orth.correction() {
        let st = nested.s.synthesis().transpose() * nested.ip.weight();
        let realized = nested.w.synthesis() * q * st;
        let p = orthogonal_projector(nested.w.basis())?.into_matrix();
        t.check((realized - &p).norm(), 1e-9 * scale(&p), || {
            "orthogonal Q-form differs".into()
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_briefly() {
        let mut all = all_properties();
        all.push(oracle_equivalence());
        for p in all {
            let o = p.run(40, 17);
            assert!(o.passed(), "{}: {:?}", o.name, o.first_failure);
        }
    }

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = all_properties().iter().map(|p| p.name).collect();
        names.sort();
        let len = names.len();
        names.dedup();
        assert_eq!(names.len(), len);
    }
}
