//! Randomized invariants checked against closed-form oracles written out
//! directly with nalgebra's pivoted QR, independent of the library's
//! SVD-based factored formulas.

use gsrp_core::bounds::{angle_set, error_report, regret_bounds, BoundContext};
use gsrp_core::gsrp::{
    build_consistent, build_regret, build_subspace, combine_constrained, modified_subspace_b, reconstruct,
    sample, Frame, SchemeTag,
};
use gsrp_core::numerics::{
    angle_cos_sin, orthonormal_basis, pseudoinverse, DenseMatrix, GridInnerProduct, Signal, SubspaceRef,
};
use gsrp_core::properties::{gaussian_matrix, gaussian_vector, random_instance, Instance, InstanceShape};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Euclidean orthonormal basis of the column space from column-pivoted QR,
/// keeping columns whose pivot exceeds `1e-10` of the largest.
fn range_basis(m: &DenseMatrix) -> DenseMatrix {
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let top = r[(0, 0)].abs();
    let rank = (0..r.nrows().min(r.ncols()))
        .take_while(|&i| r[(i, i)].abs() > 1e-10 * top)
        .count();
    qr.q().columns(0, rank).into_owned()
}

/// `Q Q^T` for an orthonormal basis `Q` of the span; the grid weight cancels.
fn orth_oracle(v: &DenseMatrix) -> DenseMatrix {
    let q = range_basis(v);
    &q * q.transpose()
}

/// `Q_V (Q_S^T Q_V)^{-1} Q_S^T`, the projection onto span(V) along span(S)^perp.
fn oblique_oracle(v: &DenseMatrix, s: &DenseMatrix) -> DenseMatrix {
    let (qv, qs) = (range_basis(v), range_basis(s));
    let g = (qs.transpose() * &qv).try_inverse().expect("direct sum");
    qv * g * qs.transpose()
}

/// Smallest singular value of `Q2^T Q1` from pivoted-QR bases, or 0 when
/// `V1` has more dimensions than `V2`.
fn cos_oracle(v1: &DenseMatrix, v2: &DenseMatrix) -> f64 {
    let (q1, q2) = (range_basis(v1), range_basis(v2));
    if q1.ncols() > q2.ncols() {
        return 0.0;
    }
    let sv = (q2.transpose() * q1).singular_values();
    sv.min().min(1.0)
}

fn rel(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn instance(seed: u64, shape: InstanceShape) -> (Instance, ChaCha8Rng) {
    let mut r = rng(seed);
    (random_instance(&mut r, shape), r)
}

/// Full-rank Gaussian factors `(L, R)` of a `rows x cols` matrix of rank `rank`.
fn factors(seed: u64, rows: usize, cols: usize, rank: usize) -> (DenseMatrix, DenseMatrix) {
    let mut r = rng(seed);
    let left = gaussian_matrix(&mut r, rows, rank);
    (left, gaussian_matrix(&mut r, rank, cols))
}

fn low_rank(seed: u64, rows: usize, cols: usize, rank: usize) -> DenseMatrix {
    let (l, r) = factors(seed, rows, cols, rank);
    l * r
}

/// `F^+ = R^{-1} Q^T` for a full-column-rank `F = Q R`.
fn full_column_pinv(f: &DenseMatrix) -> DenseMatrix {
    let qr = f.clone().qr();
    let r_inv = qr.r().try_inverse().expect("full column rank");
    r_inv * qr.q().transpose()
}

fn condition(f: &DenseMatrix) -> f64 {
    let sv = f.singular_values();
    sv.max() / sv.min()
}

fn square() -> InstanceShape {
    InstanceShape {
        square_w: true,
        ..InstanceShape::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pseudoinverse_satisfies_penrose(seed: u64, rows in 1usize..10, cols in 1usize..10, rank_frac in 0.0f64..=1.0) {
        let rank = ((rows.min(cols) as f64 * rank_frac).round() as usize).max(1);
        let (l, r) = factors(seed, rows, cols, rank);
        let m = &l * &r;
        let p = pseudoinverse(&m, None).unwrap();
        let tol = 1e-8 * m.norm().max(1.0) * p.norm().max(1.0);
        prop_assert!((&m * &p * &m - &m).norm() <= tol);
        prop_assert!((&p * &m * &p - &p).norm() <= tol * p.norm().max(1.0));
        let mp = &m * &p;
        let pm = &p * &m;
        prop_assert!((&mp - mp.transpose()).norm() <= tol);
        prop_assert!((&pm - pm.transpose()).norm() <= tol);
        // (L R)^+ = R^+ L^+ when both factors have full rank
        let oracle = full_column_pinv(&r.transpose()).transpose() * full_column_pinv(&l);
        let kappa = condition(&l) * condition(&r);
        prop_assert!(rel(&p, &oracle) <= 1e-12 * kappa * kappa + 1e-12, "kappa {}", kappa);
    }

    #[test]
    fn basis_is_weighted_orthonormal_with_exact_rank(seed: u64, n in 4usize..12, step in 0.05f64..2.0) {
        let rank = 1 + (seed % (n as u64 - 1)) as usize;
        let m = low_rank(seed, n, rank + 2, rank);
        let ip = GridInnerProduct::new(step).unwrap();
        let b = orthonormal_basis(&m, ip, None).unwrap();
        prop_assert_eq!(b.dim(), rank);
        prop_assert!(b.orthonormality_defect() <= 1e-10);
        prop_assert!(rel(&b.projector_matrix(), &orth_oracle(&m)) <= 1e-9);
    }

    #[test]
    fn angles_match_the_qr_oracle(seed: u64) {
        let (inst, _) = instance(seed, InstanceShape::default());
        let (c, s) = angle_cos_sin(SubspaceRef::Span(inst.a.basis()), SubspaceRef::Span(inst.s.basis())).unwrap();
        let oracle = cos_oracle(inst.a.basis().basis(), inst.s.basis().basis());
        prop_assert!((c - oracle).abs() <= 1e-8, "{} vs {}", c, oracle);
        prop_assert!((c * c + s * s - 1.0).abs() <= 1e-10);
        prop_assert!((0.0..=1.0).contains(&c) && (0.0..=1.0).contains(&s));
    }

    #[test]
    fn scheme_operators_match_raw_formulas(seed: u64, lambda in 0.0f64..=1.0) {
        let (inst, _) = instance(seed, square());
        let (s, w, a) = (inst.s.synthesis(), inst.w.synthesis(), inst.a.synthesis());
        let p_w = orth_oracle(w);
        let sub = build_subspace(&inst.s, &inst.w, &inst.a).unwrap();
        let reg = build_regret(&inst.s, &inst.w).unwrap();
        let con = combine_constrained(&sub, &reg, lambda).unwrap();
        let sub_oracle = &p_w * oblique_oracle(a, s);
        let reg_oracle = &p_w * orth_oracle(s);
        prop_assert!(rel(&sub.operator_dense(), &sub_oracle) <= 1e-8);
        prop_assert!(rel(&reg.operator_dense(), &reg_oracle) <= 1e-8);
        let con_oracle = &sub_oracle * lambda + &reg_oracle * (1.0 - lambda);
        prop_assert!(rel(&con.operator_dense(), &con_oracle) <= 1e-8);
        let cons = build_consistent(&inst.s, &inst.w).unwrap();
        prop_assert!(rel(&cons.operator_dense(), &oblique_oracle(w, s)) <= 1e-8);
    }

    #[test]
    fn constrained_is_the_exact_convex_mix(seed: u64, lambda in 0.0f64..=1.0) {
        let (inst, mut r) = instance(seed, InstanceShape::default());
        let sub = build_subspace(&inst.s, &inst.w, &inst.a).unwrap();
        let reg = build_regret(&inst.s, &inst.w).unwrap();
        let con = combine_constrained(&sub, &reg, lambda).unwrap();
        let mix = sub.operator_dense() * lambda + reg.operator_dense() * (1.0 - lambda);
        prop_assert!((con.operator_dense() - &mix).norm() <= 1e-12 * mix.norm().max(1.0));
        let x = gaussian_vector(&mut r, inst.n);
        let tx = reconstruct(&con, &x).unwrap();
        prop_assert!(inst.w.basis().residual_norm(&tx) <= 1e-9 * inst.ip.norm(&x).max(1.0));
    }

    #[test]
    fn consistent_reconstruction_reproduces_samples(seed: u64) {
        let (inst, mut r) = instance(seed, square());
        let cons = build_consistent(&inst.s, &inst.w).unwrap();
        let x = gaussian_vector(&mut r, inst.n);
        let c = sample(&inst.s, &x).unwrap();
        let again = sample(&inst.s, &reconstruct(&cons, &x).unwrap()).unwrap();
        prop_assert!((again.values() - c.values()).norm() <= 1e-9 * c.values().norm().max(1.0));
    }

    #[test]
    fn regret_scheme_never_exceeds_the_input(seed: u64) {
        let (inst, mut r) = instance(seed, InstanceShape::default());
        let reg = build_regret(&inst.s, &inst.w).unwrap();
        let x = gaussian_vector(&mut r, inst.n);
        let rep = error_report(&reg, &x).unwrap();
        prop_assert!(rep.regret_error <= (1.0 + 1e-9) * inst.ip.norm(&x));
    }

    #[test]
    fn modified_subspace_leans_towards_sampling(seed: u64, lambda in 0.0f64..=1.0) {
        let (inst, _) = instance(seed, InstanceShape::default());
        let b = modified_subspace_b(&inst.s, &inst.a, lambda).unwrap();
        let m = b.matrix();
        prop_assert!((m * m - m).norm() <= 1e-10 * m.norm().max(1.0));
        let angles = angle_set(&inst.s, &inst.w, &inst.a, lambda).unwrap();
        prop_assert!(angles.cos_bs >= angles.cos_as - 1e-9);
        prop_assert!(angles.pythagorean_defect() <= 1e-9);
    }

    #[test]
    fn constrained_regret_is_sandwiched(seed: u64, lambda in 0.0f64..=1.0) {
        let (inst, mut r) = instance(seed, InstanceShape::default());
        let ctx = BoundContext::new(&inst.s, &inst.w, &inst.a).unwrap();
        let sub = build_subspace(&inst.s, &inst.w, &inst.a).unwrap();
        let reg = build_regret(&inst.s, &inst.w).unwrap();
        let con = combine_constrained(&sub, &reg, lambda).unwrap();
        let x = gaussian_vector(&mut r, inst.n);
        let rep = error_report(&con, &x).unwrap();
        let angles = ctx.angle_set(lambda).unwrap();
        let norms = ctx.residuals(&x, lambda).unwrap();
        let bound = regret_bounds(SchemeTag::Constrained, &angles, &norms, rep.regret_error, ctx.slack()).unwrap();
        prop_assert!(bound.holds(), "{:?}", bound);
    }
}

#[test]
fn frames_with_redundant_columns_span_the_same_space() {
    let ip = GridInnerProduct::new(0.25).unwrap();
    let base = low_rank(7, 8, 3, 3);
    let mut redundant = DenseMatrix::zeros(8, 5);
    redundant.columns_mut(0, 3).copy_from(&base);
    redundant.set_column(3, &(base.column(0) + base.column(2)));
    redundant.set_column(4, &(base.column(1) * 2.0));
    let f = Frame::new(redundant, ip).unwrap();
    let g = Frame::new(base, ip).unwrap();
    assert_eq!(f.rank(), 3);
    assert!((f.basis().projector_matrix() - g.basis().projector_matrix()).norm() < 1e-10);
    let x = Signal::from_fn(8, |i, _| (i as f64).cos());
    assert!((f.basis().project(&x) - g.basis().project(&x)).norm() < 1e-10);
}
