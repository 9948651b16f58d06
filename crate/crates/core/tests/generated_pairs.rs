//! Cross-module checks on generated pairs with known block structure.

use num_complex::Complex64;

use wwg_core::conformance::{generate_pair, GeneratorSpec, Plant};
use wwg_core::ginverse::{characterization_check, commutation_analysis, weighted_weak_group, Characterization};
use wwg_core::numeric::invert;
use wwg_core::relations::{relation_block_analysis, wwg_below, Side};
use wwg_core::spectral::{drazin, index, series_tu, w_drazin};
use wwg_core::{ComplexMatrix, NumericContext};

fn ctx() -> NumericContext {
    NumericContext::default()
}

#[test]
fn index_is_bounded_by_the_nilpotent_size() {
    let spec = GeneratorSpec::new(2, 2, 2);
    let gt = generate_pair(&spec, 42).unwrap();
    assert_eq!(gt.a.shape(), (4, 4));
    let k = index(&(&gt.a * &gt.w), &ctx()).unwrap();
    assert!(k.index <= 3, "{k:?}");
    assert_eq!(k.stable_rank, 2);
}

#[test]
fn without_nilpotent_part_the_inverses_coincide() {
    let gt = generate_pair(&GeneratorSpec::new(3, 0, 0), 5).unwrap();
    let ctx = ctx();
    let x = weighted_weak_group(&gt.a, &gt.w, &ctx).unwrap();
    assert!(ctx.approx_eq(&x, &w_drazin(&gt.a, &gt.w, &ctx).unwrap()));
    assert!(ctx.approx_eq(&x, &gt.wcoreep_closed_form));
}

#[test]
fn planted_commuting_condition_gives_the_drazin_inverse() {
    let spec = GeneratorSpec::new(2, 3, 2).with_plant(Plant::CommutingCondition);
    for seed in 0..20 {
        let gt = generate_pair(&spec, seed).unwrap();
        let r = commutation_analysis(&gt.a, &gt.w, &ctx()).unwrap();
        assert!(r.equals_wdrazin && r.commutes, "seed {seed}: {r:?}");
    }
}

#[test]
fn w_drazin_fails_the_system_when_commutation_fails() {
    let ctx = ctx();
    let mut checked = 0;
    for seed in 0..20 {
        let gt = generate_pair(&GeneratorSpec::new(2, 3, 3), seed).unwrap();
        if commutation_analysis(&gt.a, &gt.w, &ctx).unwrap().commutes {
            continue;
        }
        let d = w_drazin(&gt.a, &gt.w, &ctx).unwrap();
        let out = characterization_check(&gt.a, &gt.w, &d, &ctx, Characterization::System).unwrap();
        assert!(!out.holds, "seed {seed}");
        checked += 1;
    }
    assert!(checked >= 10);
}

#[test]
fn drazin_reassembles_from_the_series() {
    let ctx = ctx();
    for seed in 0..10 {
        let gt = generate_pair(&GeneratorSpec::new(3, 2, 3), seed).unwrap();
        let cp = &gt.pair;
        let (t, u) = series_tu(cp).unwrap();
        let aw_inv = invert(&(&cp.a1 * &cp.w1), &ctx).unwrap();
        let wa_inv = invert(&(&cp.w1 * &cp.a1), &ctx).unwrap();
        assert!(ctx.approx_eq(&cp.lift_yy_top(&aw_inv, &t), &drazin(&(&gt.a * &gt.w), &ctx).unwrap()));
        assert!(ctx.approx_eq(&cp.lift_xx_top(&wa_inv, &u), &drazin(&(&gt.w * &gt.a), &ctx).unwrap()));
    }
}

/// `B = [[A1, B2], [0, B3]]` with `B2` solving the right block system.
fn right_partner(gt: &wwg_core::conformance::GroundTruth, ctx: &NumericContext) -> (ComplexMatrix, ComplexMatrix) {
    let cp = &gt.pair;
    let (ny, nx) = cp.a3.shape();
    let b3 = ComplexMatrix::from_fn(ny, nx, |i, j| Complex64::new(0.3 * (i as f64 + 1.0), -0.2 * j as f64));
    let coupling = &(&cp.a1 * &cp.w2) + &(&cp.a2 * &cp.w3);
    let k = &invert(&(&cp.a1 * &cp.w1), ctx).unwrap() * &coupling;
    let b2 = &cp.a2 + &(&k * &(&cp.a3 - &b3));
    let zero = ComplexMatrix::zeros(ny, cp.core_dim());
    (cp.lift_xy(&cp.a1, &b2, &zero, &b3), b2)
}

#[test]
fn right_relation_from_blocks_and_its_perturbation() {
    let ctx = ctx();
    for seed in 0..10 {
        let gt = generate_pair(&GeneratorSpec::new(2, 2, 2), seed).unwrap();
        let (b, b2) = right_partner(&gt, &ctx);
        assert!(wwg_below(&gt.a, &gt.w, &b, &ctx, Side::Right).unwrap().holds, "seed {seed}");
        let analysis = relation_block_analysis(&gt.a, &gt.w, &b, &ctx).unwrap();
        assert!(analysis.block_right.holds && analysis.right_agrees());

        let cp = &gt.pair;
        let mut bumped = b2.clone();
        bumped.set(0, 0, bumped.get(0, 0) + Complex64::new(1.0, 0.0));
        let zero = ComplexMatrix::zeros(cp.a3.rows(), cp.core_dim());
        let b3 = cp.q2.frame().adjoint() * &b * cp.p2.frame();
        let b_bad = cp.lift_xy(&cp.a1, &bumped, &zero, &b3);
        assert!(!wwg_below(&gt.a, &gt.w, &b_bad, &ctx, Side::Right).unwrap().holds, "seed {seed}");
        let analysis = relation_block_analysis(&gt.a, &gt.w, &b_bad, &ctx).unwrap();
        assert!(!analysis.block_right.holds && analysis.right_agrees());
    }
}
