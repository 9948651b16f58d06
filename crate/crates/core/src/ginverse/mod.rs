//! The named generalized inverses, their defining systems, the
//! representation routes of the weighted weak group inverse and the
//! commutation analysis.

mod characterize;
mod commutation;
mod routes;

pub use characterize::{characterization_check, Characterization, CharacterizationOutcome, NamedResidual};
pub use commutation::{commutation_analysis, CommutationReport, CommutationResiduals};
pub use routes::{wwg_representations, Route, RouteTable};

use crate::error::{Error, Result};
use crate::numeric::{
    complement_basis, invert, moore_penrose, orthogonal_projector, ComplexMatrix, NumericContext,
    SubspaceBasis,
};
use crate::spectral::{canonical_pair, core_subspace, drazin_on_core, CanonicalPair};

/// Core–EP inverse `A^ⓓ = A^d P_{R(A^k)}`, `k = ind(A)`.
pub fn core_ep(a: &ComplexMatrix, ctx: &NumericContext) -> Result<ComplexMatrix> {
    let (_, q1) = core_subspace(a, ctx)?;
    let ad = drazin_on_core(a, &q1, ctx)?;
    Ok(ad * orthogonal_projector(&q1))
}

/// Weighted core–EP inverse `q1 (W1 A1 W1)^{-1} p1^*`.
pub fn weighted_core_ep(a: &ComplexMatrix, w: &ComplexMatrix, ctx: &NumericContext) -> Result<ComplexMatrix> {
    let cp = canonical_pair(a, w, ctx)?;
    weighted_core_ep_from(&cp, ctx)
}

pub(crate) fn weighted_core_ep_from(cp: &CanonicalPair, ctx: &NumericContext) -> Result<ComplexMatrix> {
    let core = invert(&(&cp.w1 * &cp.a1 * &cp.w1), ctx)
        .map_err(|e| Error::DecompositionFailure(format!("W1 A1 W1 is singular: {e}")))?;
    let zero = ComplexMatrix::zeros(cp.core_dim(), cp.p2.dim());
    Ok(cp.lift_xy_top(&core, &zero))
}

/// Weak group inverse `A^⊗ = (A^ⓓ)^2 A`.
///
/// Computed on its own path, not as the `W = I` case of the weighted
/// inverse.
pub fn weak_group(a: &ComplexMatrix, ctx: &NumericContext) -> Result<ComplexMatrix> {
    let cep = core_ep(a, ctx)?;
    Ok(&(&cep * &cep) * a)
}

/// Weighted weak group inverse `A^{⊗,W} = (A^{ⓓ,W} W)^2 A`.
pub fn weighted_weak_group(a: &ComplexMatrix, w: &ComplexMatrix, ctx: &NumericContext) -> Result<ComplexMatrix> {
    let wcep = weighted_core_ep(a, w, ctx)?;
    let x = &wcep * w;
    Ok(&(&x * &x) * a)
}

/// Group inverse; refuses matrices of index greater than one.
pub fn group_inverse(a: &ComplexMatrix, ctx: &NumericContext) -> Result<ComplexMatrix> {
    let (idx, q1) = core_subspace(a, ctx)?;
    if idx.index > 1 {
        return Err(Error::IndexTooLarge { index: idx.index });
    }
    drazin_on_core(a, &q1, ctx)
}

/// Core inverse `A^# A A^†` for matrices of index at most one.
pub fn core_inverse(a: &ComplexMatrix, ctx: &NumericContext) -> Result<ComplexMatrix> {
    let g = group_inverse(a, ctx)?;
    Ok(&(&g * a) * &moore_penrose(a, ctx))
}

/// Outer inverse `M^{(2)}_{T,S}`: the `B` with `BMB = B`, `R(B) = T` and
/// `N(B) = S`.
///
/// With `C` a frame of `T` and `D` the adjoint of a frame of `S^⊥`,
/// `B = C (D M C)^{-1} D`; it exists exactly when `D M C` is invertible.
pub fn outer_inverse_prescribed(
    m: &ComplexMatrix,
    range: &SubspaceBasis,
    null: &SubspaceBasis,
    ctx: &NumericContext,
) -> Result<ComplexMatrix> {
    if range.ambient_dim() != m.cols() || null.ambient_dim() != m.rows() {
        return Err(Error::ShapeMismatch(format!(
            "M is {}x{}; range must live in C^{} and null space in C^{}",
            m.rows(),
            m.cols(),
            m.cols(),
            m.rows()
        )));
    }
    let s_perp = complement_basis(null, ctx);
    if s_perp.dim() != range.dim() {
        return Err(Error::NotConsistent(format!(
            "dim T = {} but codim S = {}",
            range.dim(),
            s_perp.dim()
        )));
    }
    let c = range.frame();
    let d = s_perp.frame().adjoint();
    let core = invert(&(&d * m * c), ctx)
        .map_err(|e| Error::NotConsistent(format!("D M C is not invertible: {e}")))?;
    Ok(c * &core * &d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{range_basis, null_basis};
    use crate::spectral::drazin;

    fn ctx() -> NumericContext {
        NumericContext::default()
    }

    fn real(rows: &[[f64; 3]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows)
    }

    fn example_a() -> ComplexMatrix {
        real(&[[1.0, 1.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    }

    fn example_b() -> ComplexMatrix {
        real(&[[1.0, 1.0, 0.0], [0.0, 0.0, 2.0], [0.0, 0.0, 0.0]])
    }

    fn invertible() -> ComplexMatrix {
        real(&[[2.0, 1.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 3.0]])
    }

    fn close(x: &ComplexMatrix, y: &ComplexMatrix, tol: f64) -> bool {
        x.shape() == y.shape() && (x - y).max_abs() <= tol
    }

    #[test]
    fn core_ep_examples() {
        let inv = invert(&invertible(), &ctx()).unwrap();
        assert!(close(&core_ep(&invertible(), &ctx()).unwrap(), &inv, 1e-12));
        let expected = real(&[[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        assert!(close(&core_ep(&example_a(), &ctx()).unwrap(), &expected, 1e-12));
        let nil = real(&[[0.0, 1.0, 2.0], [0.0, 0.0, 3.0], [0.0, 0.0, 0.0]]);
        assert_eq!(core_ep(&nil, &ctx()).unwrap(), ComplexMatrix::zeros(3, 3));
    }

    #[test]
    fn core_ep_projector_property() {
        let a = example_a();
        let cep = core_ep(&a, &ctx()).unwrap();
        let (_, q1) = core_subspace(&a, &ctx()).unwrap();
        assert!(ctx().approx_eq(&(&a * &cep), &orthogonal_projector(&q1)));
    }

    #[test]
    fn weak_group_example_values() {
        let expected_a = real(&[[1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        let expected_b = real(&[[1.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        assert!(close(&weak_group(&example_a(), &ctx()).unwrap(), &expected_a, 1e-12));
        assert!(close(&weak_group(&example_b(), &ctx()).unwrap(), &expected_b, 1e-12));
        let d = ComplexMatrix::from_real_diagonal(&[2.0, 0.0]);
        let expected = ComplexMatrix::from_real_diagonal(&[0.5, 0.0]);
        assert!(close(&weak_group(&d, &ctx()).unwrap(), &expected, 1e-15));
    }

    #[test]
    fn weak_group_solves_unweighted_system() {
        let a = example_a();
        let x = weak_group(&a, &ctx()).unwrap();
        let cep = core_ep(&a, &ctx()).unwrap();
        assert!(ctx().approx_eq(&(&a * &(&x * &x)), &x));
        assert!(ctx().approx_eq(&(&a * &x), &(&cep * &a)));
    }

    #[test]
    fn weighted_versions_reduce_at_unit_weight() {
        let id = ComplexMatrix::identity(3);
        for a in [example_a(), example_b(), invertible()] {
            let wcep = weighted_core_ep(&a, &id, &ctx()).unwrap();
            assert!(ctx().approx_eq(&wcep, &core_ep(&a, &ctx()).unwrap()));
            let wwg = weighted_weak_group(&a, &id, &ctx()).unwrap();
            assert!(ctx().approx_eq(&wwg, &weak_group(&a, &ctx()).unwrap()));
        }
    }

    #[test]
    fn weighted_two_by_two_example() {
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let w = ComplexMatrix::from_real_diagonal(&[1.0, 3.0]);
        let expected = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(close(&weighted_core_ep(&a, &w, &ctx()).unwrap(), &expected, 1e-14));
        assert!(close(&weighted_weak_group(&a, &w, &ctx()).unwrap(), &expected, 1e-14));
    }

    #[test]
    fn group_inverse_examples() {
        let inv = invert(&invertible(), &ctx()).unwrap();
        assert!(close(&group_inverse(&invertible(), &ctx()).unwrap(), &inv, 1e-12));
        let d = ComplexMatrix::from_real_diagonal(&[3.0, 0.0]);
        let expected = ComplexMatrix::from_real_diagonal(&[1.0 / 3.0, 0.0]);
        assert!(close(&group_inverse(&d, &ctx()).unwrap(), &expected, 1e-15));
        assert!(matches!(
            group_inverse(&example_a(), &ctx()),
            Err(Error::IndexTooLarge { index: 2 })
        ));
    }

    #[test]
    fn core_inverse_examples() {
        let inv = invert(&invertible(), &ctx()).unwrap();
        assert!(close(&core_inverse(&invertible(), &ctx()).unwrap(), &inv, 1e-12));
        let d = ComplexMatrix::from_real_diagonal(&[2.0, 0.0]);
        let expected = ComplexMatrix::from_real_diagonal(&[0.5, 0.0]);
        assert!(close(&core_inverse(&d, &ctx()).unwrap(), &expected, 1e-15));
        assert!(matches!(core_inverse(&example_a(), &ctx()), Err(Error::IndexTooLarge { .. })));
    }

    #[test]
    fn core_inverse_matches_core_ep_at_index_one() {
        // S diag(D, 0) S^{-1}
        let s = real(&[[1.0, 2.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]]);
        let d = ComplexMatrix::from_real_diagonal(&[2.0, -1.0, 0.0]);
        let a = &(&s * &d) * &invert(&s, &ctx()).unwrap();
        assert!(ctx().approx_eq(
            &core_inverse(&a, &ctx()).unwrap(),
            &core_ep(&a, &ctx()).unwrap()
        ));
    }

    #[test]
    fn outer_inverse_examples() {
        let m = invertible();
        let inv = invert(&m, &ctx()).unwrap();
        let got = outer_inverse_prescribed(&m, &SubspaceBasis::full(3), &SubspaceBasis::trivial(3), &ctx())
            .unwrap();
        assert!(close(&got, &inv, 1e-12));

        let a = example_a();
        let t = range_basis(&drazin(&a, &ctx()).unwrap(), &ctx());
        let s = null_basis(&(&core_ep(&a, &ctx()).unwrap() * &a), &ctx());
        let got = outer_inverse_prescribed(&a, &t, &s, &ctx()).unwrap();
        let expected = real(&[[1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        assert!(close(&got, &expected, 1e-12), "{got:?}");
    }

    #[test]
    fn outer_inverse_inconsistent() {
        // M maps T = span{e1} to zero, so D M C = 0.
        let m = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        let t = range_basis(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0]), &ctx());
        let s = range_basis(&ComplexMatrix::from_real_diagonal(&[0.0, 1.0]), &ctx());
        assert!(matches!(
            outer_inverse_prescribed(&m, &t, &s, &ctx()),
            Err(Error::NotConsistent(_))
        ));
        // dimension mismatch between T and S^⊥
        let full = SubspaceBasis::full(2);
        assert!(matches!(
            outer_inverse_prescribed(&m, &t, &SubspaceBasis::trivial(2), &ctx()),
            Err(Error::NotConsistent(_))
        ));
        assert!(matches!(
            outer_inverse_prescribed(&m, &SubspaceBasis::full(3), &full, &ctx()),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
