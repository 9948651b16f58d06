use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{lu_solve, numerical_rank, svd, ComplexMatrix, NumericContext};

/// Orthonormal column frame spanning a subspace of `C^ambient_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis {
    frame: ComplexMatrix,
}

impl SubspaceBasis {
    /// Wraps a frame that is already orthonormal. The orientation convention
    /// is applied; orthonormality is the caller's responsibility.
    pub fn from_orthonormal(mut frame: ComplexMatrix, ctx: &NumericContext) -> Self {
        orient_columns(&mut frame, ctx.eq_atol);
        Self { frame }
    }

    /// The whole space `C^n` with the standard basis.
    pub fn full(n: usize) -> Self {
        Self {
            frame: ComplexMatrix::identity(n),
        }
    }

    /// The zero subspace of `C^n`.
    pub fn trivial(n: usize) -> Self {
        Self {
            frame: ComplexMatrix::zeros(n, 0),
        }
    }

    pub fn frame(&self) -> &ComplexMatrix {
        &self.frame
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.rows()
    }

    pub fn dim(&self) -> usize {
        self.frame.cols()
    }

    /// `||F^* F - I||_F`.
    pub fn orthonormality_residual(&self) -> f64 {
        (&(self.frame.adjoint() * &self.frame) - &ComplexMatrix::identity(self.dim())).frobenius_norm()
    }
}

/// Multiplies each column by a unit phase so that its first entry with
/// modulus above `atol` is real and positive.
fn orient_columns(frame: &mut ComplexMatrix, atol: f64) {
    let m: &DMatrix<Complex64> = frame.as_dmatrix();
    let mut out = m.clone();
    for j in 0..m.ncols() {
        let pivot = (0..m.nrows())
            .map(|i| m[(i, j)])
            .find(|z| z.norm() > atol);
        if let Some(p) = pivot {
            let phase = p.conj() / p.norm();
            for i in 0..m.nrows() {
                out[(i, j)] *= phase;
            }
            // the pivot itself is now real up to rounding; make it exact
            if let Some(i) = (0..m.nrows()).find(|&i| m[(i, j)].norm() > atol) {
                out[(i, j)] = Complex64::new(out[(i, j)].norm(), 0.0);
            }
        }
    }
    *frame = ComplexMatrix::from_dmatrix(out);
}

/// Orthonormal basis of the column space `R(M)`, taken from the leading left
/// singular vectors.
pub fn range_basis(m: &ComplexMatrix, ctx: &NumericContext) -> SubspaceBasis {
    let rows = m.rows();
    if m.is_empty() {
        return SubspaceBasis::trivial(rows);
    }
    let d = svd(m);
    let rank = d.rank(ctx.rank_cutoff(m.rows(), m.cols()));
    SubspaceBasis::from_orthonormal(d.u.columns(0, rank), ctx)
}

/// Orthonormal basis of the null space `N(M) = R(M^*)^⊥`.
pub fn null_basis(m: &ComplexMatrix, ctx: &NumericContext) -> SubspaceBasis {
    complement_basis(&range_basis(&m.adjoint(), ctx), ctx)
}

/// As [`range_basis`] when the rank of `M` is known in advance: the `dim`
/// leading left singular vectors, with no cutoff decision.
pub fn range_basis_with_dim(m: &ComplexMatrix, dim: usize, ctx: &NumericContext) -> Result<SubspaceBasis> {
    if dim > m.rows().min(m.cols()) {
        return Err(Error::ShapeMismatch(format!(
            "a {}x{} matrix has no range of dimension {dim}",
            m.rows(),
            m.cols()
        )));
    }
    if dim == 0 {
        return Ok(SubspaceBasis::trivial(m.rows()));
    }
    Ok(SubspaceBasis::from_orthonormal(svd(m).u.columns(0, dim), ctx))
}

/// As [`null_basis`] for a matrix of known rank `rank`.
pub fn null_basis_with_rank(m: &ComplexMatrix, rank: usize, ctx: &NumericContext) -> Result<SubspaceBasis> {
    Ok(complement_basis(&range_basis_with_dim(&m.adjoint(), rank, ctx)?, ctx))
}

/// Orthonormal basis of the orthogonal complement.
///
/// Computed from the singular vectors of `I - F F^*`, whose singular values
/// are one on the complement and zero on the subspace.
pub fn complement_basis(b: &SubspaceBasis, ctx: &NumericContext) -> SubspaceBasis {
    let n = b.ambient_dim();
    let k = b.dim();
    if k == 0 {
        return SubspaceBasis::full(n);
    }
    if k >= n {
        return SubspaceBasis::trivial(n);
    }
    let perp = &ComplexMatrix::identity(n) - &(b.frame() * &b.frame().adjoint());
    let d = svd(&perp);
    SubspaceBasis::from_orthonormal(d.u.columns(0, n - k), ctx)
}

/// `P_L = F F^*`.
pub fn orthogonal_projector(b: &SubspaceBasis) -> ComplexMatrix {
    b.frame() * &b.frame().adjoint()
}

/// The idempotent with range `L` and null space `M`.
///
/// Solves `P [F_L | F_M] = [F_L | 0]` against the concatenated frame.
pub fn oblique_projector(
    l: &SubspaceBasis,
    m: &SubspaceBasis,
    ctx: &NumericContext,
) -> Result<ComplexMatrix> {
    let n = l.ambient_dim();
    if m.ambient_dim() != n {
        return Err(Error::ShapeMismatch(format!(
            "range lives in C^{n}, null space in C^{}",
            m.ambient_dim()
        )));
    }
    let concat = ComplexMatrix::hstack(&[l.frame(), m.frame()]);
    let rank = numerical_rank(&concat, ctx);
    if l.dim() + m.dim() != n || rank < n {
        return Err(Error::NotComplementary {
            range_dim: l.dim(),
            null_dim: m.dim(),
            ambient: n,
            rank,
        });
    }
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let target = ComplexMatrix::hstack(&[l.frame(), &ComplexMatrix::zeros(n, m.dim())]);
    // P S = T  <=>  S^T P^T = T^T
    Ok(lu_solve(&concat.transpose(), &target.transpose()).transpose())
}

/// Sine of the largest principal angle between two subspaces of equal
/// dimension; `1.0` when the dimensions differ.
pub fn max_principal_angle_sin(a: &SubspaceBasis, b: &SubspaceBasis) -> f64 {
    if a.ambient_dim() != b.ambient_dim() || a.dim() != b.dim() {
        return 1.0;
    }
    if a.dim() == 0 {
        return 0.0;
    }
    let residual = b.frame() - &(a.frame() * &(a.frame().adjoint() * b.frame()));
    svd(&residual).sigma.first().copied().unwrap_or(0.0).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> NumericContext {
        NumericContext::default()
    }

    fn e(n: usize, i: usize) -> ComplexMatrix {
        let mut v = ComplexMatrix::zeros(n, 1);
        v.set(i, 0, Complex64::new(1.0, 0.0));
        v
    }

    fn span(cols: &[ComplexMatrix]) -> SubspaceBasis {
        let refs: Vec<&ComplexMatrix> = cols.iter().collect();
        range_basis(&ComplexMatrix::hstack(&refs), &ctx())
    }

    #[test]
    fn range_of_identity_and_zero() {
        let r = range_basis(&ComplexMatrix::identity(2), &ctx());
        assert!(ctx().approx_eq(&orthogonal_projector(&r), &ComplexMatrix::identity(2)));
        assert_eq!(r.dim(), 2);
        assert_eq!(range_basis(&ComplexMatrix::zeros(3, 3), &ctx()).dim(), 0);
    }

    #[test]
    fn range_of_rank_one_square_is_e1() {
        let a2 = ComplexMatrix::from_real_rows(&[[1.0, 1.0, 2.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        let r = range_basis(&a2, &ctx());
        assert_eq!(r.dim(), 1);
        assert!(ctx().approx_eq(r.frame(), &e(3, 0)));
        // orientation: first significant entry real positive
        assert_eq!(r.frame().get(0, 0).im, 0.0);
        assert!(r.frame().get(0, 0).re > 0.0);
    }

    #[test]
    fn complement_of_e1_and_full_space() {
        let c = complement_basis(&span(&[e(3, 0)]), &ctx());
        assert_eq!(c.dim(), 2);
        let p = orthogonal_projector(&c);
        assert!(ctx().approx_eq(&p, &ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 1.0])));
        assert_eq!(complement_basis(&SubspaceBasis::full(3), &ctx()).dim(), 0);
        assert_eq!(complement_basis(&SubspaceBasis::trivial(3), &ctx()).dim(), 3);
    }

    #[test]
    fn orthogonal_projector_examples() {
        let p = orthogonal_projector(&span(&[e(3, 0)]));
        assert!(ctx().approx_eq(&p, &ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0])));
        let full = orthogonal_projector(&SubspaceBasis::full(2));
        assert_eq!(full, ComplexMatrix::identity(2));
    }

    #[test]
    fn oblique_projector_orthogonal_case() {
        let p = oblique_projector(&span(&[e(2, 0)]), &span(&[e(2, 1)]), &ctx()).unwrap();
        assert!(ctx().approx_eq(&p, &ComplexMatrix::from_real_diagonal(&[1.0, 0.0])));
    }

    #[test]
    fn oblique_projector_along_kernel_of_a_squared() {
        let l = span(&[e(3, 0)]);
        let m = span(&[
            ComplexMatrix::from_real_rows(&[[-1.0], [1.0], [0.0]]),
            ComplexMatrix::from_real_rows(&[[-2.0], [0.0], [1.0]]),
        ]);
        let p = oblique_projector(&l, &m, &ctx()).unwrap();
        let expected =
            ComplexMatrix::from_real_rows(&[[1.0, 1.0, 2.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        assert!((&p - &expected).max_abs() < 1e-13, "{p:?}");
    }

    #[test]
    fn oblique_projector_rejects_overlap() {
        let l = span(&[e(2, 0)]);
        let err = oblique_projector(&l, &l, &ctx()).unwrap_err();
        assert!(matches!(err, Error::NotComplementary { rank: 1, .. }));
    }

    #[test]
    fn principal_angles() {
        let a = span(&[e(3, 0)]);
        let b = span(&[e(3, 0).scale_complex(Complex64::new(0.0, 1.0))]);
        assert!(max_principal_angle_sin(&a, &b) < 1e-15);
        let c = span(&[e(3, 1)]);
        assert!((max_principal_angle_sin(&a, &c) - 1.0).abs() < 1e-15);
    }
}
