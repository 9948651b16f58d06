//! Dense complex linear algebra: rank, pseudoinverse, inverse, subspace
//! frames and projectors.
//!
//! Storage and arithmetic use `nalgebra`; the SVD and LU factorizations
//! come from `faer`. Everything above them (rank decisions, orientation of
//! frames, projector construction) lives here.

mod context;
mod matrix;
mod subspace;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use context::{relative_distance, NumericContext, Residual, DEFAULT_RANK_RTOL};
pub use matrix::ComplexMatrix;
pub use subspace::{
    complement_basis, max_principal_angle_sin, null_basis, null_basis_with_rank, oblique_projector,
    orthogonal_projector, range_basis, range_basis_with_dim, SubspaceBasis,
};

use crate::error::{Error, Result};

/// Thin SVD with singular values sorted in descending order.
pub(crate) struct Svd {
    pub u: ComplexMatrix,
    pub sigma: Vec<f64>,
    pub v_adjoint: ComplexMatrix,
}

impl Svd {
    /// Number of singular values strictly above `rtol * sigma_max`.
    pub fn rank(&self, rtol: f64) -> usize {
        match self.sigma.first() {
            Some(&smax) if smax > 0.0 => self.sigma.iter().filter(|&&s| s > rtol * smax).count(),
            _ => 0,
        }
    }
}

fn to_faer(m: &ComplexMatrix) -> faer::Mat<Complex64> {
    let d = m.as_dmatrix();
    faer::Mat::from_fn(m.rows(), m.cols(), |i, j| d[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]))
}

/// # Panics
///
/// If the SVD iteration fails to converge, which only happens for input
/// that is not finite; `ComplexMatrix` rules that out.
pub(crate) fn svd(m: &ComplexMatrix) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Svd {
            u: ComplexMatrix::zeros(r, 0),
            sigma: Vec::new(),
            v_adjoint: ComplexMatrix::zeros(0, c),
        };
    }
    let d = to_faer(m).thin_svd().expect("SVD of a finite matrix converges");
    let s = d.S().column_vector();
    Svd {
        u: from_faer(d.U()),
        sigma: (0..s.nrows()).map(|i| s[i].re).collect(),
        v_adjoint: from_faer(d.V()).adjoint(),
    }
}

/// Solves `M X = B` for square nonsingular `M` by LU with partial pivoting.
pub(crate) fn lu_solve(m: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    use faer::linalg::solvers::Solve;
    from_faer(to_faer(m).partial_piv_lu().solve(to_faer(b)).as_ref())
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    svd(m).sigma
}

/// Count of singular values above `rank_rtol * sigma_max`; zero for the zero
/// matrix.
pub fn numerical_rank(m: &ComplexMatrix, ctx: &NumericContext) -> usize {
    svd(m).rank(ctx.rank_cutoff(m.rows(), m.cols()))
}

/// Moore–Penrose inverse from the SVD, with singular values under the rank
/// cutoff treated as exact zeros.
pub fn moore_penrose(m: &ComplexMatrix, ctx: &NumericContext) -> ComplexMatrix {
    let (r, c) = m.shape();
    let d = svd(m);
    let rank = d.rank(ctx.rank_cutoff(r, c));
    if rank == 0 {
        return ComplexMatrix::zeros(c, r);
    }
    let mut v = d.v_adjoint.block(0, 0, rank, c).adjoint();
    for (k, s) in d.sigma.iter().take(rank).enumerate() {
        for i in 0..c {
            v.set(i, k, v.get(i, k) / *s);
        }
    }
    v * d.u.columns(0, rank).adjoint()
}

/// Ordinary inverse of a square, numerically nonsingular matrix.
pub fn invert(m: &ComplexMatrix, ctx: &NumericContext) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "inverse of a non-square {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let rank = numerical_rank(m, ctx);
    if rank < n {
        return Err(Error::Singular { rank, dim: n });
    }
    Ok(lu_solve(m, &ComplexMatrix::identity(n)))
}

/// Spectral-norm condition number; infinite for singular or empty input.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo))
            if lo > m.rows().max(m.cols()) as f64 * f64::EPSILON * hi
                && s.len() == m.rows().min(m.cols()) =>
        {
            hi / lo
        }
        _ => f64::INFINITY,
    }
}
