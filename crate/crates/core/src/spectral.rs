//! Index, Drazin and W-weighted Drazin inverses, and the simultaneous block
//! upper-triangular form of a weighted pair `(A, W)`.
//!
//! For `A: C^n -> C^m` and `W: C^m -> C^n` the pair is split along
//!
//! ```text
//!   C^n = R((WA)^d) ⊕ N[((WA)^d)^*]     (frames p1, p2)
//!   C^m = R((AW)^d) ⊕ N[((AW)^d)^*]     (frames q1, q2)
//! ```
//!
//! so that `A = [[A1, A2], [0, A3]]` maps p-coordinates to q-coordinates and
//! `W = [[W1, W2], [0, W3]]` maps q-coordinates back, with `A1`, `W1`
//! invertible and `A3 W3`, `W3 A3` nilpotent.

use crate::error::{Error, Result};
use crate::numeric::{
    complement_basis, invert, moore_penrose, range_basis, range_basis_with_dim, ComplexMatrix,
    NumericContext, SubspaceBasis,
};

/// Index of a square matrix together with the rank at which the sequence
/// `rank(A^k)` stabilizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct IndexResult {
    pub index: usize,
    pub stable_rank: usize,
}

fn require_square(a: &ComplexMatrix, what: &str) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!(
            "{what} needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )))
    }
}

/// Index of `A` and an orthonormal basis of `R(A^k)`, `k = ind(A)`.
///
/// The ranges `R(A^j)` are tracked by a frame that is pushed through `A`
/// once per step, `R(A^{j+1}) = R(A Q_j)`, and re-orthonormalized; the rank
/// sequence is therefore monotone by construction and the conditioning of
/// each rank decision is that of `A` on a subspace, not of a high power.
pub fn core_subspace(a: &ComplexMatrix, ctx: &NumericContext) -> Result<(IndexResult, SubspaceBasis)> {
    require_square(a, "index")?;
    let n = a.rows();
    let cap = ctx.index_cap(n);
    let mut current = SubspaceBasis::full(n);
    for k in 0..=cap {
        let next = range_basis(&(a * current.frame()), ctx);
        if next.dim() == current.dim() {
            let result = IndexResult {
                index: k,
                stable_rank: current.dim(),
            };
            // Rounding picked up on the way in has a component along the
            // nilpotent part; k more pushes at fixed dimension annihilate it.
            let mut refined = next;
            for _ in 0..k {
                refined = range_basis_with_dim(&(a * refined.frame()), result.stable_rank, ctx)?;
            }
            return Ok((result, refined));
        }
        current = next;
    }
    Err(Error::IndexOverflow { max_index: cap })
}

/// Smallest `k` with `rank(A^{k+1}) = rank(A^k)`.
pub fn index(a: &ComplexMatrix, ctx: &NumericContext) -> Result<IndexResult> {
    core_subspace(a, ctx).map(|(r, _)| r)
}

/// `Σ_{n=0}^{d-1} C^{n+2} · K · N^n` with `d = dim N`.
///
/// With `C` the inverse of an invertible core block, `K` the coupling block
/// and `N` nilpotent, this is the off-diagonal block of a Drazin inverse.
/// Terms with `n` beyond the nilpotency degree vanish, so truncating at the
/// dimension is exact.
pub(crate) fn nilpotent_series(
    core_inv: &ComplexMatrix,
    coupling: &ComplexMatrix,
    nil: &ComplexMatrix,
) -> ComplexMatrix {
    let d = nil.rows();
    let mut left = core_inv * core_inv;
    let mut right = ComplexMatrix::identity(d);
    let mut acc = ComplexMatrix::zeros(core_inv.rows(), d);
    for _ in 0..d {
        acc = acc + &(&left * coupling) * &right;
        left = &left * core_inv;
        right = &right * nil;
    }
    acc
}

/// Drazin inverse through the core–nilpotent splitting `C^n = R(A^k) ⊕ R(A^k)^⊥`.
///
/// In that basis `A = [[A11, A12], [0, A22]]` with `A11` invertible and
/// `A22` nilpotent, and `A^d = [[A11^{-1}, X], [0, 0]]` with
/// `X = Σ A11^{-(n+2)} A12 A22^n`.
pub fn drazin(a: &ComplexMatrix, ctx: &NumericContext) -> Result<ComplexMatrix> {
    let (_, q1) = core_subspace(a, ctx)?;
    drazin_on_core(a, &q1, ctx)
}

/// Drazin inverse given a basis `q1` of `R(A^k)`, `k = ind(A)`.
pub(crate) fn drazin_on_core(
    a: &ComplexMatrix,
    q1: &SubspaceBasis,
    ctx: &NumericContext,
) -> Result<ComplexMatrix> {
    let n = a.rows();
    if q1.dim() == 0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let q2 = complement_basis(q1, ctx);
    let (f1, f2) = (q1.frame(), q2.frame());
    let a11 = f1.adjoint() * a * f1;
    let a12 = f1.adjoint() * a * f2;
    let a22 = f2.adjoint() * a * f2;
    let inv = invert(&a11, ctx)
        .map_err(|e| Error::DecompositionFailure(format!("core block of A is singular: {e}")))?;
    let x = nilpotent_series(&inv, &a12, &a22);
    Ok(f1 * &inv * f1.adjoint() + f1 * &x * f2.adjoint())
}

/// `A^k (A^{2k+1})^† A^k`.
///
/// Exact in theory, but the pseudoinverse of `A^{2k+1}` squares the
/// conditioning of the core part with every step of the index, so this is
/// kept as an independent cross-check for low-index, well-conditioned input.
pub fn drazin_power_formula(a: &ComplexMatrix, ctx: &NumericContext) -> Result<ComplexMatrix> {
    let k = index(a, ctx)?.index as u32;
    let ak = a.pow(k);
    Ok(&ak * &moore_penrose(&a.pow(2 * k + 1), ctx) * &ak)
}

/// Checks `A: m x n`, `W: n x m` and `W != 0`.
pub fn validate_pair(a: &ComplexMatrix, w: &ComplexMatrix, ctx: &NumericContext) -> Result<()> {
    if w.rows() != a.cols() || w.cols() != a.rows() {
        return Err(Error::ShapeMismatch(format!(
            "A is {}x{}, W must be {}x{} but is {}x{}",
            a.rows(),
            a.cols(),
            a.cols(),
            a.rows(),
            w.rows(),
            w.cols()
        )));
    }
    if w.frobenius_norm() <= ctx.eq_atol {
        return Err(Error::ZeroWeight);
    }
    Ok(())
}

/// W-weighted Drazin inverse `A^{d,W} = [(AW)^d]^2 A`, cross-checked
/// against `A [(WA)^d]^2`.
pub fn w_drazin(a: &ComplexMatrix, w: &ComplexMatrix, ctx: &NumericContext) -> Result<ComplexMatrix> {
    validate_pair(a, w, ctx)?;
    let awd = drazin(&(a * w), ctx)?;
    let wad = drazin(&(w * a), ctx)?;
    let left = &(&awd * &awd) * a;
    let right = a * &(&wad * &wad);
    let r = ctx.compare(&left, &right);
    if !r.within {
        return Err(Error::DecompositionFailure(format!(
            "[(AW)^d]^2 A and A [(WA)^d]^2 disagree (relative residual {:.3e})",
            r.relative
        )));
    }
    Ok(left)
}

/// The block form of a weighted pair: four frames, six blocks and the two
/// series corrections `T`, `U` that appear in `(AW)^d` and `(WA)^d`.
#[derive(Clone, Debug)]
pub struct CanonicalPair {
    /// `R((WA)^d)`
    pub p1: SubspaceBasis,
    /// `N[((WA)^d)^*]`
    pub p2: SubspaceBasis,
    /// `R((AW)^d)`
    pub q1: SubspaceBasis,
    /// `N[((AW)^d)^*]`
    pub q2: SubspaceBasis,
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
    pub a3: ComplexMatrix,
    pub w1: ComplexMatrix,
    pub w2: ComplexMatrix,
    pub w3: ComplexMatrix,
    pub t: ComplexMatrix,
    pub u: ComplexMatrix,
}

impl CanonicalPair {
    /// Builds the package from frames and blocks, computing `T` and `U`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_blocks(
        p1: SubspaceBasis,
        p2: SubspaceBasis,
        q1: SubspaceBasis,
        q2: SubspaceBasis,
        a1: ComplexMatrix,
        a2: ComplexMatrix,
        a3: ComplexMatrix,
        w1: ComplexMatrix,
        w2: ComplexMatrix,
        w3: ComplexMatrix,
    ) -> Result<Self> {
        let r = p1.dim();
        let (nx, ny) = (p2.dim(), q2.dim());
        let shapes = [
            (q1.dim(), r, "q1"),
            (a1.rows(), r, "A1 rows"),
            (a1.cols(), r, "A1 cols"),
            (w1.rows(), r, "W1 rows"),
            (w1.cols(), r, "W1 cols"),
            (a2.rows(), r, "A2 rows"),
            (a2.cols(), nx, "A2 cols"),
            (a3.rows(), ny, "A3 rows"),
            (a3.cols(), nx, "A3 cols"),
            (w2.rows(), r, "W2 rows"),
            (w2.cols(), ny, "W2 cols"),
            (w3.rows(), nx, "W3 rows"),
            (w3.cols(), ny, "W3 cols"),
        ];
        if let Some((got, want, what)) = shapes.iter().find(|(g, w, _)| g != w) {
            return Err(Error::ShapeMismatch(format!("{what}: expected {want}, got {got}")));
        }
        let mut cp = Self {
            p1,
            p2,
            q1,
            q2,
            a1,
            a2,
            a3,
            w1,
            w2,
            w3,
            t: ComplexMatrix::zeros(r, ny),
            u: ComplexMatrix::zeros(r, nx),
        };
        let (t, u) = series_tu(&cp)?;
        cp.t = t;
        cp.u = u;
        Ok(cp)
    }

    pub fn core_dim(&self) -> usize {
        self.p1.dim()
    }

    /// `[p1 | p2]`, a unitary matrix on `C^n`.
    pub fn p(&self) -> ComplexMatrix {
        ComplexMatrix::hstack(&[self.p1.frame(), self.p2.frame()])
    }

    /// `[q1 | q2]`, a unitary matrix on `C^m`.
    pub fn q(&self) -> ComplexMatrix {
        ComplexMatrix::hstack(&[self.q1.frame(), self.q2.frame()])
    }

    /// Operator `C^n -> C^m` with the given blocks: `[q1|q2] [[b11,b12],[b21,b22]] [p1|p2]^*`.
    pub fn lift_xy(
        &self,
        b11: &ComplexMatrix,
        b12: &ComplexMatrix,
        b21: &ComplexMatrix,
        b22: &ComplexMatrix,
    ) -> ComplexMatrix {
        self.q() * ComplexMatrix::from_blocks(b11, b12, b21, b22) * self.p().adjoint()
    }

    /// Operator `C^n -> C^m` with only a top block row.
    pub fn lift_xy_top(&self, b11: &ComplexMatrix, b12: &ComplexMatrix) -> ComplexMatrix {
        self.q1.frame() * b11 * self.p1.frame().adjoint() + self.q1.frame() * b12 * self.p2.frame().adjoint()
    }

    /// Operator `C^m -> C^m` with only a top block row, in q-coordinates.
    pub fn lift_yy_top(&self, b11: &ComplexMatrix, b12: &ComplexMatrix) -> ComplexMatrix {
        self.q1.frame() * b11 * self.q1.frame().adjoint() + self.q1.frame() * b12 * self.q2.frame().adjoint()
    }

    /// Operator `C^n -> C^n` with only a top block row, in p-coordinates.
    pub fn lift_xx_top(&self, b11: &ComplexMatrix, b12: &ComplexMatrix) -> ComplexMatrix {
        self.p1.frame() * b11 * self.p1.frame().adjoint() + self.p1.frame() * b12 * self.p2.frame().adjoint()
    }

    /// `A` rebuilt from its blocks.
    pub fn assemble_a(&self) -> ComplexMatrix {
        let zero = ComplexMatrix::zeros(self.a3.rows(), self.a1.cols());
        self.lift_xy(&self.a1, &self.a2, &zero, &self.a3)
    }

    /// `W` rebuilt from its blocks.
    pub fn assemble_w(&self) -> ComplexMatrix {
        let zero = ComplexMatrix::zeros(self.w3.rows(), self.w1.cols());
        self.p()
            * ComplexMatrix::from_blocks(&self.w1, &self.w2, &zero, &self.w3)
            * self.q().adjoint()
    }

    /// `(AW)^d = [[(A1 W1)^{-1}, T], [0, 0]]` in q-coordinates.
    pub fn aw_drazin(&self) -> Result<ComplexMatrix> {
        let inv = block_inverse(&(&self.a1 * &self.w1))?;
        Ok(self.lift_yy_top(&inv, &self.t))
    }

    /// `(WA)^d = [[(W1 A1)^{-1}, U], [0, 0]]` in p-coordinates.
    pub fn wa_drazin(&self) -> Result<ComplexMatrix> {
        let inv = block_inverse(&(&self.w1 * &self.a1))?;
        Ok(self.lift_xx_top(&inv, &self.u))
    }

    /// `A^{d,W} = [[(W1 A1 W1)^{-1}, W1^{-1} U], [0, 0]]`.
    pub fn w_drazin_blocks(&self) -> Result<ComplexMatrix> {
        let w1_inv = block_inverse(&self.w1)?;
        let core = block_inverse(&(&self.w1 * &self.a1 * &self.w1))?;
        Ok(self.lift_xy_top(&core, &(&w1_inv * &self.u)))
    }
}

fn block_inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    invert(m, &NumericContext::default())
        .map_err(|e| Error::DecompositionFailure(format!("core block not invertible: {e}")))
}

/// The corrections
/// `T = Σ (A1W1)^{-(n+2)} (A1W2 + A2W3) (A3W3)^n` and
/// `U = Σ (W1A1)^{-(n+2)} (W1A2 + W2A3) (W3A3)^n`,
/// truncated at the dimension of the nilpotent block.
pub fn series_tu(cp: &CanonicalPair) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let aw_inv = block_inverse(&(&cp.a1 * &cp.w1))?;
    let wa_inv = block_inverse(&(&cp.w1 * &cp.a1))?;
    let t = nilpotent_series(
        &aw_inv,
        &(&cp.a1 * &cp.w2 + &cp.a2 * &cp.w3),
        &(&cp.a3 * &cp.w3),
    );
    let u = nilpotent_series(
        &wa_inv,
        &(&cp.w1 * &cp.a2 + &cp.w2 * &cp.a3),
        &(&cp.w3 * &cp.a3),
    );
    Ok((t, u))
}

/// Canonical block form of the pair `(A, W)`.
///
/// `q1` spans `R((AW)^k)`, `k = ind(AW)`, and `p1` spans `R((WA)^{k'})`;
/// the complements are orthogonal. The `(2,1)` blocks of `A` and `W` must
/// vanish to `eq_atol + eq_rtol ||·||_F` and `A1`, `W1` must be invertible,
/// otherwise the rank decisions are unreliable and the decomposition is
/// refused.
pub fn canonical_pair(
    a: &ComplexMatrix,
    w: &ComplexMatrix,
    ctx: &NumericContext,
) -> Result<CanonicalPair> {
    validate_pair(a, w, ctx)?;
    let (_, q1) = core_subspace(&(a * w), ctx)?;
    let (_, p1) = core_subspace(&(w * a), ctx)?;
    if q1.dim() != p1.dim() {
        return Err(Error::DecompositionFailure(format!(
            "stable ranks of AW ({}) and WA ({}) differ",
            q1.dim(),
            p1.dim()
        )));
    }
    let q2 = complement_basis(&q1, ctx);
    let p2 = complement_basis(&p1, ctx);
    let (fp1, fp2, fq1, fq2) = (p1.frame(), p2.frame(), q1.frame(), q2.frame());

    let a21 = fq2.adjoint() * a * fp1;
    let w21 = fp2.adjoint() * w * fq1;
    for (block, full, name) in [(&a21, a, "A"), (&w21, w, "W")] {
        let r = ctx.judge_scaled(block.frobenius_norm(), full.frobenius_norm());
        if !r.within {
            return Err(Error::DecompositionFailure(format!(
                "(2,1) block of {name} does not vanish (norm {:.3e})",
                r.absolute
            )));
        }
    }

    let a1 = fq1.adjoint() * a * fp1;
    let a2 = fq1.adjoint() * a * fp2;
    let a3 = fq2.adjoint() * a * fp2;
    let w1 = fp1.adjoint() * w * fq1;
    let w2 = fp1.adjoint() * w * fq2;
    let w3 = fp2.adjoint() * w * fq2;
    for (block, name) in [(&a1, "A1"), (&w1, "W1")] {
        invert(block, ctx)
            .map_err(|e| Error::DecompositionFailure(format!("{name} is not invertible: {e}")))?;
    }
    CanonicalPair::from_blocks(p1, p2, q1, q2, a1, a2, a3, w1, w2, w3)
}
