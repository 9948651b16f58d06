//! The weak group relation `A ≤^⊗ B` (`AA^⊗ = BA^⊗` and `A^⊗A = A^⊗B`), its
//! weighted one-sided versions, their block characterizations and the
//! preorder counterexamples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ginverse::{core_ep, weak_group, weighted_weak_group};
use crate::numeric::{invert, relative_distance, ComplexMatrix, NumericContext, Residual};
use crate::spectral::{canonical_pair, drazin, validate_pair, CanonicalPair};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Direct,
    Block,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Side {
    /// `AW ≤^⊗ BW`
    Right,
    /// `WA ≤^⊗ WB`
    Left,
    Both,
}

/// Outcome of a relation query. `left_residual` belongs to the first
/// defining equation, `right_residual` to the second; both are relative
/// to `1 + ||A||_F + ||B||_F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationVerdict {
    pub holds: bool,
    pub left_residual: f64,
    pub right_residual: f64,
    pub method: Method,
}

impl RelationVerdict {
    fn from_residuals(left: Residual, right: Residual, method: Method) -> Self {
        Self {
            holds: left.within && right.within,
            left_residual: left.relative,
            right_residual: right.relative,
            method,
        }
    }
}

fn require_square_pair(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "relation needs square matrices of one size, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

fn judge_pair(ctx: &NumericContext, a: &ComplexMatrix, b: &ComplexMatrix, diff: f64) -> Residual {
    ctx.judge(diff, a.frobenius_norm() + b.frobenius_norm())
}

/// `A ≤^⊗ B` by direct evaluation of both equations.
pub fn wg_below(a: &ComplexMatrix, b: &ComplexMatrix, ctx: &NumericContext) -> Result<RelationVerdict> {
    require_square_pair(a, b)?;
    let g = weak_group(a, ctx)?;
    let left = judge_pair(ctx, a, b, (&(a * &g) - &(b * &g)).frobenius_norm());
    let right = judge_pair(ctx, a, b, (&(&g * a) - &(&g * b)).frobenius_norm());
    Ok(RelationVerdict::from_residuals(left, right, Method::Direct))
}

fn require_weighted(a: &ComplexMatrix, w: &ComplexMatrix, b: &ComplexMatrix, ctx: &NumericContext) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "A is {}x{} but B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    validate_pair(a, w, ctx)
}

fn combine(x: RelationVerdict, y: RelationVerdict) -> RelationVerdict {
    RelationVerdict {
        holds: x.holds && y.holds,
        left_residual: x.left_residual.max(y.left_residual),
        right_residual: x.right_residual.max(y.right_residual),
        method: x.method,
    }
}

/// The weighted relations `≤^{⊗,W,r}`, `≤^{⊗,W,l}` and `≤^{⊗,W}`.
///
/// The left relation is evaluated both as `WA ≤^⊗ WB` and through
/// `WAW A^{⊗,W} = WBW A^{⊗,W}`, `W A^{⊗,W} WA = W A^{⊗,W} WB`; a
/// disagreement between the two is an [`Error::EquivalenceViolation`].
pub fn wwg_below(
    a: &ComplexMatrix,
    w: &ComplexMatrix,
    b: &ComplexMatrix,
    ctx: &NumericContext,
    side: Side,
) -> Result<RelationVerdict> {
    require_weighted(a, w, b, ctx)?;
    match side {
        Side::Right => wg_below(&(a * w), &(b * w), ctx),
        Side::Left => {
            let (wa, wb) = (w * a, w * b);
            let verdict = wg_below(&wa, &wb, ctx)?;
            let x = weighted_weak_group(a, w, ctx)?;
            let wx = w * &x;
            let left = judge_pair(ctx, &wa, &wb, (&(&(&wa * w) * &x) - &(&(&wb * w) * &x)).frobenius_norm());
            let right = judge_pair(ctx, &wa, &wb, (&(&wx * &wa) - &(&wx * &wb)).frobenius_norm());
            let cross = left.within && right.within;
            if cross != verdict.holds {
                return Err(Error::EquivalenceViolation(format!(
                    "WA <= WB is {} but the weighted form gives {} (residuals {:.3e}, {:.3e})",
                    verdict.holds, cross, left.relative, right.relative
                )));
            }
            Ok(verdict)
        }
        Side::Both => Ok(combine(
            wwg_below(a, w, b, ctx, Side::Right)?,
            wwg_below(a, w, b, ctx, Side::Left)?,
        )),
    }
}

/// Direct and block verdicts for both one-sided weighted relations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationBlockAnalysis {
    pub direct_right: RelationVerdict,
    pub block_right: RelationVerdict,
    pub direct_left: RelationVerdict,
    pub block_left: RelationVerdict,
}

impl RelationBlockAnalysis {
    pub fn right_agrees(&self) -> bool {
        self.direct_right.holds == self.block_right.holds
    }

    pub fn left_agrees(&self) -> bool {
        self.direct_left.holds == self.block_left.holds
    }
}

/// Blocks of `B` in the canonical bases of `(A, W)`:
/// `B = [[B1, B2], [B4, B3]]` from p-coordinates to q-coordinates.
struct BBlocks {
    b1: ComplexMatrix,
    b2: ComplexMatrix,
    b3: ComplexMatrix,
    b4: ComplexMatrix,
}

fn b_blocks(cp: &CanonicalPair, b: &ComplexMatrix) -> BBlocks {
    let (p1, p2, q1, q2) = (cp.p1.frame(), cp.p2.frame(), cp.q1.frame(), cp.q2.frame());
    BBlocks {
        b1: q1.adjoint() * b * p1,
        b2: q1.adjoint() * b * p2,
        b3: q2.adjoint() * b * p2,
        b4: q2.adjoint() * b * p1,
    }
}

/// Judges `Σ terms ≈ 0`, relative to the size of the individual terms and
/// normalized like the direct residuals.
fn judge_terms(ctx: &NumericContext, norms: f64, terms: &[ComplexMatrix]) -> Residual {
    judge_terms_scaled(ctx, norms, terms, 0.0)
}

/// As [`judge_terms`], with `floor` added to the tolerance scale for
/// conditions that are a single block set to zero.
fn judge_terms_scaled(ctx: &NumericContext, norms: f64, terms: &[ComplexMatrix], floor: f64) -> Residual {
    let mut sum = terms[0].clone();
    for t in &terms[1..] {
        sum = sum + t;
    }
    let scale: f64 = floor + terms.iter().map(ComplexMatrix::frobenius_norm).sum::<f64>();
    let diff = sum.frobenius_norm();
    Residual {
        absolute: diff,
        relative: diff / (1.0 + norms),
        within: diff <= ctx.eq_atol + ctx.eq_rtol * (1.0 + scale),
    }
}

fn worst(rs: &[Residual]) -> Residual {
    Residual {
        absolute: rs.iter().map(|r| r.absolute).fold(0.0, f64::max),
        relative: rs.iter().map(|r| r.relative).fold(0.0, f64::max),
        within: rs.iter().all(|r| r.within),
    }
}

/// Block conditions for `A ≤^{⊗,W,r} B`:
/// `B1 = A1`, `B4 = 0`, `(A2 - B2) W3 + (A1W1)^{-1}(A1W2 + A2W3)(A3 - B3) W3 = 0`.
fn block_right(cp: &CanonicalPair, bb: &BBlocks, norms: f64, ctx: &NumericContext) -> Result<RelationVerdict> {
    let aw_inv = invert(&(&cp.a1 * &cp.w1), ctx)?;
    let coupling = &(&cp.a1 * &cp.w2) + &(&cp.a2 * &cp.w3);
    let first = worst(&[
        judge_terms(ctx, norms, &[cp.a1.clone(), -&bb.b1]),
        judge_terms_scaled(ctx, norms, &[bb.b4.clone()], norms),
    ]);
    let second = judge_terms(
        ctx,
        norms,
        &[
            &cp.a2 * &cp.w3,
            -&(&bb.b2 * &cp.w3),
            &(&(&aw_inv * &coupling) * &cp.a3) * &cp.w3,
            -&(&(&(&aw_inv * &coupling) * &bb.b3) * &cp.w3),
        ],
    );
    Ok(RelationVerdict::from_residuals(first, second, Method::Block))
}

/// Block conditions for `A ≤^{⊗,W,l} B`:
/// `B1 = A1 - W1^{-1} W2 B4`, `W3 B4 = 0` and
/// `B2 = A2 + W1^{-1}W2(A3 - B3) + (W1A1W1)^{-1}(W1A2 + W2A3) W3 (A3 - B3)`.
fn block_left(cp: &CanonicalPair, bb: &BBlocks, norms: f64, ctx: &NumericContext) -> Result<RelationVerdict> {
    let w1_inv = invert(&cp.w1, ctx)?;
    let waw_inv = invert(&(&(&cp.w1 * &cp.a1) * &cp.w1), ctx)?;
    let coupling = &(&cp.w1 * &cp.a2) + &(&cp.w2 * &cp.a3);
    let w1w2 = &w1_inv * &cp.w2;
    let first = worst(&[
        judge_terms(ctx, norms, &[cp.a1.clone(), -&(&w1w2 * &bb.b4), -&bb.b1]),
        judge_terms_scaled(ctx, norms, &[&cp.w3 * &bb.b4], cp.w3.frobenius_norm() * norms),
    ]);
    let tail = &(&waw_inv * &coupling) * &cp.w3;
    let second = judge_terms(
        ctx,
        norms,
        &[
            cp.a2.clone(),
            &w1w2 * &cp.a3,
            -&(&w1w2 * &bb.b3),
            &tail * &cp.a3,
            -&(&tail * &bb.b3),
            -&bb.b2,
        ],
    );
    Ok(RelationVerdict::from_residuals(first, second, Method::Block))
}

/// Evaluates both weighted one-sided relations directly and through the
/// blocks of `B` in the canonical bases of `(A, W)`.
pub fn relation_block_analysis(
    a: &ComplexMatrix,
    w: &ComplexMatrix,
    b: &ComplexMatrix,
    ctx: &NumericContext,
) -> Result<RelationBlockAnalysis> {
    require_weighted(a, w, b, ctx)?;
    let cp = canonical_pair(a, w, ctx)?;
    let bb = b_blocks(&cp, b);
    let norms = a.frobenius_norm() + b.frobenius_norm();
    Ok(RelationBlockAnalysis {
        direct_right: wwg_below(a, w, b, ctx, Side::Right)?,
        block_right: block_right(&cp, &bb, norms, ctx)?,
        direct_left: wwg_below(a, w, b, ctx, Side::Left)?,
        block_left: block_left(&cp, &bb, norms, ctx)?,
    })
}

/// The equivalent forms of the two equations of `A ≤^⊗ B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuite {
    /// `AA^⊗ = BA^⊗`, `A^ⓓA = B(A^ⓓ)^2A`, `A^ⓓ = B(A^ⓓ)^2`,
    /// `A^d = BA^ⓓA^d`, `AA^d = BA^d`.
    pub part_i: Vec<bool>,
    pub part_i_residuals: Vec<f64>,
    /// `A^⊗A = A^⊗B`, `A^ⓓA^2 = A^ⓓAB`.
    pub part_ii: Vec<bool>,
    pub part_ii_residuals: Vec<f64>,
}

impl LemmaSuite {
    pub fn part_i_agrees(&self) -> bool {
        self.part_i.iter().all(|&x| x == self.part_i[0])
    }

    pub fn part_ii_agrees(&self) -> bool {
        self.part_ii.iter().all(|&x| x == self.part_ii[0])
    }
}

/// Evaluates every condition of both parts, each by its own residual.
pub fn lemma_equiv_suite(a: &ComplexMatrix, b: &ComplexMatrix, ctx: &NumericContext) -> Result<LemmaSuite> {
    require_square_pair(a, b)?;
    let g = weak_group(a, ctx)?;
    let cep = core_ep(a, ctx)?;
    let d = drazin(a, ctx)?;
    let cep2 = &cep * &cep;
    let pairs_i = [
        (a * &g, b * &g),
        (&cep * a, &(b * &cep2) * a),
        (cep.clone(), b * &cep2),
        (d.clone(), &(b * &cep) * &d),
        (a * &d, b * &d),
    ];
    let cep_a = &cep * a;
    let pairs_ii = [(&g * a, &g * b), (&cep_a * a, &cep_a * b)];
    let eval = |pairs: &[(ComplexMatrix, ComplexMatrix)]| -> (Vec<bool>, Vec<f64>) {
        pairs
            .iter()
            .map(|(x, y)| {
                let r = ctx.compare(x, y);
                (r.within, r.relative)
            })
            .unzip()
    };
    let (part_i, part_i_residuals) = eval(&pairs_i);
    let (part_ii, part_ii_residuals) = eval(&pairs_ii);
    Ok(LemmaSuite {
        part_i,
        part_i_residuals,
        part_ii,
        part_ii_residuals,
    })
}

/// One triple of the preorder probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleProbe {
    pub a_below_b: RelationVerdict,
    pub b_below_c: RelationVerdict,
    pub a_below_c: RelationVerdict,
    pub transitivity_violation: bool,
    /// Pairs among `("A","B")`, `("B","C")`, `("A","C")` that are below each
    /// other in both directions without being equal.
    pub antisymmetry_violations: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreorderReport {
    pub triples: Vec<TripleProbe>,
    pub transitivity_violations: usize,
    pub antisymmetry_violations: usize,
}

/// Tests transitivity of `≤^⊗` on each triple and antisymmetry on each of
/// its pairs.
pub fn preorder_probe(
    triples: &[(ComplexMatrix, ComplexMatrix, ComplexMatrix)],
    ctx: &NumericContext,
) -> Result<PreorderReport> {
    let mut out = Vec::with_capacity(triples.len());
    for (a, b, c) in triples {
        require_square_pair(a, b)?;
        require_square_pair(b, c)?;
        let ab = wg_below(a, b, ctx)?;
        let bc = wg_below(b, c, ctx)?;
        let ac = wg_below(a, c, ctx)?;
        let mut anti = Vec::new();
        for ((x, nx), (y, ny), fwd) in [((a, "A"), (b, "B"), ab), ((b, "B"), (c, "C"), bc), ((a, "A"), (c, "C"), ac)] {
            if fwd.holds && relative_distance(x, y) > ctx.eq_rtol && wg_below(y, x, ctx)?.holds {
                anti.push((nx.to_string(), ny.to_string()));
            }
        }
        out.push(TripleProbe {
            transitivity_violation: ab.holds && bc.holds && !ac.holds,
            a_below_b: ab,
            b_below_c: bc,
            a_below_c: ac,
            antisymmetry_violations: anti,
        });
    }
    Ok(PreorderReport {
        transitivity_violations: out.iter().filter(|t| t.transitivity_violation).count(),
        antisymmetry_violations: out.iter().map(|t| t.antisymmetry_violations.len()).sum(),
        triples: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> NumericContext {
        NumericContext::default()
    }

    fn m(rows: &[[f64; 3]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows)
    }

    fn abc() -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        (
            m(&[[1.0, 1.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]),
            m(&[[1.0, 1.0, 0.0], [0.0, 0.0, 2.0], [0.0, 0.0, 0.0]]),
            m(&[[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 1.0, 1.0]]),
        )
    }

    #[test]
    fn example_verdicts() {
        let (a, b, c) = abc();
        assert!(wg_below(&a, &b, &ctx()).unwrap().holds);
        assert!(wg_below(&b, &c, &ctx()).unwrap().holds);
        let ac = wg_below(&a, &c, &ctx()).unwrap();
        assert!(!ac.holds);
        assert!(ac.right_residual > 1e-3);
        assert_eq!(ac.method, Method::Direct);
    }

    #[test]
    fn reflexive() {
        let (a, b, c) = abc();
        for x in [a, b, c] {
            assert!(wg_below(&x, &x, &ctx()).unwrap().holds);
        }
    }

    #[test]
    fn unit_weight_reduction() {
        let (a, b, c) = abc();
        let id = ComplexMatrix::identity(3);
        for (x, y) in [(&a, &b), (&b, &c), (&a, &c), (&c, &a)] {
            let plain = wg_below(x, y, &ctx()).unwrap();
            for side in [Side::Right, Side::Left, Side::Both] {
                assert_eq!(wwg_below(x, &id, y, &ctx(), side).unwrap().holds, plain.holds);
            }
        }
    }

    #[test]
    fn block_analysis_on_example() {
        let (a, b, c) = abc();
        let id = ComplexMatrix::identity(3);
        let r = relation_block_analysis(&a, &id, &b, &ctx()).unwrap();
        assert!(r.direct_right.holds && r.block_right.holds);
        assert!(r.direct_left.holds && r.block_left.holds);
        let r = relation_block_analysis(&a, &id, &c, &ctx()).unwrap();
        assert!(r.right_agrees() && r.left_agrees());
        assert!(!r.block_right.holds);
        let r = relation_block_analysis(&a, &id, &a, &ctx()).unwrap();
        assert!(r.direct_right.holds && r.block_right.holds && r.direct_left.holds && r.block_left.holds);
    }

    #[test]
    fn lemma_suite_on_example() {
        let (a, b, c) = abc();
        let s = lemma_equiv_suite(&a, &b, &ctx()).unwrap();
        assert!(s.part_i.iter().all(|&x| x) && s.part_ii.iter().all(|&x| x));
        let s = lemma_equiv_suite(&a, &c, &ctx()).unwrap();
        assert!(s.part_ii.iter().all(|&x| !x));
        assert!(s.part_i_agrees());
        let s = lemma_equiv_suite(&a, &a, &ctx()).unwrap();
        assert!(s.part_i.iter().chain(&s.part_ii).all(|&x| x));
    }

    #[test]
    fn probe_flags_both_failures() {
        let (a, b, c) = abc();
        let n1 = m(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]);
        let n2 = m(&[[0.0, 0.0, 3.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
        let r = preorder_probe(&[(a.clone(), b, c), (n1, n2.clone(), n2), (a.clone(), a.clone(), a)], &ctx())
            .unwrap();
        assert!(r.triples[0].transitivity_violation);
        // A and B of the example are also mutually below each other
        assert_eq!(r.triples[0].antisymmetry_violations, vec![("A".to_string(), "B".to_string())]);
        assert_eq!(r.triples[1].antisymmetry_violations, vec![("A".to_string(), "B".to_string()), ("A".to_string(), "C".to_string())]);
        assert!(!r.triples[2].transitivity_violation);
        assert!(r.triples[2].antisymmetry_violations.is_empty());
        assert_eq!(r.transitivity_violations, 1);
        assert_eq!(r.antisymmetry_violations, 3);
    }

    #[test]
    fn shape_errors() {
        let (a, _, _) = abc();
        assert!(matches!(wg_below(&a, &ComplexMatrix::identity(2), &ctx()), Err(Error::ShapeMismatch(_))));
        let w = ComplexMatrix::zeros(3, 3);
        assert!(matches!(wwg_below(&a, &w, &a, &ctx(), Side::Right), Err(Error::ZeroWeight)));
    }
}
