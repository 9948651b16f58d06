use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ginverse::{weak_group, weighted_core_ep_from};
use crate::numeric::{ComplexMatrix, NumericContext, Residual};
use crate::spectral::{canonical_pair, w_drazin};

/// The commutation property of `A^{⊗,W}` and the conditions equivalent to it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutationReport {
    /// `AW A^{⊗,W} = A^{⊗,W} WA`
    pub commutes: bool,
    /// `(W1 A2 + W2 A3) W3 A3 = 0`
    pub block_condition: bool,
    /// `[(WA)^⊗]^2 = [(WA)^2]^⊗`
    pub square_identity: bool,
    /// `[(AW)^⊗]^2 = [(AW)^2]^⊗`
    pub aw_square_identity: bool,
    /// `(A1 W2 + A2 W3) A3 W3 = 0`
    pub aw_block_condition: bool,
    /// `A^{⊗,W} = A^{d,W}`
    pub equals_wdrazin: bool,
    pub residuals: CommutationResiduals,
}

/// The residual behind each boolean of [`CommutationReport`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutationResiduals {
    pub commutes: Residual,
    pub block_condition: Residual,
    pub square_identity: Residual,
    pub aw_square_identity: Residual,
    pub aw_block_condition: Residual,
    pub equals_wdrazin: Residual,
}

fn square_identity(m: &ComplexMatrix, ctx: &NumericContext) -> Result<Residual> {
    let g = weak_group(m, ctx)?;
    Ok(ctx.compare(&(&g * &g), &weak_group(&(m * m), ctx)?))
}

/// Evaluates all six conditions and enforces the equivalences between them.
///
/// A disagreement inside either chain, or `commutes` without
/// `equals_wdrazin`, is returned as [`Error::EquivalenceViolation`].
pub fn commutation_analysis(
    a: &ComplexMatrix,
    w: &ComplexMatrix,
    ctx: &NumericContext,
) -> Result<CommutationReport> {
    let cp = canonical_pair(a, w, ctx)?;
    let x = {
        let y = &weighted_core_ep_from(&cp, ctx)? * w;
        &(&y * &y) * a
    };
    let (aw, wa) = (a * w, w * a);

    let commutes = ctx.compare(&(&aw * &x), &(&x * &wa));

    // Both block products have four factors from A and W. Scaling by the
    // factor blocks themselves breaks down when A2 or W2 is zero in exact
    // arithmetic and only rounding noise is left.
    let n = |m: &ComplexMatrix| m.frobenius_norm();
    let scale = (n(a) * n(w)).powi(2);
    let wa_coupling = &(&cp.w1 * &cp.a2) + &(&cp.w2 * &cp.a3);
    let block = &(&wa_coupling * &cp.w3) * &cp.a3;
    let block_condition = ctx.judge_scaled(n(&block), scale);

    let aw_coupling = &(&cp.a1 * &cp.w2) + &(&cp.a2 * &cp.w3);
    let aw_block = &(&aw_coupling * &cp.a3) * &cp.w3;
    let aw_block_condition = ctx.judge_scaled(n(&aw_block), scale);

    let square = square_identity(&wa, ctx)?;
    let aw_square = square_identity(&aw, ctx)?;
    let equals_wdrazin = ctx.compare(&x, &w_drazin(a, w, ctx)?);

    let report = CommutationReport {
        commutes: commutes.within,
        block_condition: block_condition.within,
        square_identity: square.within,
        aw_square_identity: aw_square.within,
        aw_block_condition: aw_block_condition.within,
        equals_wdrazin: equals_wdrazin.within,
        residuals: CommutationResiduals {
            commutes,
            block_condition,
            square_identity: square,
            aw_square_identity: aw_square,
            aw_block_condition,
            equals_wdrazin,
        },
    };
    if report.commutes != report.block_condition || report.commutes != report.square_identity {
        return Err(Error::EquivalenceViolation(format!(
            "commutes={} (residual {:.3e}), block condition={} ({:.3e}), square identity={} ({:.3e})",
            report.commutes,
            commutes.relative,
            report.block_condition,
            block_condition.relative,
            report.square_identity,
            square.relative
        )));
    }
    if report.aw_square_identity != report.aw_block_condition {
        return Err(Error::EquivalenceViolation(format!(
            "AW square identity={} (residual {:.3e}), AW block condition={} ({:.3e})",
            report.aw_square_identity, aw_square.relative, report.aw_block_condition, aw_block_condition.relative
        )));
    }
    if report.commutes && !report.equals_wdrazin {
        return Err(Error::EquivalenceViolation(format!(
            "commuting pair whose weighted weak group and W-weighted Drazin inverses differ (residual {:.3e})",
            equals_wdrazin.relative
        )));
    }
    Ok(report)
}
