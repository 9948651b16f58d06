use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ginverse::weighted_core_ep;
use crate::numeric::{
    null_basis_with_rank, oblique_projector, orthogonal_projector, range_basis_with_dim,
    ComplexMatrix, NumericContext, Residual,
};
use crate::spectral::{core_subspace, validate_pair, w_drazin};

/// Equation systems whose unique solution is the weighted weak group inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Characterization {
    /// `AWBWB = B`, `AWB = A^{ⓓ,W} W A`.
    System,
    /// `WAWB = P_{R(W A^{d,W}), N(A^{ⓓ,W} W A)}`, `R(B) ⊆ R(A^{d,W})`.
    Geometric,
    /// `A^{ⓓ,W} WAWB = B`, `AWB = A^{ⓓ,W} W A`.
    CharII,
    /// `BWAWB = B`, `AWB = A^{ⓓ,W} W A`, `BWA^{ⓓ,W} = A^{ⓓ,W} W A^{ⓓ,W}`.
    CharIII,
    /// `BWAWB = B`, `AWB = A^{ⓓ,W} W A`, `BWA^{d,W} = A^{d,W} W A^{d,W}`.
    CharIV,
    /// `CharIV` with the last equation replaced by `B W (AW)^{k+1} = (AW)^k`,
    /// `k = ind(AW)`.
    CharIVPower,
}

impl Characterization {
    pub const ALL: [Characterization; 6] = [
        Characterization::System,
        Characterization::Geometric,
        Characterization::CharII,
        Characterization::CharIII,
        Characterization::CharIV,
        Characterization::CharIVPower,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedResidual {
    pub name: String,
    pub residual: Residual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationOutcome {
    pub variant: Characterization,
    pub holds: bool,
    pub residuals: Vec<NamedResidual>,
}

impl CharacterizationOutcome {
    pub fn max_relative(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| r.residual.relative)
            .fold(0.0, f64::max)
    }
}

/// Evaluates the equations of `variant` at `B`.
pub fn characterization_check(
    a: &ComplexMatrix,
    w: &ComplexMatrix,
    b: &ComplexMatrix,
    ctx: &NumericContext,
    variant: Characterization,
) -> Result<CharacterizationOutcome> {
    validate_pair(a, w, ctx)?;
    if b.shape() != a.shape() {
        return Err(Error::ShapeMismatch(format!(
            "B must have the shape of A ({}x{}), got {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let wcep = weighted_core_ep(a, w, ctx)?;
    let aw = a * w;
    let awb = &aw * b;
    let bw = b * w;
    let mut residuals = Vec::new();
    let mut push = |name: &str, residual: Residual| {
        residuals.push(NamedResidual {
            name: name.to_string(),
            residual,
        })
    };
    let eq_awb = || ctx.compare(&awb, &(&(&wcep * w) * a));
    let eq_bwawb = || ctx.compare(&(&(&bw * &aw) * b), b);

    match variant {
        Characterization::System => {
            push("AWBWB=B", ctx.compare(&(&(&awb * w) * b), b));
            push("AWB=A^(cep,W)WA", eq_awb());
        }
        Characterization::Geometric => {
            let awd = w_drazin(a, w, ctx)?;
            let r = core_subspace(&aw, ctx)?.1.dim();
            let l = range_basis_with_dim(&(w * &awd), r, ctx)?;
            let m = null_basis_with_rank(&(&(&wcep * w) * a), r, ctx)?;
            let p = oblique_projector(&l, &m, ctx)?;
            push("WAWB=P", ctx.compare(&(&(w * &aw) * b), &p));
            let t = range_basis_with_dim(&awd, r, ctx)?;
            let outside = b - &(&orthogonal_projector(&t) * b);
            push(
                "R(B) in R(A^(d,W))",
                ctx.judge(outside.frobenius_norm(), b.frobenius_norm()),
            );
        }
        Characterization::CharII => {
            push("A^(cep,W)WAWB=B", ctx.compare(&(&(&wcep * w) * &awb), b));
            push("AWB=A^(cep,W)WA", eq_awb());
        }
        Characterization::CharIII => {
            push("BWAWB=B", eq_bwawb());
            push("AWB=A^(cep,W)WA", eq_awb());
            push(
                "BWA^(cep,W)=A^(cep,W)WA^(cep,W)",
                ctx.compare(&(&bw * &wcep), &(&(&wcep * w) * &wcep)),
            );
        }
        Characterization::CharIV => {
            let awd = w_drazin(a, w, ctx)?;
            push("BWAWB=B", eq_bwawb());
            push("AWB=A^(cep,W)WA", eq_awb());
            push(
                "BWA^(d,W)=A^(d,W)WA^(d,W)",
                ctx.compare(&(&bw * &awd), &(&(&awd * w) * &awd)),
            );
        }
        Characterization::CharIVPower => {
            let (idx, _) = core_subspace(&aw, ctx)?;
            let k = idx.index as u32;
            let awk = aw.pow(k);
            push("BWAWB=B", eq_bwawb());
            push("AWB=A^(cep,W)WA", eq_awb());
            push("BW(AW)^(k+1)=(AW)^k", ctx.compare(&(&(&bw * &aw) * &awk), &awk));
        }
    }
    let holds = residuals.iter().all(|r| r.residual.within);
    Ok(CharacterizationOutcome {
        variant,
        holds,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ginverse::weighted_weak_group;

    fn ctx() -> NumericContext {
        NumericContext::default()
    }

    fn example_a() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[1.0, 1.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    }

    fn weight() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[2.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
    }

    #[test]
    fn solution_satisfies_every_variant() {
        let (a, w) = (example_a(), weight());
        let x = weighted_weak_group(&a, &w, &ctx()).unwrap();
        for v in Characterization::ALL {
            let out = characterization_check(&a, &w, &x, &ctx(), v).unwrap();
            assert!(out.holds, "{v:?}: {out:?}");
        }
    }

    #[test]
    fn zero_fails_every_variant() {
        let (a, w) = (example_a(), weight());
        let z = ComplexMatrix::zeros(3, 3);
        for v in Characterization::ALL {
            assert!(!characterization_check(&a, &w, &z, &ctx(), v).unwrap().holds, "{v:?}");
        }
    }

    #[test]
    fn w_drazin_fails_the_system_without_commutation() {
        let a = example_a();
        let id = ComplexMatrix::identity(3);
        let ad = w_drazin(&a, &id, &ctx()).unwrap();
        let out = characterization_check(&a, &id, &ad, &ctx(), Characterization::System).unwrap();
        assert!(!out.holds);
    }

    #[test]
    fn shape_checked() {
        let err = characterization_check(
            &example_a(),
            &weight(),
            &ComplexMatrix::zeros(2, 3),
            &ctx(),
            Characterization::System,
        );
        assert!(matches!(err, Err(Error::ShapeMismatch(_))));
    }
}
