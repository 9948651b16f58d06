use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ComplexMatrix;

/// Default relative singular-value cutoff. The machine-precision cutoff
/// `max(rows, cols) * eps` sits inside the rounding noise of products like
/// `AW` once they are pushed through a few powers.
pub const DEFAULT_RANK_RTOL: f64 = 1e-12;

/// Tolerances and conventions shared by every rank decision and identity
/// check in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericContext {
    /// Relative singular-value cutoff. `None` means `max(rows, cols) * eps`
    /// of the matrix being ranked.
    pub rank_rtol: Option<f64>,
    /// Relative residual threshold for identity checks.
    pub eq_rtol: f64,
    /// Absolute floor added to every identity check.
    pub eq_atol: f64,
    /// Cap on the index search. `None` means the matrix dimension.
    pub max_index: Option<usize>,
}

impl Default for NumericContext {
    fn default() -> Self {
        Self {
            rank_rtol: Some(DEFAULT_RANK_RTOL),
            eq_rtol: 1e-8,
            eq_atol: 1e-12,
            max_index: None,
        }
    }
}

/// Outcome of comparing two quantities: the raw Frobenius distance, the
/// normalizing scale, and the derived relative value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub absolute: f64,
    pub relative: f64,
    pub within: bool,
}

impl NumericContext {
    pub fn with_eq_rtol(mut self, eq_rtol: f64) -> Self {
        self.eq_rtol = eq_rtol;
        self
    }

    pub fn with_rank_rtol(mut self, rank_rtol: f64) -> Self {
        self.rank_rtol = Some(rank_rtol);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64| {
            Err(Error::InvalidContext(format!("{name} must be finite and >= 0, got {v}")))
        };
        if let Some(r) = self.rank_rtol {
            if !(r.is_finite() && r >= 0.0) {
                return bad("rank_rtol", r);
            }
        }
        if !(self.eq_rtol.is_finite() && self.eq_rtol >= 0.0) {
            return bad("eq_rtol", self.eq_rtol);
        }
        if !(self.eq_atol.is_finite() && self.eq_atol >= 0.0) {
            return bad("eq_atol", self.eq_atol);
        }
        if self.max_index == Some(0) {
            return Err(Error::InvalidContext("max_index must be >= 1".into()));
        }
        Ok(())
    }

    pub fn rank_cutoff(&self, rows: usize, cols: usize) -> f64 {
        self.rank_rtol
            .unwrap_or(rows.max(cols) as f64 * f64::EPSILON)
    }

    pub fn index_cap(&self, dim: usize) -> usize {
        self.max_index.unwrap_or(dim.max(1))
    }

    /// `diff <= eq_atol + eq_rtol * (1 + scale)`, reported with the relative
    /// value `diff / (1 + scale)`.
    pub fn judge(&self, diff: f64, scale: f64) -> Residual {
        Residual {
            absolute: diff,
            relative: diff / (1.0 + scale),
            within: diff <= self.eq_atol + self.eq_rtol * (1.0 + scale),
        }
    }

    /// `diff <= eq_atol + eq_rtol * scale`, for quantities that vanish
    /// exactly in theory and are compared against the size of their inputs.
    pub fn judge_scaled(&self, diff: f64, scale: f64) -> Residual {
        Residual {
            absolute: diff,
            relative: if scale > 0.0 { diff / scale } else { diff },
            within: diff <= self.eq_atol + self.eq_rtol * scale,
        }
    }

    /// Residual-based equality `||x - y||_F <= atol + rtol (1 + ||x||_F + ||y||_F)`.
    ///
    /// Panics if the shapes differ.
    pub fn compare(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> Residual {
        assert_eq!(x.shape(), y.shape(), "comparing matrices of different shape");
        let diff = (x - y).frobenius_norm();
        self.judge(diff, x.frobenius_norm() + y.frobenius_norm())
    }

    pub fn approx_eq(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> bool {
        x.shape() == y.shape() && self.compare(x, y).within
    }

    /// Checks `x ≈ 0` relative to an externally supplied scale.
    pub fn vanishes(&self, x: &ComplexMatrix, scale: f64) -> Residual {
        self.judge(x.frobenius_norm(), scale)
    }
}

/// Relative Frobenius distance `||x - y|| / (1 + ||x|| + ||y||)`.
pub fn relative_distance(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    (x - y).frobenius_norm() / (1.0 + x.frobenius_norm() + y.frobenius_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoffs() {
        let ctx = NumericContext::default();
        assert_eq!(ctx.rank_cutoff(3, 5), DEFAULT_RANK_RTOL);
        let tight = NumericContext { rank_rtol: None, ..ctx };
        assert_eq!(tight.rank_cutoff(3, 5), 5.0 * f64::EPSILON);
        assert_eq!(ctx.with_rank_rtol(1e-9).rank_cutoff(3, 5), 1e-9);
    }

    #[test]
    fn validation_rejects_negative_and_zero_cap() {
        assert!(NumericContext::default().validate().is_ok());
        assert!(NumericContext::default().with_eq_rtol(-1.0).validate().is_err());
        let ctx = NumericContext {
            max_index: Some(0),
            ..Default::default()
        };
        assert!(ctx.validate().is_err());
    }

    #[test]
    fn comparison_is_residual_based() {
        let ctx = NumericContext::default();
        let x = ComplexMatrix::identity(2);
        let y = x.scale(1.0 + 1e-12);
        assert!(ctx.approx_eq(&x, &y));
        assert!(!ctx.approx_eq(&x, &x.scale(1.0 + 1e-6)));
    }
}
