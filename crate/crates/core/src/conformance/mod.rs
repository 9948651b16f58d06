//! Random pairs `(A, W)` with planted block structure, their closed-form
//! inverses, and the suite that checks every identity on them.
//!
//! A pair is built backwards from its canonical form: random unitary frames
//! `[p1|p2]`, `[q1|q2]`, invertible `A1`, `W1`, arbitrary `A2`, `W2`, and a
//! nilpotent pair `A3`, `W3` sharing one triangular flag (`A3` strictly upper,
//! `W3` upper), so that both `A3 W3` and `W3 A3` are strictly upper
//! triangular.

mod suite;

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub use suite::{run_suite, run_suite_with_jobs, CheckStats, SuiteFailure, SuiteReport};

use crate::error::{Error, Result};
use crate::numeric::{
    condition_number, invert, singular_values, svd, ComplexMatrix, NumericContext, SubspaceBasis,
};
use crate::spectral::{index, CanonicalPair};

/// Largest accepted condition number of a drawn `A1` or `W1`.
pub const CONDITION_LIMIT: f64 = 1e6;
/// Largest accepted [`GroundTruth::drazin_condition`] of a generated pair.
pub const DRAZIN_CONDITION_LIMIT: f64 = 1e2;
/// Rank cutoffs between which a generated pair must have no singular value
/// that decides its index.
pub const RESOLUTION_BAND: (f64, f64) = (1e-13, 1e-9);
/// Draws attempted before giving up with [`Error::DegenerateDraw`].
pub const MAX_ATTEMPTS: usize = 100;

/// Structure planted into a generated pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Plant {
    /// `A2 = 0`
    A2Zero,
    /// `W2 = 0`
    W2Zero,
    /// `W1 A2 + W2 A3 = 0`, via `A2 = -W1^{-1} W2 A3`.
    CommutingCondition,
    /// `A1 W2 + A2 W3 = 0`, via `W2 = -A1^{-1} A2 W3`.
    AwCommutingCondition,
    /// The suite derives only relation triples on which the relations hold.
    RelationPositive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub core_dim: usize,
    pub nil_dim_x: usize,
    pub nil_dim_y: usize,
    pub magnitude: f64,
    #[serde(default)]
    pub plant: BTreeSet<Plant>,
}

impl GeneratorSpec {
    pub fn new(core_dim: usize, nil_dim_x: usize, nil_dim_y: usize) -> Self {
        Self {
            core_dim,
            nil_dim_x,
            nil_dim_y,
            magnitude: 1.0,
            plant: BTreeSet::new(),
        }
    }

    pub fn with_plant(mut self, p: Plant) -> Self {
        self.plant.insert(p);
        self
    }

    pub fn has(&self, p: Plant) -> bool {
        self.plant.contains(&p)
    }

    /// `(rows, cols)` of `A`.
    pub fn shape(&self) -> (usize, usize) {
        (self.core_dim + self.nil_dim_y, self.core_dim + self.nil_dim_x)
    }

    pub fn validate(&self) -> Result<()> {
        if self.core_dim == 0 {
            return Err(Error::InvalidSpec("core_dim must be at least 1".into()));
        }
        if !(self.magnitude.is_finite() && self.magnitude > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "magnitude must be positive and finite, got {}",
                self.magnitude
            )));
        }
        Ok(())
    }

    /// A fixed list of 24 specs with core dimension 1..=6, nilpotent
    /// dimensions 0..=4 and every plant combination in rotation.
    pub fn mixed_corpus() -> Vec<GeneratorSpec> {
        use Plant::*;
        let plants: [&[Plant]; 8] = [
            &[],
            &[A2Zero],
            &[W2Zero],
            &[A2Zero, W2Zero],
            &[CommutingCondition],
            &[AwCommutingCondition],
            &[CommutingCondition, AwCommutingCondition],
            &[RelationPositive],
        ];
        (0..24)
            .map(|i| {
                let mut s = GeneratorSpec::new(1 + i % 6, (i * 2 + 2) % 5, (i * 3 + 1) % 5);
                s.magnitude = [1.0, 2.0, 0.5][i % 3];
                s.plant = plants[i % 8].iter().copied().collect();
                if s.has(RelationPositive) {
                    // two-sided partners need W3 without full row rank
                    let (lo, hi) = (s.nil_dim_x.min(s.nil_dim_y), s.nil_dim_x.max(s.nil_dim_y));
                    s.nil_dim_x = (hi + 1).min(4);
                    s.nil_dim_y = lo.max(1).min(s.nil_dim_x - 1);
                }
                s
            })
            .collect()
    }
}

/// A generated pair with its planted data and closed-form inverses.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub spec: GeneratorSpec,
    pub pair: CanonicalPair,
    pub a: ComplexMatrix,
    pub w: ComplexMatrix,
    /// `[[(W1A1W1)^{-1}, (A1W1)^{-2}(A2 + W1^{-1}W2A3)], [0, 0]]`
    pub wwg_closed_form: ComplexMatrix,
    /// `[[(W1A1W1)^{-1}, W1^{-1}U], [0, 0]]`
    pub wdrazin_closed_form: ComplexMatrix,
    /// `[[(W1A1W1)^{-1}, 0], [0, 0]]`
    pub wcoreep_closed_form: ComplexMatrix,
}

impl GroundTruth {
    /// Whether the rank sequences of the powers of `AW`, `WA` and their
    /// squares come out
    /// the same at every cutoff in [`RESOLUTION_BAND`], with the planted
    /// core dimension as stable rank. Pairs failing this have a nilpotent
    /// link too weak to tell apart from rounding.
    pub fn well_resolved(&self) -> bool {
        let (lo, hi) = RESOLUTION_BAND;
        let r = self.spec.core_dim;
        let (aw, wa) = (&self.a * &self.w, &self.w * &self.a);
        [&aw * &aw, &wa * &wa, aw, wa].iter().all(|m| {
            let at = |rtol: f64| index(m, &NumericContext::default().with_rank_rtol(rtol)).ok();
            match (at(lo), at(hi)) {
                (Some(x), Some(y)) => x == y && x.stable_rank == r,
                _ => false,
            }
        })
    }

    /// `max(||AW|| ||(AW)^d||, ||WA|| ||(WA)^d||)` in the spectral norm,
    /// computed from the planted blocks. It bounds how far rounding in `A`
    /// and `W` can move the Drazin-type inverses.
    pub fn drazin_condition(&self) -> f64 {
        let norm = |m: &ComplexMatrix| singular_values(m).first().copied().unwrap_or(0.0);
        let side = |prod: ComplexMatrix, d: Result<ComplexMatrix>| match d {
            Ok(d) => norm(&prod) * norm(&d),
            Err(_) => f64::INFINITY,
        };
        side(&self.a * &self.w, self.pair.aw_drazin()).max(side(&self.w * &self.a, self.pair.wa_drazin()))
    }
}

/// Deterministic generator for trial `stream` under `seed`.
pub(crate) fn trial_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, magnitude: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(
            rng.random_range(-magnitude..=magnitude),
            rng.random_range(-magnitude..=magnitude),
        )
    })
}

/// Random matrix whose entries `(i, j)` are zero unless `keep(i, j)`.
fn random_patterned(
    rng: &mut impl Rng,
    rows: usize,
    cols: usize,
    magnitude: f64,
    keep: impl Fn(usize, usize) -> bool,
) -> ComplexMatrix {
    let full = random_matrix(rng, rows, cols, magnitude);
    ComplexMatrix::from_fn(rows, cols, |i, j| if keep(i, j) { full.get(i, j) } else { Complex64::new(0.0, 0.0) })
}

/// Unitary polar factor of a random square matrix.
pub(crate) fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let d = svd(&random_matrix(rng, n, n, 1.0));
    &d.u * &d.v_adjoint
}

/// A random square matrix with condition number at most [`CONDITION_LIMIT`].
pub(crate) fn random_invertible(rng: &mut impl Rng, n: usize, magnitude: f64, name: &str) -> Result<ComplexMatrix> {
    for _ in 0..MAX_ATTEMPTS {
        let m = random_matrix(rng, n, n, magnitude);
        if condition_number(&m) <= CONDITION_LIMIT {
            return Ok(m);
        }
    }
    Err(Error::DegenerateDraw {
        attempts: MAX_ATTEMPTS,
        reason: format!("{name} condition number above {CONDITION_LIMIT:e}"),
    })
}

fn split_frames(u: &ComplexMatrix, r: usize, ctx: &NumericContext) -> (SubspaceBasis, SubspaceBasis) {
    let n = u.cols();
    (
        SubspaceBasis::from_orthonormal(u.columns(0, r), ctx),
        SubspaceBasis::from_orthonormal(u.columns(r, n - r), ctx),
    )
}

/// Draws a pair for `spec` from the stream `(seed, 0)`.
pub fn generate_pair(spec: &GeneratorSpec, seed: u64) -> Result<GroundTruth> {
    generate_with(spec, &mut trial_rng(seed, 0))
}

/// The pair drawn by trial `trial` of a suite run under `seed`.
pub fn generate_trial(spec: &GeneratorSpec, seed: u64, trial: u64) -> Result<GroundTruth> {
    generate_with(spec, &mut trial_rng(seed, trial))
}

/// Draws a pair for `spec` from an explicit generator.
///
/// Whole pairs are redrawn while their [`GroundTruth::drazin_condition`]
/// exceeds [`DRAZIN_CONDITION_LIMIT`] or they are not
/// [`GroundTruth::well_resolved`].
pub fn generate_with(spec: &GeneratorSpec, rng: &mut impl Rng) -> Result<GroundTruth> {
    spec.validate()?;
    for _ in 0..MAX_ATTEMPTS {
        let gt = draw(spec, rng)?;
        if gt.drazin_condition() <= DRAZIN_CONDITION_LIMIT && gt.well_resolved() {
            return Ok(gt);
        }
    }
    Err(Error::DegenerateDraw {
        attempts: MAX_ATTEMPTS,
        reason: format!(
            "no draw with Drazin condition number below {DRAZIN_CONDITION_LIMIT:e} and a resolved index"
        ),
    })
}

fn draw(spec: &GeneratorSpec, rng: &mut impl Rng) -> Result<GroundTruth> {
    let ctx = NumericContext::default();
    let (r, nx, ny, mag) = (spec.core_dim, spec.nil_dim_x, spec.nil_dim_y, spec.magnitude);

    let (p1, p2) = split_frames(&random_unitary(rng, r + nx), r, &ctx);
    let (q1, q2) = split_frames(&random_unitary(rng, r + ny), r, &ctx);

    let a1 = random_invertible(rng, r, mag, "A1")?;
    let w1 = random_invertible(rng, r, mag, "W1")?;
    let mut a2 = random_matrix(rng, r, nx, mag);
    let mut w2 = random_matrix(rng, r, ny, mag);
    // shared flag: A3 strictly upper, W3 upper
    let a3 = random_patterned(rng, ny, nx, mag, |i, j| j > i);
    let w3 = random_patterned(rng, nx, ny, mag, |j, l| l >= j);

    if spec.has(Plant::A2Zero) {
        a2 = ComplexMatrix::zeros(r, nx);
    }
    if spec.has(Plant::W2Zero) {
        w2 = ComplexMatrix::zeros(r, ny);
    }
    let commuting = spec.has(Plant::CommutingCondition);
    let aw_commuting = spec.has(Plant::AwCommutingCondition);
    if commuting && aw_commuting {
        a2 = ComplexMatrix::zeros(r, nx);
        w2 = ComplexMatrix::zeros(r, ny);
    } else if commuting {
        if spec.has(Plant::A2Zero) {
            w2 = ComplexMatrix::zeros(r, ny);
        }
        a2 = -&(&(&invert(&w1, &ctx)? * &w2) * &a3);
    } else if aw_commuting {
        if spec.has(Plant::W2Zero) {
            a2 = ComplexMatrix::zeros(r, nx);
        }
        w2 = -&(&(&invert(&a1, &ctx)? * &a2) * &w3);
    }

    let pair = CanonicalPair::from_blocks(p1, p2, q1, q2, a1, a2, a3, w1, w2, w3)?;
    let a = pair.assemble_a();
    let w = pair.assemble_w();

    let w1_inv = invert(&pair.w1, &ctx)?;
    let waw_inv = invert(&(&(&pair.w1 * &pair.a1) * &pair.w1), &ctx)?;
    let aw_inv = invert(&(&pair.a1 * &pair.w1), &ctx)?;
    let wwg_top = &(&aw_inv * &aw_inv) * &(&pair.a2 + &(&(&w1_inv * &pair.w2) * &pair.a3));
    let wwg_closed_form = pair.lift_xy_top(&waw_inv, &wwg_top);
    let wdrazin_closed_form = pair.lift_xy_top(&waw_inv, &(&w1_inv * &pair.u));
    let wcoreep_closed_form = pair.lift_xy_top(&waw_inv, &ComplexMatrix::zeros(r, nx));

    Ok(GroundTruth {
        spec: spec.clone(),
        pair,
        a,
        w,
        wwg_closed_form,
        wdrazin_closed_form,
        wcoreep_closed_form,
    })
}

/// Kinds of second argument produced by [`lemma_pairs`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LemmaCase {
    /// Unrelated random `B`.
    Random,
    /// `B = A + E` with `E` vanishing on `R(A^d)`: the first part holds.
    FirstPart,
    /// `B = A + E` with `A^ⓓ A E = 0`: the second part holds.
    SecondPart,
    /// Both perturbations: `A ≤^⊗ B`.
    Both,
}

/// Square pairs `(A, B)` of size at most 8 for the relation-equivalence
/// lemma. `A = Q [[A11, A12], [0, N]] Q^*` with `A11` invertible and `N`
/// strictly upper triangular; `B` cycles through the [`LemmaCase`]s.
pub fn lemma_pairs(count: usize, seed: u64) -> Result<Vec<(LemmaCase, ComplexMatrix, ComplexMatrix)>> {
    let ctx = NumericContext::default();
    let cases = [LemmaCase::Random, LemmaCase::FirstPart, LemmaCase::SecondPart, LemmaCase::Both];
    (0..count)
        .map(|i| {
            let rng = &mut trial_rng(seed, i as u64);
            let r = rng.random_range(1..=4usize);
            let k = rng.random_range(0..=4usize);
            let n = r + k;
            let q = random_unitary(rng, n);
            let a11 = random_invertible(rng, r, 1.0, "A11")?;
            let a12 = random_matrix(rng, r, k, 1.0);
            let nil = random_patterned(rng, k, k, 1.0, |i, j| j > i);
            let a = &(&q * &ComplexMatrix::from_blocks(&a11, &a12, &ComplexMatrix::zeros(k, r), &nil)) * &q.adjoint();
            let q1 = q.columns(0, r);
            let q2 = q.columns(r, k);
            let case = cases[i % cases.len()];
            // E1 kills q1: E1 = F q2^*
            let e1 = &random_matrix(rng, n, k, 1.0) * &q2.adjoint();
            // E2 = Q [-A11^{-1} A12 F; F] G^* makes A E2 land in q2
            let f = random_matrix(rng, k, n, 1.0);
            let top = -&(&(&invert(&a11, &ctx)? * &a12) * &f);
            let e2 = &q1 * &top + &q2 * &f;
            let b = match case {
                LemmaCase::Random => random_matrix(rng, n, n, 1.0),
                LemmaCase::FirstPart => &a + &e1,
                LemmaCase::SecondPart => &a + &e2,
                LemmaCase::Both => {
                    // second-part shape, killing q1 as well
                    let g = random_matrix(rng, k, k, 1.0);
                    let top = -&(&(&invert(&a11, &ctx)? * &a12) * &g);
                    &a + &(&(&q1 * &top + &q2 * &g) * &q2.adjoint())
                }
            };
            Ok((case, a, b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::numerical_rank;

    #[test]
    fn shapes_follow_the_spec() {
        let spec = GeneratorSpec::new(2, 3, 1);
        let gt = generate_pair(&spec, 1).unwrap();
        assert_eq!(gt.a.shape(), (3, 5));
        assert_eq!(gt.w.shape(), (5, 3));
        assert_eq!(spec.shape(), (3, 5));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GeneratorSpec::new(2, 2, 2).with_plant(Plant::A2Zero);
        let x = generate_pair(&spec, 42).unwrap();
        let y = generate_pair(&spec, 42).unwrap();
        assert_eq!(x.a, y.a);
        assert_eq!(x.w, y.w);
        assert_eq!(x.wwg_closed_form, y.wwg_closed_form);
        let z = generate_pair(&spec, 43).unwrap();
        assert_ne!(x.a, z.a);
    }

    #[test]
    fn nilpotent_products() {
        let gt = generate_pair(&GeneratorSpec::new(2, 3, 4), 5).unwrap();
        let cp = &gt.pair;
        assert_eq!((&cp.a3 * &cp.w3).pow(4).max_abs(), 0.0);
        assert_eq!((&cp.w3 * &cp.a3).pow(3).max_abs(), 0.0);
        assert!(numerical_rank(&cp.a1, &NumericContext::default()) == 2);
    }

    #[test]
    fn plants_are_applied() {
        let ctx = NumericContext::default();
        let gt = generate_pair(&GeneratorSpec::new(2, 2, 2).with_plant(Plant::CommutingCondition), 3).unwrap();
        let cp = &gt.pair;
        let coupling = &(&cp.w1 * &cp.a2) + &(&cp.w2 * &cp.a3);
        assert!(coupling.max_abs() < 1e-12);
        let gt = generate_pair(&GeneratorSpec::new(2, 2, 2).with_plant(Plant::AwCommutingCondition), 3).unwrap();
        let cp = &gt.pair;
        let coupling = &(&cp.a1 * &cp.w2) + &(&cp.a2 * &cp.w3);
        assert!(coupling.max_abs() < 1e-12);
        let both = GeneratorSpec::new(2, 2, 2)
            .with_plant(Plant::CommutingCondition)
            .with_plant(Plant::AwCommutingCondition);
        let cp = generate_pair(&both, 3).unwrap().pair;
        assert_eq!(cp.a2.max_abs() + cp.w2.max_abs(), 0.0);
        assert!(ctx.eq_rtol > 0.0);
    }

    #[test]
    fn invalid_specs() {
        assert!(matches!(generate_pair(&GeneratorSpec::new(0, 1, 1), 0), Err(Error::InvalidSpec(_))));
        let mut s = GeneratorSpec::new(1, 1, 1);
        s.magnitude = 0.0;
        assert!(matches!(generate_pair(&s, 0), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn spec_serde_names() {
        let s = GeneratorSpec::new(1, 2, 3).with_plant(Plant::AwCommutingCondition);
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("AW_COMMUTING_CONDITION"), "{j}");
        assert_eq!(serde_json::from_str::<GeneratorSpec>(&j).unwrap(), s);
    }

    #[test]
    fn unitary_frames() {
        let u = random_unitary(&mut trial_rng(9, 0), 5);
        let r = &(&u.adjoint() * &u) - &ComplexMatrix::identity(5);
        assert!(r.max_abs() < 1e-13);
    }
}
