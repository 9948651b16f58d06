use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_with, random_matrix, trial_rng, GeneratorSpec, GroundTruth, Plant};
use crate::error::{Error, Result};
use crate::ginverse::{
    characterization_check, commutation_analysis, outer_inverse_prescribed, weak_group,
    weighted_core_ep, weighted_weak_group, wwg_representations, Characterization,
};
use crate::numeric::{
    invert, max_principal_angle_sin, null_basis, null_basis_with_rank, orthogonal_projector,
    range_basis, range_basis_with_dim, ComplexMatrix, NumericContext, SubspaceBasis,
};
use crate::relations::{lemma_equiv_suite, relation_block_analysis, wwg_below, Side};
use crate::spectral::{canonical_pair, drazin, index, w_drazin};

/// A planted block product counts as nonzero only above this relative size.
const NEGATIVE_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckStats {
    pub evaluated: usize,
    pub passed: usize,
    pub failed: usize,
    pub max_residual: f64,
    pub min_residual: f64,
}

impl CheckStats {
    fn add(&mut self, passed: bool, residual: f64) {
        if self.evaluated == 0 {
            self.max_residual = residual;
            self.min_residual = residual;
        } else {
            self.max_residual = self.max_residual.max(residual);
            self.min_residual = self.min_residual.min(residual);
        }
        self.evaluated += 1;
        if passed {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteFailure {
    pub trial: usize,
    pub check: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub trials: usize,
    pub seed: u64,
    pub tolerances: NumericContext,
    pub checks: BTreeMap<String, CheckStats>,
    pub failures: Vec<SuiteFailure>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn check(&self, name: &str) -> Option<&CheckStats> {
        self.checks.get(name)
    }
}

struct Record {
    check: &'static str,
    passed: bool,
    residual: f64,
    detail: Option<String>,
}

#[derive(Default)]
struct Trial {
    records: Vec<Record>,
}

impl Trial {
    fn push(&mut self, check: &'static str, passed: bool, residual: f64, detail: impl FnOnce() -> String) {
        let detail = (!passed).then(detail);
        self.records.push(Record {
            check,
            passed,
            residual,
            detail,
        });
    }

    fn error(&mut self, check: &'static str, e: &Error) {
        self.push(check, false, f64::NAN, || format!("error: {e}"));
    }

    /// Runs `f`; an error is recorded as a failure of `check`.
    fn guard(&mut self, check: &'static str, f: impl FnOnce(&mut Trial) -> Result<()>) {
        if let Err(e) = f(self) {
            self.error(check, &e);
        }
    }
}

/// Runs `trials` trials; trial `t` uses `specs[t % specs.len()]` and the
/// random stream `t` of `seed`.
pub fn run_suite(specs: &[GeneratorSpec], trials: usize, seed: u64, ctx: &NumericContext) -> Result<SuiteReport> {
    run_suite_with_jobs(specs, trials, seed, ctx, 1)
}

/// As [`run_suite`], spreading trials over `jobs` threads. The report does
/// not depend on `jobs`.
pub fn run_suite_with_jobs(
    specs: &[GeneratorSpec],
    trials: usize,
    seed: u64,
    ctx: &NumericContext,
    jobs: usize,
) -> Result<SuiteReport> {
    if trials == 0 {
        return Err(Error::InvalidSpec("trials must be at least 1".into()));
    }
    if specs.is_empty() {
        return Err(Error::InvalidSpec("no generator specs given".into()));
    }
    for s in specs {
        s.validate()?;
    }
    ctx.validate()?;

    let one = |t: usize| run_trial(&specs[t % specs.len()], seed, t, ctx);
    let outcomes: Vec<Trial> = if jobs <= 1 {
        (0..trials).map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidSpec(format!("cannot start {jobs} workers: {e}")))?;
        pool.install(|| (0..trials).into_par_iter().map(one).collect())
    };

    let mut checks: BTreeMap<String, CheckStats> = BTreeMap::new();
    let mut failures = Vec::new();
    for (trial, outcome) in outcomes.into_iter().enumerate() {
        for r in outcome.records {
            checks.entry(r.check.to_string()).or_default().add(r.passed, r.residual);
            if let Some(detail) = r.detail {
                failures.push(SuiteFailure {
                    trial,
                    check: r.check.to_string(),
                    detail,
                });
            }
        }
    }
    Ok(SuiteReport {
        trials,
        seed,
        tolerances: *ctx,
        checks,
        failures,
    })
}

fn run_trial(spec: &GeneratorSpec, seed: u64, trial: usize, ctx: &NumericContext) -> Trial {
    let mut out = Trial::default();
    let rng = &mut trial_rng(seed, trial as u64);
    let gt = match generate_with(spec, rng) {
        Ok(gt) => gt,
        Err(e) => {
            out.error("generation", &e);
            return out;
        }
    };
    let x = match weighted_weak_group(&gt.a, &gt.w, ctx) {
        Ok(x) => x,
        Err(e) => {
            out.error("oracle.wwg", &e);
            return out;
        }
    };
    out.guard("spectral", |o| spectral_checks(o, &gt, ctx));
    out.guard("oracle", |o| oracle_checks(o, &gt, &x, ctx));
    out.guard("routes.agreement", |o| {
        let table = wwg_representations(&gt.a, &gt.w, ctx)?;
        let worst = table.max_pairwise_residual;
        o.push("routes.agreement", worst <= ctx.eq_rtol, worst, || {
            format!("max pairwise residual {worst:.3e}")
        });
        Ok(())
    });
    out.guard("system", |o| system_checks(o, &gt, &x, rng, ctx));
    out.guard("projector", |o| projector_checks(o, &gt, &x, ctx));
    out.guard("transfer", |o| transfer_checks(o, &gt, &x, ctx));
    out.guard("commutation.chains", |o| commutation_checks(o, &gt, ctx));
    out.guard("relations", |o| relation_checks(o, &gt, rng, ctx));
    out
}

fn rel_size(product: &ComplexMatrix, factors: &[&ComplexMatrix]) -> f64 {
    let scale: f64 = factors.iter().map(|m| m.frobenius_norm()).product();
    if scale == 0.0 {
        0.0
    } else {
        product.frobenius_norm() / scale
    }
}

fn compare_check(
    o: &mut Trial,
    ctx: &NumericContext,
    check: &'static str,
    x: &ComplexMatrix,
    y: &ComplexMatrix,
) {
    let r = ctx.compare(x, y);
    o.push(check, r.within, r.relative, || format!("relative residual {:.3e}", r.relative));
}

fn spectral_checks(o: &mut Trial, gt: &GroundTruth, ctx: &NumericContext) -> Result<()> {
    let (a, w) = (&gt.a, &gt.w);
    let cp = canonical_pair(a, w, ctx)?;
    compare_check(o, ctx, "spectral.reconstruction", &cp.assemble_a(), a);
    compare_check(o, ctx, "spectral.reconstruction", &cp.assemble_w(), w);

    let pairs: [(&SubspaceBasis, &SubspaceBasis); 4] = [
        (&cp.p1, &gt.pair.p1),
        (&cp.p2, &gt.pair.p2),
        (&cp.q1, &gt.pair.q1),
        (&cp.q2, &gt.pair.q2),
    ];
    let angle = pairs
        .iter()
        .map(|(x, y)| if x.dim() == y.dim() { max_principal_angle_sin(x, y) } else { f64::INFINITY })
        .fold(0.0, f64::max);
    // sines of principal angles are perturbed by the conditioning of the core
    let limit = ctx.eq_rtol * 100.0;
    o.push("spectral.principal_angles", angle <= limit, angle, || {
        format!("largest principal angle sine {angle:.3e}")
    });

    let (aw, wa) = (a * w, w * a);
    let (ia, iw) = (index(&aw, ctx)?.index, index(&wa, ctx)?.index);
    let (nx, ny) = (gt.spec.nil_dim_x, gt.spec.nil_dim_y);
    o.push("spectral.index_bound", ia <= ny + 1 && iw <= nx + 1, 0.0, || {
        format!("ind(AW) = {ia}, ind(WA) = {iw} with nilpotent dims ({nx}, {ny})")
    });

    compare_check(o, ctx, "spectral.series_reassembly", &cp.aw_drazin()?, &drazin(&aw, ctx)?);
    compare_check(o, ctx, "spectral.series_reassembly", &cp.wa_drazin()?, &drazin(&wa, ctx)?);

    let d = drazin(&aw, ctx)?;
    compare_check(o, ctx, "spectral.wdrazin_transfer", &(&(&d * &d) * a), &cp.w_drazin_blocks()?);
    Ok(())
}

fn oracle_checks(o: &mut Trial, gt: &GroundTruth, x: &ComplexMatrix, ctx: &NumericContext) -> Result<()> {
    compare_check(o, ctx, "oracle.wwg", x, &gt.wwg_closed_form);
    compare_check(o, ctx, "oracle.wdrazin", &w_drazin(&gt.a, &gt.w, ctx)?, &gt.wdrazin_closed_form);
    compare_check(o, ctx, "oracle.wcoreep", &weighted_core_ep(&gt.a, &gt.w, ctx)?, &gt.wcoreep_closed_form);
    Ok(())
}

fn system_checks(
    o: &mut Trial,
    gt: &GroundTruth,
    x: &ComplexMatrix,
    rng: &mut impl Rng,
    ctx: &NumericContext,
) -> Result<()> {
    let (a, w) = (&gt.a, &gt.w);
    let sys = characterization_check(a, w, x, ctx, Characterization::System)?;
    for r in &sys.residuals {
        o.push("system.defining", r.residual.within, r.residual.relative, || {
            format!("{}: relative residual {:.3e}", r.name, r.residual.relative)
        });
    }
    let waw = &(w * a) * w;
    compare_check(o, ctx, "system.outer_inverse_law", &(&(x * &waw) * x), x);

    // a perturbation of relative size 1e-2 must violate every variant
    let mut e = random_matrix(rng, x.rows(), x.cols(), 1.0);
    let en = e.frobenius_norm();
    if en > 0.0 {
        e = e.scale(1e-2 * (1.0 + x.frobenius_norm()) / en);
    }
    let y = x + &e;
    let mut iv = [[false; 2]; 2];
    for v in Characterization::ALL {
        let at_x = characterization_check(a, w, x, ctx, v)?;
        o.push("characterization.solution", at_x.holds, at_x.max_relative(), || {
            format!("{v:?} fails at the solution: {:?}", at_x.residuals)
        });
        let at_y = characterization_check(a, w, &y, ctx, v)?;
        o.push("characterization.uniqueness", !at_y.holds, at_y.max_relative(), || {
            format!("{v:?} accepts a perturbed solution")
        });
        match v {
            Characterization::CharIV => iv[0] = [at_x.holds, at_y.holds],
            Characterization::CharIVPower => iv[1] = [at_x.holds, at_y.holds],
            _ => {}
        }
    }
    o.push("characterization.char_iv_forms_agree", iv[0] == iv[1], 0.0, || {
        format!("drazin form {:?} vs power form {:?}", iv[0], iv[1])
    });
    Ok(())
}

fn idempotency(o: &mut Trial, ctx: &NumericContext, name: &str, e: &ComplexMatrix) {
    let r = ctx.compare(&(e * e), e);
    o.push("projector.idempotent", r.within, r.relative, || {
        format!("{name}: idempotency residual {:.3e}", r.relative)
    });
}

/// `E b = b` for a range frame `b`, or `E b = 0` for a null frame.
fn action(o: &mut Trial, ctx: &NumericContext, name: &str, e: &ComplexMatrix, b: &SubspaceBasis, fixes: bool) {
    let eb = e * b.frame();
    let r = if fixes {
        ctx.compare(&eb, b.frame())
    } else {
        ctx.vanishes(&eb, e.frobenius_norm())
    };
    let what = if fixes { "range" } else { "null space" };
    o.push("projector.action", r.within, r.relative, || {
        format!("{name} on its {what}: residual {:.3e}", r.relative)
    });
}

fn projector_checks(o: &mut Trial, gt: &GroundTruth, x: &ComplexMatrix, ctx: &NumericContext) -> Result<()> {
    let (a, w) = (&gt.a, &gt.w);
    let awd = w_drazin(a, w, ctx)?;
    let wcep = weighted_core_ep(a, w, ctx)?;
    let r = gt.spec.core_dim;
    let t = range_basis_with_dim(&awd, r, ctx)?;
    let l = range_basis_with_dim(&(w * &awd), r, ctx)?;
    let s = null_basis_with_rank(&(&(&wcep * w) * a), r, ctx)?;

    let awxw = &(&(a * w) * x) * w;
    let wawx = &(&(w * a) * w) * x;
    let xwaw = &(&(x * w) * a) * w;
    let wxwa = &(&(w * x) * w) * a;
    for (name, e) in [("AWXW", &awxw), ("WAWX", &wawx), ("XWAW", &xwaw), ("WXWA", &wxwa)] {
        idempotency(o, ctx, name, e);
    }
    action(o, ctx, "AWXW", &awxw, &t, true);
    action(o, ctx, "XWAW", &xwaw, &t, true);
    action(o, ctx, "WAWX", &wawx, &l, true);
    action(o, ctx, "WAWX", &wawx, &s, false);
    action(o, ctx, "WXWA", &wxwa, &l, true);

    let waw = &(w * a) * w;
    let prescribed = outer_inverse_prescribed(&waw, &t, &s, ctx)?;
    compare_check(o, ctx, "projector.prescribed_outer_inverse", &prescribed, x);
    Ok(())
}

/// Records a planted equivalence `direct <=> product = 0`. Products between
/// the tolerance and [`NEGATIVE_MARGIN`] are ambiguous and skipped.
fn planted(
    o: &mut Trial,
    ctx: &NumericContext,
    positive: &'static str,
    negative: &'static str,
    x: &ComplexMatrix,
    y: &ComplexMatrix,
    size: f64,
) {
    let r = ctx.compare(x, y);
    if size <= ctx.eq_rtol {
        o.push(positive, r.within, r.relative, || {
            format!("block product {size:.3e} vanishes but residual is {:.3e}", r.relative)
        });
    } else if size > NEGATIVE_MARGIN {
        o.push(negative, !r.within, r.relative, || {
            format!("block product {size:.3e} is nonzero but residual is {:.3e}", r.relative)
        });
    }
}

fn transfer_checks(o: &mut Trial, gt: &GroundTruth, x: &ComplexMatrix, ctx: &NumericContext) -> Result<()> {
    let (a, w, cp) = (&gt.a, &gt.w, &gt.pair);
    let (aw, wa) = (a * w, w * a);
    let g_aw = weak_group(&aw, ctx)?;
    let g_wa = weak_group(&wa, ctx)?;

    compare_check(o, ctx, "transfer.a", &(a * &(&g_wa * &g_wa)), x);
    compare_check(o, ctx, "product", &(&(&g_aw * a) * &g_wa), x);

    let b_i = &(&cp.w2 * &cp.a3) * &cp.w3;
    let size = rel_size(&b_i, &[&cp.w2, &cp.a3, &cp.w3]);
    planted(o, ctx, "transfer.b_i.positive", "transfer.b_i.negative", &g_aw, &(x * w), size);

    let b_ii = &(&cp.a2 * &cp.w3) * &cp.a3;
    let size = rel_size(&b_ii, &[&cp.a2, &cp.w3, &cp.a3]);
    planted(o, ctx, "transfer.b_ii.positive", "transfer.b_ii.negative", x, &(&(&g_aw * &g_aw) * a), size);
    Ok(())
}

fn commutation_checks(o: &mut Trial, gt: &GroundTruth, ctx: &NumericContext) -> Result<()> {
    let report = commutation_analysis(&gt.a, &gt.w, ctx)?;
    o.push("commutation.chains", true, report.residuals.commutes.relative, String::new);

    let cp = &gt.pair;
    let spec = &gt.spec;
    let planted_positive = spec.has(Plant::CommutingCondition)
        || (spec.has(Plant::A2Zero) && spec.has(Plant::W2Zero));
    let coupling = &(&cp.w1 * &cp.a2) + &(&cp.w2 * &cp.a3);
    let block = &(&coupling * &cp.w3) * &cp.a3;
    let n = |m: &ComplexMatrix| m.frobenius_norm();
    let scale = (n(&cp.w1) * n(&cp.a2) + n(&cp.w2) * n(&cp.a3)) * n(&cp.w3) * n(&cp.a3);
    let size = if scale == 0.0 { 0.0 } else { n(&block) / scale };

    if planted_positive {
        let ok = report.commutes && report.equals_wdrazin;
        o.push("commutation.positive", ok, report.residuals.equals_wdrazin.relative, || {
            format!("planted commuting pair: {report:?}")
        });
    } else if size > NEGATIVE_MARGIN {
        o.push("commutation.negative", !report.commutes, report.residuals.commutes.relative, || {
            format!("block condition {size:.3e} but the pair commutes")
        });
    }
    if spec.has(Plant::AwCommutingCondition) {
        let ok = report.aw_square_identity && report.aw_block_condition;
        o.push("commutation.aw_positive", ok, report.residuals.aw_square_identity.relative, || {
            format!("planted AW condition: {report:?}")
        });
    }
    Ok(())
}

/// `Y (I - W3 W3^†)`: rows annihilated on the right by `W3`.
fn left_annihilated(rng: &mut impl Rng, w3: &ComplexMatrix, rows: usize, mag: f64, ctx: &NumericContext) -> ComplexMatrix {
    let y = random_matrix(rng, rows, w3.rows(), mag);
    let p = orthogonal_projector(&range_basis(w3, ctx));
    &y - &(&y * &p)
}

/// Relation partners of `A` built from the planted blocks: one satisfying
/// the right relation, one the left, and with [`Plant::RelationPositive`]
/// one satisfying both.
fn relation_partners(
    gt: &GroundTruth,
    rng: &mut impl Rng,
    ctx: &NumericContext,
) -> Result<(ComplexMatrix, ComplexMatrix, Option<ComplexMatrix>)> {
    let cp = &gt.pair;
    let mag = gt.spec.magnitude;
    let (r, nx, ny) = (cp.core_dim(), cp.p2.dim(), cp.q2.dim());
    let w1_inv = invert(&cp.w1, ctx)?;
    let aw1_inv = invert(&(&cp.a1 * &cp.w1), ctx)?;
    let waw1_inv = invert(&(&(&cp.w1 * &cp.a1) * &cp.w1), ctx)?;

    // right: B1 = A1, B4 = 0, B2 solves the coupled condition
    let b3 = random_matrix(rng, ny, nx, mag);
    let d3 = &cp.a3 - &b3;
    let coupling = &(&cp.a1 * &cp.w2) + &(&cp.a2 * &cp.w3);
    let b2 = &(&cp.a2 + &(&(&aw1_inv * &coupling) * &d3)) + &left_annihilated(rng, &cp.w3, r, mag, ctx);
    let right = cp.lift_xy(&cp.a1, &b2, &ComplexMatrix::zeros(ny, r), &b3);

    // left: W3 B4 = 0, B1 and B2 determined by B4 and B3
    let null = null_basis(&cp.w3, ctx);
    let b4 = null.frame() * &random_matrix(rng, null.dim(), r, mag);
    let b1 = &cp.a1 - &(&(&w1_inv * &cp.w2) * &b4);
    let b3 = random_matrix(rng, ny, nx, mag);
    let d3 = &cp.a3 - &b3;
    let wa_coupling = &(&cp.w1 * &cp.a2) + &(&cp.w2 * &cp.a3);
    let b2 = &(&cp.a2 + &(&(&w1_inv * &cp.w2) * &d3)) + &(&(&(&waw1_inv * &wa_coupling) * &cp.w3) * &d3);
    let left = cp.lift_xy(&b1, &b2, &b4, &b3);

    let both = if gt.spec.has(Plant::RelationPositive) {
        // B4 = 0, B1 = A1 and B2 from the left system; the right system then
        // reduces to (A3 - B3) W3 = 0
        let z = left_annihilated(rng, &cp.w3, ny, mag, ctx);
        let b3 = &cp.a3 - &z;
        let b2 = &(&cp.a2 + &(&(&w1_inv * &cp.w2) * &z)) + &(&(&(&waw1_inv * &wa_coupling) * &cp.w3) * &z);
        Some(cp.lift_xy(&cp.a1, &b2, &ComplexMatrix::zeros(ny, r), &b3))
    } else {
        None
    };
    Ok((right, left, both))
}

fn relation_checks(o: &mut Trial, gt: &GroundTruth, rng: &mut impl Rng, ctx: &NumericContext) -> Result<()> {
    let (a, w) = (&gt.a, &gt.w);
    let (right, left, both) = relation_partners(gt, rng, ctx)?;
    let unrelated = random_matrix(rng, a.rows(), a.cols(), gt.spec.magnitude);

    let mut partners = vec![("right", &right), ("left", &left), ("random", &unrelated)];
    if let Some(b) = &both {
        partners.push(("both", b));
    }
    for (label, b) in &partners {
        let analysis = relation_block_analysis(a, w, b, ctx)?;
        let dr = analysis.direct_right;
        let dl = analysis.direct_left;
        o.push(
            "relations.right_agreement",
            analysis.right_agrees(),
            dr.left_residual.max(dr.right_residual),
            || format!("{label} partner: {:?}", analysis),
        );
        o.push(
            "relations.left_agreement",
            analysis.left_agrees(),
            dl.left_residual.max(dl.right_residual),
            || format!("{label} partner: {:?}", analysis),
        );
        match *label {
            "right" => o.push("relations.right_expected", dr.holds, dr.left_residual.max(dr.right_residual), || {
                format!("constructed right partner rejected: {dr:?}")
            }),
            "left" => o.push("relations.left_expected", dl.holds, dl.left_residual.max(dl.right_residual), || {
                format!("constructed left partner rejected: {dl:?}")
            }),
            "both" => {
                let v = wwg_below(a, w, b, ctx, Side::Both)?;
                o.push("relations.both_expected", v.holds, v.left_residual.max(v.right_residual), || {
                    format!("constructed two-sided partner rejected: {v:?}")
                });
            }
            _ => {}
        }

        let (wa, wb) = (w * a, w * *b);
        let lemma = lemma_equiv_suite(&wa, &wb, ctx)?;
        let worst = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        o.push("lemma.part_i", lemma.part_i_agrees(), worst(&lemma.part_i_residuals), || {
            format!("{label} partner: {:?}", lemma.part_i)
        });
        o.push("lemma.part_ii", lemma.part_ii_agrees(), worst(&lemma.part_ii_residuals), || {
            format!("{label} partner: {:?}", lemma.part_ii)
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let report = run_suite(&GeneratorSpec::mixed_corpus(), 24, 3, &NumericContext::default()).unwrap();
        assert!(report.all_passed(), "{:#?}", report.failures);
        assert!(report.check("oracle.wwg").unwrap().evaluated == 24);
    }

    #[test]
    fn jobs_do_not_change_the_report() {
        let specs = GeneratorSpec::mixed_corpus();
        let ctx = NumericContext::default();
        let one = run_suite(&specs, 16, 11, &ctx).unwrap();
        let four = run_suite_with_jobs(&specs, 16, 11, &ctx, 4).unwrap();
        assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap());
    }

    #[test]
    fn rejects_empty_input() {
        let ctx = NumericContext::default();
        assert!(run_suite(&[], 1, 0, &ctx).is_err());
        assert!(run_suite(&GeneratorSpec::mixed_corpus(), 0, 0, &ctx).is_err());
    }
}
