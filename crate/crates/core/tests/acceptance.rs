//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use wwg_core::conformance::{generate_trial, lemma_pairs, run_suite, GeneratorSpec, GroundTruth, LemmaCase, Plant};
use wwg_core::ginverse::{
    commutation_analysis, outer_inverse_prescribed, weak_group, weighted_core_ep, weighted_weak_group,
    wwg_representations,
};
use wwg_core::numeric::{null_basis_with_rank, range_basis_with_dim, SubspaceBasis};
use wwg_core::relations::{lemma_equiv_suite, preorder_probe, relation_block_analysis, wg_below, wwg_below, Side};
use wwg_core::spectral::{core_subspace, w_drazin};
use wwg_core::{ComplexMatrix, Error, NumericContext};

const GOLDEN_TOL: f64 = 1e-12;
const TOL: f64 = 1e-8;
const SEED: u64 = 7;
const CORPUS_TRIALS: usize = 500;
const LEMMA_PAIRS: usize = 600;
/// Block products above this relative size count as planted-negative.
const NEGATIVE_MARGIN: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn m(rows: &[[f64; 3]]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(rows)
}

fn triple() -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    (
        m(&[[1.0, 1.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]),
        m(&[[1.0, 1.0, 0.0], [0.0, 0.0, 2.0], [0.0, 0.0, 0.0]]),
        m(&[[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 1.0, 1.0]]),
    )
}

fn ctx() -> NumericContext {
    NumericContext::default().with_eq_rtol(TOL)
}

/// `||x - y||_F / ||y||_F`, or the plain norm when `y` vanishes.
fn rel(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    let d = (x - y).frobenius_norm();
    let s = y.frobenius_norm();
    if s > 0.0 {
        d / s
    } else {
        d
    }
}

fn criterion_1() -> Outcome {
    let ctx = ctx();
    let (a, b, c) = triple();
    let ga = weak_group(&a, &ctx).unwrap();
    let gb = weak_group(&b, &ctx).unwrap();
    let ea = (&ga - &m(&[[1.0, 1.0, 1.0], [0.0; 3], [0.0; 3]])).max_abs();
    let eb = (&gb - &m(&[[1.0, 1.0, 0.0], [0.0; 3], [0.0; 3]])).max_abs();
    let verdicts = (
        wg_below(&a, &b, &ctx).unwrap().holds,
        wg_below(&b, &c, &ctx).unwrap().holds,
        wg_below(&a, &c, &ctx).unwrap().holds,
    );
    outcome(
        ea <= GOLDEN_TOL && eb <= GOLDEN_TOL && verdicts == (true, true, false),
        format!("abs err {ea:.1e}, {eb:.1e}; verdicts {verdicts:?}"),
    )
}

fn corpus() -> Vec<GroundTruth> {
    let specs = GeneratorSpec::mixed_corpus();
    (0..CORPUS_TRIALS)
        .map(|t| generate_trial(&specs[t % specs.len()], SEED, t as u64).expect("corpus draw"))
        .collect()
}

fn criterion_2(corpus: &[GroundTruth]) -> Outcome {
    let ctx = ctx();
    let (mut worst, mut bad) = (0.0f64, 0);
    for gt in corpus {
        let (a, w) = (&gt.a, &gt.w);
        let x = weighted_weak_group(a, w, &ctx).unwrap();
        let wcep = weighted_core_ep(a, w, &ctx).unwrap();
        let aw = a * w;
        let r1 = rel(&(&(&(&aw * &x) * w) * &x), &x);
        let r2 = rel(&(&aw * &x), &(&(&wcep * w) * a));
        let r = r1.max(r2);
        worst = worst.max(r);
        bad += usize::from(r > TOL);
    }
    outcome(bad == 0, format!("{} pairs, max residual {worst:.2e}, {bad} above {TOL:e}", corpus.len()))
}

fn criterion_3(corpus: &[GroundTruth]) -> Outcome {
    let ctx = ctx();
    let (mut worst, mut bad, mut routes) = (0.0f64, 0, 0);
    for gt in corpus {
        let table = wwg_representations(&gt.a, &gt.w, &ctx).unwrap();
        routes = routes.max(table.entries.len());
        worst = worst.max(table.max_pairwise_residual);
        bad += usize::from(table.max_pairwise_residual > TOL);
    }
    outcome(
        bad == 0 && routes == 11,
        format!("{routes} routes, max pairwise residual {worst:.2e}, {bad} pairs above {TOL:e}"),
    )
}

fn criterion_4(corpus: &[GroundTruth]) -> Outcome {
    let ctx = ctx();
    let mut worst = [0.0f64; 3];
    for gt in corpus {
        let (a, w) = (&gt.a, &gt.w);
        let got = [
            rel(&weighted_weak_group(a, w, &ctx).unwrap(), &gt.wwg_closed_form),
            rel(&w_drazin(a, w, &ctx).unwrap(), &gt.wdrazin_closed_form),
            rel(&weighted_core_ep(a, w, &ctx).unwrap(), &gt.wcoreep_closed_form),
        ];
        for (m, g) in worst.iter_mut().zip(got) {
            *m = m.max(g);
        }
    }
    outcome(
        worst.iter().all(|&x| x <= TOL),
        format!("max relative error wwg {:.2e}, wdrazin {:.2e}, wcoreep {:.2e}", worst[0], worst[1], worst[2]),
    )
}

/// `||E F - F||` (fixes) or `||E F||` (kills), relative to `||E|| ||F||`.
fn action(e: &ComplexMatrix, b: &SubspaceBasis, fixes: bool) -> f64 {
    let f = b.frame();
    if f.cols() == 0 {
        return 0.0;
    }
    let ef = e * f;
    let d = if fixes { (&ef - f).frobenius_norm() } else { ef.frobenius_norm() };
    d / (e.frobenius_norm() * f.frobenius_norm()).max(1.0)
}

fn criterion_5(corpus: &[GroundTruth]) -> Outcome {
    let ctx = ctx();
    let (mut idem, mut act, mut outer) = (0.0f64, 0.0f64, 0.0f64);
    for gt in corpus {
        let (a, w) = (&gt.a, &gt.w);
        let x = weighted_weak_group(a, w, &ctx).unwrap();
        let awd = w_drazin(a, w, &ctx).unwrap();
        let wcep = weighted_core_ep(a, w, &ctx).unwrap();
        let r = core_subspace(&(a * w), &ctx).unwrap().1.dim();
        let t = range_basis_with_dim(&awd, r, &ctx).unwrap();
        let l = range_basis_with_dim(&(w * &awd), r, &ctx).unwrap();
        let s = null_basis_with_rank(&(&(&wcep * w) * a), r, &ctx).unwrap();

        let awxw = &(&(a * w) * &x) * w;
        let wawx = &(&(w * a) * w) * &x;
        let xwaw = &(&(&x * w) * a) * w;
        let wxwa = &(&(w * &x) * w) * a;
        for e in [&awxw, &wawx, &xwaw, &wxwa] {
            idem = idem.max(rel(&(e * e), e));
        }
        for (e, b, fixes) in [
            (&awxw, &t, true),
            (&xwaw, &t, true),
            (&wawx, &l, true),
            (&wawx, &s, false),
            (&wxwa, &l, true),
        ] {
            act = act.max(action(e, b, fixes));
        }
        let waw = &(w * a) * w;
        outer = outer.max(rel(&outer_inverse_prescribed(&waw, &t, &s, &ctx).unwrap(), &x));
    }
    outcome(
        idem <= TOL && act <= TOL && outer <= TOL,
        format!("idempotency {idem:.2e}, restriction {act:.2e}, prescribed outer inverse {outer:.2e}"),
    )
}

fn criterion_6(corpus: &[GroundTruth]) -> Outcome {
    let ctx = ctx();
    let (mut positive, mut negative, mut disagreements, mut coincidence) = (0, 0, 0, 0.0f64);
    for gt in corpus {
        let report = match commutation_analysis(&gt.a, &gt.w, &ctx) {
            Ok(r) => r,
            Err(Error::EquivalenceViolation(_)) => {
                disagreements += 1;
                continue;
            }
            Err(e) => panic!("commutation analysis failed: {e}"),
        };
        let wa_chain = [report.commutes, report.block_condition, report.square_identity];
        let aw_chain = [report.aw_block_condition, report.aw_square_identity];
        if wa_chain.iter().any(|&b| b != wa_chain[0]) || aw_chain.iter().any(|&b| b != aw_chain[0]) {
            disagreements += 1;
        }
        if report.commutes {
            let x = weighted_weak_group(&gt.a, &gt.w, &ctx).unwrap();
            let d = w_drazin(&gt.a, &gt.w, &ctx).unwrap();
            coincidence = coincidence.max(rel(&x, &d));
        }

        let spec = &gt.spec;
        let cp = &gt.pair;
        let planted = spec.has(Plant::CommutingCondition) || (spec.has(Plant::A2Zero) && spec.has(Plant::W2Zero));
        let n = |m: &ComplexMatrix| m.frobenius_norm();
        let block = &(&(&(&cp.w1 * &cp.a2) + &(&cp.w2 * &cp.a3)) * &cp.w3) * &cp.a3;
        let scale = (n(&cp.w1) * n(&cp.a2) + n(&cp.w2) * n(&cp.a3)) * n(&cp.w3) * n(&cp.a3);
        if planted {
            positive += 1;
            disagreements += usize::from(!report.commutes);
        } else if scale > 0.0 && n(&block) / scale > NEGATIVE_MARGIN {
            negative += 1;
            disagreements += usize::from(report.commutes);
        }
    }
    outcome(
        positive >= 100 && negative >= 100 && disagreements == 0 && coincidence <= TOL,
        format!(
            "{positive} positive, {negative} negative, {disagreements} disagreements, \
             commuting max |X - A^(d,W)| {coincidence:.2e}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let ctx = ctx();
    let report = run_suite(&GeneratorSpec::mixed_corpus(), CORPUS_TRIALS, SEED, &ctx).unwrap();
    let stats = |name: &str| report.check(name).cloned().unwrap_or_default();
    let (right, left) = (stats("relations.right_agreement"), stats("relations.left_agreement"));
    let expected: usize = ["relations.right_expected", "relations.left_expected", "relations.both_expected"]
        .iter()
        .map(|n| stats(n).failed)
        .sum();

    // W = I against the unweighted relation, on square pairs of both kinds
    let mut reduction = 0;
    let mut square_pairs = 0;
    let pairs = lemma_pairs(200, SEED).unwrap();
    let (a, b, c) = triple();
    let extra = [(a.clone(), b.clone()), (b.clone(), c.clone()), (a, c)];
    for (a, b) in pairs.into_iter().map(|(_, a, b)| (a, b)).chain(extra) {
        let id = ComplexMatrix::identity(a.cols());
        let plain = wg_below(&a, &b, &ctx).unwrap().holds;
        let analysis = relation_block_analysis(&a, &id, &b, &ctx).unwrap();
        let verdicts = [
            wwg_below(&a, &id, &b, &ctx, Side::Right).unwrap().holds,
            wwg_below(&a, &id, &b, &ctx, Side::Left).unwrap().holds,
            wwg_below(&a, &id, &b, &ctx, Side::Both).unwrap().holds,
            analysis.block_right.holds,
            analysis.block_left.holds,
        ];
        square_pairs += 1;
        reduction += verdicts.iter().filter(|&&v| v != plain).count();
    }
    outcome(
        right.evaluated >= 100
            && left.evaluated >= 100
            && right.failed == 0
            && left.failed == 0
            && expected == 0
            && reduction == 0,
        format!(
            "{} right / {} left triples, {} + {} disagreements, {expected} planted misses; \
             W = I on {square_pairs} pairs: {reduction} mismatches",
            right.evaluated, left.evaluated, right.failed, left.failed
        ),
    )
}

fn criterion_8() -> Outcome {
    let ctx = ctx();
    let pairs = lemma_pairs(LEMMA_PAIRS, SEED).unwrap();
    let (mut disagreements, mut misses, mut largest) = (0, 0, 0);
    for (case, a, b) in &pairs {
        largest = largest.max(a.rows());
        let suite = lemma_equiv_suite(a, b, &ctx).unwrap();
        disagreements += usize::from(!suite.part_i_agrees()) + usize::from(!suite.part_ii_agrees());
        let want_i = matches!(case, LemmaCase::FirstPart | LemmaCase::Both);
        let want_ii = matches!(case, LemmaCase::SecondPart | LemmaCase::Both);
        if (want_i && !suite.part_i[0]) || (want_ii && !suite.part_ii[0]) {
            misses += 1;
        }
    }
    outcome(
        pairs.len() >= 500 && largest <= 8 && disagreements == 0 && misses == 0,
        format!(
            "{} pairs (n <= {largest}), {disagreements} within-part disagreements, {misses} planted misses",
            pairs.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let ctx = ctx();
    let (a, b, c) = triple();
    let transitivity = preorder_probe(&[(a, b, c)], &ctx).unwrap();
    let n1 = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
    let n2 = ComplexMatrix::from_real_rows(&[[0.0, 0.0], [1.0, 0.0]]);
    let anti = preorder_probe(&[(n1, n2.clone(), n2)], &ctx).unwrap();
    outcome(
        transitivity.transitivity_violations == 1 && anti.antisymmetry_violations >= 1,
        format!(
            "transitivity violations {}, antisymmetry violations {} on a nilpotent pair",
            transitivity.transitivity_violations, anti.antisymmetry_violations
        ),
    )
}

fn criterion_10() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_wwg"))
            .args(["conform", "--trials", "200", "--seed", "7"])
            .output()
            .expect("run wwg")
    };
    let (first, second) = (run(), run());
    let same = first.stdout == second.stdout;
    outcome(
        same && first.status.success() && !first.stdout.is_empty(),
        format!(
            "{} report bytes, identical: {same}, exit {:?}",
            first.stdout.len(),
            first.status.code()
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let corpus = corpus();
    let criteria: Vec<(usize, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(|| criterion_2(&corpus))),
        (3, Box::new(|| criterion_3(&corpus))),
        (4, Box::new(|| criterion_4(&corpus))),
        (5, Box::new(|| criterion_5(&corpus))),
        (6, Box::new(|| criterion_6(&corpus))),
        (7, Box::new(criterion_7)),
        (8, Box::new(criterion_8)),
        (9, Box::new(criterion_9)),
        (10, Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (n, f) in &criteria {
        let t = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2}: {tag}  {} ({:.1}s)", o.detail, t.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
