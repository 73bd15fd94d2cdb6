//! Acceptance run: one line per criterion, then a single assertion.
//!
//! `cargo test -p mqsp-core --test acceptance -- --nocapture`

use std::time::{Duration, Instant};

use mqsp_core::document::fixtures;
use mqsp_core::oracle::{mutate, perturb_coefficient, Mutation};
use mqsp_core::{
    check_necessary, decide, qsp1_characterize, random_sequence, roundtrip_check, term_bound,
    AngleMode, OracleConfig, PqPair, RoundtripReport,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;
const MODES: [AngleMode; 2] = [AngleMode::Continuous, AngleMode::Discrete];

struct Outcome {
    id: u8,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn oracle_pair(m: usize, n: usize, seed: u64, mode: AngleMode) -> PqPair {
    let cfg = OracleConfig::new(m, n, seed, mode).expect("valid config");
    random_sequence(&cfg)
        .evaluate_with_tolerance(TOL)
        .expect("valid tolerance")
}

fn counterexample() -> Outcome {
    let pair = fixtures::counterexample();
    let start = Instant::now();
    let mut wrong = Vec::new();
    for n in [4, 5, 6, 8, 10, 12] {
        if decide(&pair, n, TOL).expect("decide runs") {
            wrong.push(n);
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        id: 1,
        title: "counterexample rejected at n = 4, 5, 6, 8, 10, 12",
        pass: wrong.is_empty() && elapsed < Duration::from_secs(1),
        detail: format!("accepted at {wrong:?}, {elapsed:.2?} total"),
    }
}

/// `(m, n, seed, mode, report)`.
type Case = (usize, usize, u64, AngleMode, RoundtripReport);

struct Sweep {
    cases: Vec<Case>,
    elapsed: Duration,
}

fn sweep() -> Sweep {
    let start = Instant::now();
    let mut cases = Vec::new();
    for m in 1..=3 {
        for n in 0..=10 {
            for mode in MODES {
                for k in 0..8u64 {
                    let seed = 10_000 * m as u64 + 100 * n as u64 + k;
                    let cfg = OracleConfig::new(m, n, seed, mode).expect("valid config");
                    let report =
                        roundtrip_check(&random_sequence(&cfg), TOL).expect("round trip runs");
                    cases.push((m, n, seed, mode, report));
                }
            }
        }
    }
    Sweep {
        cases,
        elapsed: start.elapsed(),
    }
}

fn first_failure(sweep: &Sweep, bad: impl Fn(&RoundtripReport) -> bool) -> (usize, Option<&Case>) {
    let failing: Vec<_> = sweep.cases.iter().filter(|c| bad(&c.4)).collect();
    (failing.len(), failing.first().copied())
}

fn describe(case: Option<&Case>) -> String {
    case.map_or_else(String::new, |(m, _, seed, mode, r)| {
        format!("; first: m={m} seed={seed} {mode}: {r}")
    })
}

fn roundtrip(sweep: &Sweep) -> Outcome {
    let (count, first) = first_failure(sweep, |r| !(r.accepted && r.synthesis_ok));
    let worst = sweep
        .cases
        .iter()
        .filter_map(|c| c.4.synthesis_deviation)
        .fold(0.0, f64::max);
    Outcome {
        id: 2,
        title: "round trip of oracle pairs, deviation <= 1e-9",
        pass: sweep.cases.len() >= 500 && count == 0 && sweep.elapsed < Duration::from_secs(60),
        detail: format!(
            "{} pairs, {count} failed, worst deviation {worst:.2e}, {:.2?}{}",
            sweep.cases.len(),
            sweep.elapsed,
            describe(first)
        ),
    }
}

fn parity_and_padding(sweep: &Sweep) -> Outcome {
    let (count, first) = first_failure(sweep, |r| !(r.parity_rejected && r.padded_accepted));
    Outcome {
        id: 3,
        title: "false at n + 1, true at n + 2",
        pass: count == 0,
        detail: format!(
            "{} pairs, {count} failed{}",
            sweep.cases.len(),
            describe(first)
        ),
    }
}

fn invariants(sweep: &Sweep) -> Outcome {
    let mut failed = Vec::new();
    for (m, n, seed, mode, _) in &sweep.cases {
        let pair = oracle_pair(*m, *n, *seed, *mode);
        let report = check_necessary(&pair, *n, TOL).expect("check runs");
        if !report.all_ok() {
            let flags: Vec<_> = report
                .flags()
                .iter()
                .filter(|f| !f.1)
                .map(|f| f.0)
                .collect();
            failed.push(format!("m={m} n={n} seed={seed} {mode}: {flags:?}"));
        }
    }
    Outcome {
        id: 4,
        title: "symmetry, degree, nonzero, normalization and degree-sum invariants",
        pass: failed.is_empty(),
        detail: format!(
            "{} pairs, {} failed{}",
            sweep.cases.len(),
            failed.len(),
            failed
                .first()
                .map_or_else(String::new, |f| format!("; first: {f}"))
        ),
    }
}

/// 100 oracle pairs plus mutated variants, mutating until 100 variants fail a
/// necessary condition. Every instance is compared, including mutations that
/// happen to stay constructible.
fn single_variable() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut instances = Vec::new();
    let mut broken = 0;
    for k in 0..100u64 {
        let n = (k % 11) as usize;
        let pair = oracle_pair(1, n, 500 + k, MODES[(k % 2) as usize]);
        instances.push((pair, n, None));
    }
    let mut k = 0;
    while broken < 100 && k < 1000 {
        let (pair, n, _) = &instances[k % 100];
        let mutation = Mutation::ALL[k % Mutation::ALL.len()];
        let mutated = mutate(pair, mutation, &mut rng).expect("mutation applies");
        if !check_necessary(&mutated, *n, TOL)
            .expect("check runs")
            .all_ok()
        {
            broken += 1;
        }
        instances.push((mutated, *n, Some(mutation)));
        k += 1;
    }
    let mut disagreements = Vec::new();
    let mut constructible = 0;
    for (pair, n, mutation) in &instances {
        let by_decide = decide(pair, *n, TOL).expect("decide runs");
        let by_formula = qsp1_characterize(pair, *n, TOL).expect("arity 1");
        constructible += usize::from(by_decide);
        if by_decide != by_formula {
            disagreements.push(format!(
                "n={n} {mutation:?}: decide {by_decide}, characterization {by_formula}"
            ));
        }
    }
    Outcome {
        id: 5,
        title: "single-variable characterization agrees with decide",
        pass: broken >= 100 && disagreements.is_empty(),
        detail: format!(
            "{} instances, {broken} mutated variants failing a necessary condition, \
             {constructible} constructible, {} disagreements{}",
            instances.len(),
            disagreements.len(),
            disagreements
                .first()
                .map_or_else(String::new, |d| format!("; first: {d}"))
        ),
    }
}

fn perturbation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let trials = 150;
    let mut accepted = Vec::new();
    for k in 0..trials {
        let m = rng.gen_range(1..=3);
        let n = rng.gen_range(0..=10);
        let mode = MODES[k % 2];
        let pair = oracle_pair(m, n, 90_000 + k as u64, mode);
        let (bent, _) = perturb_coefficient(&pair, Complex64::new(1e-3, 0.0), &mut rng)
            .expect("perturbation applies");
        if decide(&bent, n, TOL).expect("decide runs") {
            accepted.push(format!("m={m} n={n} trial {k}"));
        }
    }
    Outcome {
        id: 6,
        title: "a 1e-3 change to one coefficient is rejected",
        pass: accepted.is_empty(),
        detail: format!(
            "{trials} trials, {} accepted{}",
            accepted.len(),
            accepted
                .first()
                .map_or_else(String::new, |a| format!("; first: {a}"))
        ),
    }
}

struct Timing {
    slowest: Duration,
    total: Duration,
    work: f64,
    accepted: usize,
    count: usize,
}

fn time_batch(n: usize) -> Timing {
    let mut t = Timing {
        slowest: Duration::ZERO,
        total: Duration::ZERO,
        work: 0.0,
        accepted: 0,
        count: 0,
    };
    for mode in MODES {
        for seed in 0..10 {
            let pair = oracle_pair(2, n, seed, mode);
            let start = Instant::now();
            let ok = decide(&pair, n, TOL).expect("decide runs");
            let elapsed = start.elapsed();
            t.slowest = t.slowest.max(elapsed);
            t.total += elapsed;
            t.work += (n * 2) as f64 * term_bound(&pair) as f64;
            t.accepted += usize::from(ok);
            t.count += 1;
        }
    }
    t
}

fn complexity() -> Outcome {
    let small = time_batch(20);
    let large = time_batch(40);
    let growth = large.total.as_secs_f64() / small.total.as_secs_f64();
    let allowed = 4.0 * large.work / small.work;
    Outcome {
        id: 7,
        title: "m = 2, n = 40 under 5 s; growth from n = 20 within 4x the n*m*L ratio",
        pass: large.slowest < Duration::from_secs(5) && growth < allowed,
        detail: format!(
            "slowest n=40 decide {:.2?}; growth {growth:.1}x vs allowed {allowed:.1}x; \
             decided true on {}/{} at n=20 and {}/{} at n=40",
            large.slowest, small.accepted, small.count, large.accepted, large.count
        ),
    }
}

#[test]
fn acceptance() {
    let sweep = sweep();
    let outcomes = [
        counterexample(),
        roundtrip(&sweep),
        parity_and_padding(&sweep),
        invariants(&sweep),
        single_variable(),
        perturbation(),
        complexity(),
    ];
    for o in &outcomes {
        println!(
            "criterion {} {}: {} ({})",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.title,
            o.detail
        );
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
