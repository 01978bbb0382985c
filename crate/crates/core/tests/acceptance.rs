//! Acceptance checks. Runs without the libtest harness so that every check
//! prints exactly one PASS/FAIL line, captured or not. Exits non-zero if any
//! check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use apcval_core::criteria::{
    equivalence_pass, evaluate, induce_params, plan_n_e, plan_n_t, ttest_pass, Decision, Mode,
    Regime, TTestParams,
};
use apcval_core::normal::{cdf, quantile, tail, ExtendedReal, Probability};
use apcval_core::power::{pass_probability_mc, stability_scan, SimDesign};
use apcval_core::sample::{proof_of_concept_sample, summarize, SampleSummary};
use apcval_core::{min_n_bound, normalized_threshold_e, normalized_threshold_t};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn prob(x: f64) -> Probability {
    Probability::new(x).unwrap()
}

fn z(p: f64) -> f64 {
    quantile(prob(p)).finite().unwrap()
}

fn summary(n: u64, d_bar: f64, v_hat: f64) -> SampleSummary {
    SampleSummary::new(n, 1.0, d_bar, v_hat).unwrap()
}

/// Outcome of one check: whether the numbers matched, and what was seen.
type Check = (bool, String);

/// Name, time budget and body of one check.
type Criterion = (&'static str, Duration, fn() -> Check);

fn planner_golden_value() -> Check {
    let p = TTestParams::new(0.05, 0.025, 0.01, 0.05).unwrap();
    let n_t = plan_n_t(&p);
    let n_e = plan_n_e(&induce_params(&p));
    (
        n_t == 385 && n_e == 385,
        format!("n_t = {n_t}, n_e = {n_e}"),
    )
}

fn minimum_sample_bound() -> Check {
    let b = min_n_bound(0.15, 0.01, prob(0.025));
    ((b - 864.33).abs() <= 0.01, format!("bound = {b:.4}"))
}

fn critical_ratio() -> Check {
    let r = stability_scan(prob(0.05), prob(0.025), 2.0, 3.5, 0.001).unwrap();
    match r {
        ExtendedReal::Finite(r) => {
            let onset = r * 0.15;
            (
                (2.60..=2.64).contains(&r) && (0.390..=0.396).contains(&onset),
                format!("v/v_hat = {r:.3}, onset v = {onset:.4} at v_hat = 0.15"),
            )
        }
        other => (false, format!("no onset found ({other})")),
    }
}

fn revised_matches_induced() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2019);
    let (mut checked, mut worst, mut mismatches) = (0u32, 0.0f64, 0u32);
    while checked < 10_000 {
        let p = TTestParams::new(
            rng.random_range(0.05..=0.2),
            rng.random_range(0.025..=0.2),
            rng.random_range(0.005..=0.05),
            rng.random_range(0.02..=0.3),
        )
        .unwrap();
        let v_hat = p.v * rng.random_range(0.5..=2.0);
        let n = ((plan_n_t(&p) as f64) * rng.random_range(0.5..=1.0))
            .ceil()
            .max(2.0) as u64;
        if (n as f64) < min_n_bound(v_hat, p.d_r, p.beta_t) {
            continue;
        }
        let s = summary(n, rng.random_range(-1.5..=1.5) * p.d_r, v_hat);
        let revised = evaluate(&s, &p, Regime::RevisedTTest);
        let induced = evaluate(&s, &p, Regime::InducedEquivalence);
        if revised.decision != induced.decision {
            mismatches += 1;
        }
        let gap = match (revised.threshold, induced.threshold) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => (a - b).abs() / p.d_r,
            _ => f64::INFINITY,
        };
        worst = worst.max(gap);
        checked += 1;
    }

    let mut worst_norm = 0.0f64;
    for _ in 0..10_000 {
        let p = TTestParams::new(
            rng.random_range(0.001..0.3),
            rng.random_range(0.001..0.5),
            rng.random_range(0.001..0.1),
            1.0,
        )
        .unwrap();
        let ratio = rng.random_range(0.5..=2.0);
        let e = induce_params(&p);
        let t = normalized_threshold_t(ratio, p.alpha_t, p.beta_t, p.d_r).unwrap();
        let q = normalized_threshold_e(ratio, e.alpha_e, e.beta_e, e.delta).unwrap();
        worst_norm = worst_norm.max((t - q).abs());
    }
    (
        mismatches == 0 && worst <= 1e-9 && worst_norm <= 1e-12,
        format!(
            "{checked} tuples, {mismatches} decision mismatches, worst gap {worst:.2e}·d_r, \
             normalized gap {worst_norm:.2e}"
        ),
    )
}

fn revised_saturates_induced_does_not() -> Check {
    let (v_hat, ratio) = (0.15, 2.7);
    let p = TTestParams::new(0.05, 0.025, 0.01, v_hat * ratio).unwrap();
    let n = plan_n_t(&p);
    let bad = summary(n, 0.02, v_hat);
    let good = summary(n, 0.002, v_hat);
    let revised = evaluate(&bad, &p, Regime::RevisedTTest);
    let induced_bad = evaluate(&bad, &p, Regime::InducedEquivalence);
    let induced_good = evaluate(&good, &p, Regime::InducedEquivalence);
    let ok = revised.mode == Mode::AlwaysPass
        && revised.threshold == ExtendedReal::PosInfinity
        && revised.decision == Decision::Pass
        && induced_bad.mode == Mode::Regular
        && induced_bad.threshold.is_finite()
        && induced_bad.decision == Decision::Fail
        && induced_good.decision == Decision::Pass;
    (
        ok,
        format!(
            "n = {n}, revised threshold {} ({:?}), induced threshold {} (|D| = 0.02 {:?}, \
             |D| = 0.002 {:?})",
            revised.threshold,
            revised.mode,
            induced_bad.threshold,
            induced_bad.decision,
            induced_good.decision
        ),
    )
}

fn proof_of_concept_asymmetry() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for m in [1, 10, 100] {
        let s = summarize(&proof_of_concept_sample(1000, m).unwrap()).unwrap();
        let t_stat = s.d_bar / s.standard_error();
        let t = ttest_pass(&s, prob(0.10));
        let e = equivalence_pass(&s, 0.01, prob(0.025));
        ok &= t.decision == Decision::Fail && (t_stat - 1.668).abs() < 5e-4;
        ok &= match m {
            1 => e.decision == Decision::Fail,
            100 => e.decision == Decision::Pass,
            _ => true,
        };
        notes.push(format!(
            "m={m}: t={t_stat:.3} {:?}/{:?}",
            t.decision, e.decision
        ));
    }
    (ok, format!("t-test/equivalence: {}", notes.join(", ")))
}

fn pass_curve_features() -> Check {
    let seed = 2019;
    let reps = 100_000;

    let tp = TTestParams::new(0.05, 0.025, 0.01, 0.15).unwrap();
    let planned = plan_n_t(&tp);
    let at_zero = SimDesign::new(Regime::TTest, tp, planned, vec![0.0], 0.15, reps, seed).unwrap();
    let p0 = pass_probability_mc(&at_zero).unwrap().points[0].pass_prob;

    let ep = TTestParams::new(0.025, 0.05, 0.01, 0.05).unwrap();
    let grid = apcval_core::power::default_mu_grid();
    let flat = SimDesign::new(Regime::Equivalence, ep, 385, grid, 0.15, reps, seed).unwrap();
    let worst = pass_probability_mc(&flat)
        .unwrap()
        .points
        .iter()
        .map(|pt| pt.pass_prob)
        .fold(0.0, f64::max);

    let mut inner = Vec::new();
    for n in [385, 1540, 6160] {
        let d = SimDesign::new(Regime::TTest, tp, n, vec![0.005], 0.15, reps, seed).unwrap();
        inner.push(pass_probability_mc(&d).unwrap().points[0].pass_prob);
    }
    let decreasing = inner.windows(2).all(|w| w[1] < w[0]);
    (
        (p0 - 0.95).abs() <= 0.01 && worst <= 0.001 && decreasing,
        format!(
            "t-test at 0 with n = {planned}: {p0:.4}; equivalence n = 385 max {worst:.5}; \
             t-test at 0.005: {:.4} > {:.4} > {:.4}",
            inner[0], inner[1], inner[2]
        ),
    )
}

fn numerical_kernel() -> Check {
    let half = 500;
    let mut ps: Vec<f64> = (0..half)
        .map(|i| 10f64.powf(-12.0 + 11.69897 * i as f64 / (half - 1) as f64))
        .collect();
    let upper: Vec<f64> = ps.iter().rev().map(|p| 1.0 - p).collect();
    ps.extend(upper);
    let roundtrip = ps
        .iter()
        .map(|&p| (cdf(z(p)).unwrap().value() - p).abs())
        .fold(0.0, f64::max);

    let x: f64 = 8.31;
    let y = 1.0 / (x * x);
    let series = 1.0 - y * (1.0 - 3.0 * y * (1.0 - 5.0 * y * (1.0 - 7.0 * y * (1.0 - 9.0 * y))));
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mills = density / x * series;
    let rel = (tail(x).unwrap().value() - mills).abs() / mills;

    let collapses = [9.0, 10.0, 15.0, 20.0, 30.0, 37.0]
        .iter()
        .all(|&x| 1.0 - cdf(x).unwrap().value() == 0.0 && tail(x).unwrap().value() > 0.0);
    (
        ps.len() == 1000 && roundtrip <= 1e-9 && rel <= 1e-6 && collapses,
        format!(
            "{} points, roundtrip {roundtrip:.1e}, tail(8.31) rel err {rel:.1e}, \
             naive collapse above 9: {collapses}",
            ps.len()
        ),
    )
}

fn main() -> ExitCode {
    let checks: [Criterion; 8] = [
        (
            "1 planner golden value",
            Duration::from_millis(1),
            planner_golden_value,
        ),
        (
            "2 minimum sample bound",
            Duration::from_millis(1),
            minimum_sample_bound,
        ),
        ("3 critical ratio", Duration::from_secs(1), critical_ratio),
        (
            "4 revised equals induced",
            Duration::from_secs(10),
            revised_matches_induced,
        ),
        (
            "5 saturation at v/v_hat = 2.7",
            Duration::from_millis(1),
            revised_saturates_induced_does_not,
        ),
        (
            "6 proof-of-concept asymmetry",
            Duration::from_secs(1),
            proof_of_concept_asymmetry,
        ),
        (
            "7 pass-curve features",
            Duration::from_secs(60),
            pass_curve_features,
        ),
        (
            "8 numerical kernel",
            Duration::from_secs(1),
            numerical_kernel,
        ),
    ];
    let mut failed = 0;
    for (name, limit, check) in checks {
        let start = Instant::now();
        let (ok, detail) = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let verdict = if ok && in_time { "PASS" } else { "FAIL" };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "{verdict} {name}: {detail} [{:.3} ms, limit {} ms{}]",
            elapsed.as_secs_f64() * 1e3,
            limit.as_millis(),
            if in_time { "" } else { ", too slow" }
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance check(s) failed");
        ExitCode::FAILURE
    }
}
