//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Every tolerance is pinned here; mathematical verdicts never loosen at run
//! time. The heavy ensembles parallelize across paths internally, so the
//! suite stays inside its stated runtime budgets on a commodity 4-core box.

use std::time::Instant;

use rayon::prelude::*;

use extremal_ode::approx::{build_family, check_monotone_family, ShiftMode};
use extremal_ode::certify::{
    certify_iyanaga, certify_peano, default_transform_for, peano_grid, CertVerdict, PeanoSide,
};
use extremal_ode::drift::DriftSpec;
use extremal_ode::ensemble::{
    estimate_h7, refinement_study, run_gap_ensemble, EnsembleSettings, NoiseKind,
};
use extremal_ode::noise::{NoisePath, PathGrid};
use extremal_ode::rng::mix;
use extremal_ode::solver::{
    gap, maximal_solution_cached, minimal_solution_cached, solve_unapproximated, SolveSettings,
    SolverCache,
};

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "[{}] {criterion}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "{criterion}: {detail}");
}

fn sqrt_drift() -> DriftSpec {
    DriftSpec::power_law(0.5).expect("alpha 0.5")
}

/// 1. Non-uniqueness reproduction: sqrt drift, zero noise, T = 1, N = 2^14.
///    Minimal solution sup-norm < 1e-6; maximal at t = 1 within 1e-3 of 0.25;
///    the L1 certificate diverges. Runtime < 5 s.
#[test]
fn criterion_01_nonuniqueness_reproduction() {
    let start = Instant::now();
    let b = sqrt_drift();
    let settings = SolveSettings::with_grid(1 << 14);
    let grid = PathGrid::uniform(1 << 14).unwrap();
    let path = NoisePath::zero(&grid, 1.0);
    let cache = SolverCache::new();
    let min = minimal_solution_cached(&b, &path, &settings, &cache).unwrap();
    let max = maximal_solution_cached(&b, &path, &settings, &cache).unwrap();
    let cert = certify_iyanaga(&b, &path, &min).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let min_sup = min.sup_abs_y();
    let max_end = max.value_at_end();
    let ok = min_sup < 1e-6
        && (max_end - 0.25).abs() < 1e-3
        && cert.verdict == CertVerdict::Diverging
        && elapsed < 5.0;
    report(
        "criterion 1 (non-uniqueness: 0 vs t^2/4)",
        ok,
        &format!(
            "minimal sup {min_sup:.2e} (< 1e-6), maximal(1) = {max_end:.6} (0.25 +/- 1e-3), \
             certificate {:?} (want diverging), {elapsed:.2}s (< 5s)",
            cert.verdict
        ),
    );
}

/// 2. Uniqueness under Brownian noise: 100 seeded paths at N = 2^14 with
///    sup gap < 1e-2 on >= 95, and per-seed refinement across N in
///    {2^12, 2^13, 2^14} non-increasing within the 2x noise allowance on >= 90.
///    Runtime < 10 min total.
#[test]
fn criterion_02_brownian_uniqueness_and_refinement() {
    let start = Instant::now();
    let b = sqrt_drift();
    let settings = EnsembleSettings {
        paths: 100,
        seed_base: 42,
        gap_epsilon: 1e-2,
        discretization_allowance: 1e-3,
        solver: SolveSettings::with_grid(1 << 14),
    };
    let ensemble = run_gap_ensemble(&b, NoiseKind::Brownian, &settings).unwrap();
    let below = ensemble
        .records
        .iter()
        .filter(|r| r.error.is_none() && r.sup_gap < 1e-2)
        .count();
    // certificate/gap coupling: p95 within 10x the median among
    // Integrable-verdict paths, Gronwall ceiling violations listed and empty
    let coupling = &ensemble.aggregates.coupling;
    assert!(
        coupling.quantile_ratio_ok,
        "coupling outliers: {:?}",
        coupling.outlier_paths
    );
    assert!(
        coupling.gronwall_violations.is_empty(),
        "gronwall violations: {:?}",
        coupling.gronwall_violations
    );

    let refinement_pass: usize = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let table = refinement_study(
                &b,
                NoiseKind::Brownian,
                mix(42, i),
                &[1 << 12, 1 << 13, 1 << 14],
                &SolveSettings::with_grid(1 << 12),
            )
            .unwrap();
            let ok = table
                .rows
                .windows(2)
                .all(|w| w[1].sup_gap <= 2.0 * w[0].sup_gap);
            usize::from(ok)
        })
        .sum();

    let elapsed = start.elapsed().as_secs_f64();
    let ok = below >= 95 && refinement_pass >= 90 && elapsed < 600.0;
    report(
        "criterion 2 (Brownian uniqueness gaps + refinement)",
        ok,
        &format!(
            "gaps < 1e-2 on {below}/100 (>= 95), refinement non-increasing (within 2x) on \
             {refinement_pass}/100 (>= 90), {elapsed:.1}s (< 600s)"
        ),
    );
}

/// 3. Polynomial certification: for the sqrt and discontinuous-sqrt bases and
///    every n <= 20, the verification-grid sup-error of p_n is below
///    eps_n = 1/(2n(n+1)) and the monotone family check has zero violations.
///    Runtime < 60 s.
#[test]
fn criterion_03_polynomial_certification() {
    let start = Instant::now();
    let mut detail = String::new();
    let mut ok = true;
    for (name, base, mode) in [
        ("power-law(1/2)", sqrt_drift(), ShiftMode::MinusShift),
        (
            "discontinuous-sqrt",
            DriftSpec::discontinuous_sqrt(),
            ShiftMode::SmoothedDiscontinuous,
        ),
    ] {
        let family = build_family(&base, mode, 20, 10_000).unwrap();
        let worst_ratio = family
            .iter()
            .map(|p| p.certified_sup_error() / p.epsilon_n())
            .fold(0.0f64, f64::max);
        let certified = family
            .iter()
            .all(|p| p.certified_sup_error() < p.epsilon_n());
        let grid: Vec<f64> = (0..=8000)
            .map(|i| -20.0 + 40.0 * i as f64 / 8000.0)
            .collect();
        let mono = check_monotone_family(&family, &base, &grid);
        ok &= certified && mono.passed();
        detail.push_str(&format!(
            "{name}: worst err/eps {worst_ratio:.3}, monotone {}; ",
            if mono.passed() { "clean" } else { "VIOLATED" }
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 60.0;
    detail.push_str(&format!("{elapsed:.1}s (< 60s)"));
    report("criterion 3 (certified approximant families, n <= 20)", ok, &detail);
}

/// 4. Stage monotonicity and domination on the runs of criteria 1-2: stage
///    trails pointwise non-decreasing within 1e-9 slack, and every stage below
///    the converged minimal solution plus the stage tolerance.
#[test]
fn criterion_04_stage_monotonicity_and_domination() {
    let b = sqrt_drift();
    let mut settings = SolveSettings::with_grid(1 << 14);
    settings.retain_stage_paths = true;
    let grid = PathGrid::uniform(1 << 14).unwrap();
    let cache = SolverCache::new();

    let mut worst_defect = 0.0f64;
    let mut worst_excess = f64::NEG_INFINITY;
    // the criterion-1 configuration (zero noise, maximal via reflection)
    let zero = NoisePath::zero(&grid, 1.0);
    let max0 = maximal_solution_cached(&b, &zero, &settings, &cache).unwrap();
    for r in max0.trail() {
        worst_defect = worst_defect.max(r.max_ordering_defect);
    }
    // ten criterion-2 seeds, both extremal routes
    for i in 0..10u64 {
        let path = NoisePath::sample_brownian(mix(42, i), &grid, 1.0);
        let min = minimal_solution_cached(&b, &path, &settings, &cache).unwrap();
        let max = maximal_solution_cached(&b, &path, &settings, &cache).unwrap();
        for r in min.trail().iter().chain(max.trail()) {
            worst_defect = worst_defect.max(r.max_ordering_defect);
        }
        for stage in min.stage_paths() {
            for (k, v) in stage.iter().enumerate() {
                worst_excess = worst_excess.max(v - min.y()[k]);
            }
        }
    }
    let ok = worst_defect <= 1e-9 && worst_excess <= settings.stage_tolerance;
    report(
        "criterion 4 (stage monotonicity within 1e-9, domination)",
        ok,
        &format!(
            "worst ordering defect {worst_defect:.2e} (<= 1e-9), worst stage excess over \
             minimal {worst_excess:.2e} (<= {:.0e})",
            settings.stage_tolerance
        ),
    );
}

/// 5. Lipschitz oracle equivalence: for the linear drift and a cubic
///    polynomial drift, the extremal solver matches an 8x-finer reference
///    integration of the un-approximated equation within 1e-6 sup-norm over 10
///    Brownian seeds.
#[test]
fn criterion_05_lipschitz_oracle_equivalence() {
    let cubic = DriftSpec::tabulated(vec![-6.0, 6.0], vec![vec![0.0, 1.0, 0.0, -0.25]]).unwrap();
    let settings = SolveSettings::with_grid(1 << 13);
    let grid = PathGrid::uniform(1 << 13).unwrap();
    let cache = SolverCache::new();
    let mut worst = 0.0f64;
    for b in [DriftSpec::linear(1.0), cubic] {
        for i in 0..10u64 {
            let path = NoisePath::sample_brownian(mix(5, i), &grid, 1.0);
            let min = minimal_solution_cached(&b, &path, &settings, &cache).unwrap();
            let max = maximal_solution_cached(&b, &path, &settings, &cache).unwrap();
            let reference = solve_unapproximated(&b, &path, 0.0, &settings, 8).unwrap();
            for k in 0..reference.y().len() {
                worst = worst.max((min.y()[k] - reference.y()[k]).abs());
                worst = worst.max((max.y()[k] - reference.y()[k]).abs());
            }
        }
    }
    report(
        "criterion 5 (Lipschitz drifts match 8x reference)",
        worst < 1e-6,
        &format!("sup deviation {worst:.2e} (< 1e-6) over 10 seeds x 2 drifts"),
    );
}

/// 6. H7 closed form: the Monte Carlo estimate (M = 10^4, N = 2^12) of
///    E int_0^1 b'(|W_s|+) ds for alpha = 1/2 lands within 10% of the
///    quadrature-oracle value (2/3) E|Z|^(-1/2). Runtime < 5 min.
#[test]
fn criterion_06_h7_closed_form() {
    let start = Instant::now();
    let est = estimate_h7(0.5, 10_000, 1 << 12, 1.0, 42).unwrap();
    // the oracle itself is cross-checked against the independently derived
    // constant 2^(-1/4) Gamma(1/4) / sqrt(pi) = 1.7200821...
    let frozen = (2.0 / 3.0) * 1.7200821;
    let oracle_ok = (est.oracle_value - frozen).abs() < 5e-5;
    let rel = (est.estimate - est.oracle_value).abs() / est.oracle_value;
    let elapsed = start.elapsed().as_secs_f64();
    let ok = oracle_ok && rel < 0.10 && elapsed < 300.0;
    report(
        "criterion 6 (H7 Gaussian moment, alpha = 1/2)",
        ok,
        &format!(
            "estimate {:.5} vs oracle {:.5} (rel {:.2}%, < 10%), oracle vs frozen constant \
             {:.1e} (< 5e-5), {elapsed:.1}s (< 300s)",
            est.estimate,
            est.oracle_value,
            100.0 * rel,
            (est.oracle_value - frozen).abs()
        ),
    );
}

/// 7. Non-negative-noise certificates: over 100 |W| seeds, both the
///    comparison-function and non-negative-noise certificates are integrable on
///    >= 99 paths, and the extremal gaps stay < 1e-2 on >= 95.
#[test]
fn criterion_07_nonnegative_noise_certificates() {
    let b = sqrt_drift();
    let settings = EnsembleSettings {
        paths: 100,
        seed_base: 42,
        gap_epsilon: 1e-2,
        discretization_allowance: 1e-3,
        solver: SolveSettings::with_grid(1 << 14),
    };
    let ensemble = run_gap_ensemble(&b, NoiseKind::AbsBrownian, &settings).unwrap();
    let lk = ensemble
        .records
        .iter()
        .filter(|r| r.lakshmikantham == Some(CertVerdict::Integrable))
        .count();
    let nn = ensemble
        .records
        .iter()
        .filter(|r| r.nonneg_noise == Some(CertVerdict::Integrable))
        .count();
    let gaps = ensemble
        .records
        .iter()
        .filter(|r| r.error.is_none() && r.sup_gap < 1e-2)
        .count();
    let ok = lk >= 99 && nn >= 99 && gaps >= 95;
    report(
        "criterion 7 (|W| noise certificates)",
        ok,
        &format!(
            "lakshmikantham integrable {lk}/100 (>= 99), nonneg-noise {nn}/100 (>= 99), \
             gaps < 1e-2 on {gaps}/100 (>= 95)"
        ),
    );
}

/// 8. Discontinuous drift route: over 20 Brownian seeds the bridge-segment
///    construction with lowered starts converges on every path at the stage cap,
///    gaps < 1e-2 on >= 18, and the a-priori stage bound holds on every stage.
#[test]
fn criterion_08_discontinuous_drift_route() {
    let b = DriftSpec::discontinuous_sqrt();
    let settings = EnsembleSettings {
        paths: 20,
        seed_base: 42,
        gap_epsilon: 1e-2,
        discretization_allowance: 1e-3,
        solver: SolveSettings::with_grid(1 << 14),
    };
    let ensemble = run_gap_ensemble(&b, NoiseKind::Brownian, &settings).unwrap();
    let not_converged = ensemble.aggregates.not_converged_paths + ensemble.aggregates.failed_paths;
    let gaps = ensemble
        .records
        .iter()
        .filter(|r| r.error.is_none() && r.sup_gap < 1e-2)
        .count();
    let apriori = ensemble.records.iter().all(|r| r.apriori_ok);
    // lowered starts are recorded in the route's stage trail
    let grid = PathGrid::uniform(1 << 14).unwrap();
    let path = NoisePath::sample_brownian(mix(42, 0), &grid, 1.0);
    let min = minimal_solution_cached(&b, &path, &settings.solver, &SolverCache::new()).unwrap();
    let starts_lowered = min.trail().iter().all(|r| r.start == -r.shift);
    let ok = not_converged == 0 && gaps >= 18 && apriori && starts_lowered;
    report(
        "criterion 8 (discontinuous sqrt bridge route)",
        ok,
        &format!(
            "not converged {not_converged}/20 (= 0), gaps < 1e-2 on {gaps}/20 (>= 18), \
             a-priori bound every stage: {apriori}, lowered starts: {starts_lowered}"
        ),
    );
}

/// 9. Differentiable-noise criteria: the transform test holds for every
///    alpha in {0.1, ..., 0.9} on 1000-point grids, and the oscillatory-noise
///    case (alpha = beta = 1) has extremal gap < 1e-3.
#[test]
fn criterion_09_differentiable_noise() {
    let grid = peano_grid(1.0, 1000);
    let mut all_hold = true;
    for tenth in 1..=9u32 {
        let alpha = tenth as f64 / 10.0;
        let b = DriftSpec::power_law(alpha).unwrap();
        let t = default_transform_for(&b, 1.0).unwrap();
        let h9 = certify_peano(&b, &t, PeanoSide::H9, &grid).unwrap();
        let h8 = certify_peano(&b, &t, PeanoSide::H8, &grid).unwrap();
        all_hold &= h9.holds() && h8.holds();
    }
    let b = sqrt_drift();
    let settings = SolveSettings::with_grid(1 << 14);
    let pgrid = PathGrid::uniform(1 << 14).unwrap();
    let smooth = NoisePath::smooth(1.0, 1.0, &pgrid, 1.0);
    let cache = SolverCache::new();
    let min = minimal_solution_cached(&b, &smooth, &settings, &cache).unwrap();
    let max = maximal_solution_cached(&b, &smooth, &settings, &cache).unwrap();
    let stats = gap(&min, &max).unwrap();
    let ok = all_hold && stats.sup_gap < 1e-3;
    report(
        "criterion 9 (transform tests + oscillatory noise)",
        ok,
        &format!(
            "H8/H9 hold for alpha 0.1..0.9: {all_hold}, oscillatory-noise gap \
             {:.2e} (< 1e-3)",
            stats.sup_gap
        ),
    );
}

/// 10. Determinism: identical seeds give bit-identical JSON aggregates for
///     the ensemble, the H7 estimate, and the extremal solves.
#[test]
fn criterion_10_determinism() {
    let b = sqrt_drift();
    let settings = EnsembleSettings {
        paths: 10,
        seed_base: 7,
        gap_epsilon: 1e-2,
        discretization_allowance: 1e-3,
        solver: SolveSettings::with_grid(1 << 10),
    };
    let r1 = run_gap_ensemble(&b, NoiseKind::Brownian, &settings).unwrap();
    let r2 = run_gap_ensemble(&b, NoiseKind::Brownian, &settings).unwrap();
    let agg_identical = serde_json::to_vec(&r1.aggregates).unwrap()
        == serde_json::to_vec(&r2.aggregates).unwrap();
    let reports_identical =
        serde_json::to_vec(&r1).unwrap() == serde_json::to_vec(&r2).unwrap();

    let h1 = estimate_h7(0.5, 200, 1 << 10, 1.0, 11).unwrap();
    let h2 = estimate_h7(0.5, 200, 1 << 10, 1.0, 11).unwrap();
    let h7_identical = h1.estimate.to_bits() == h2.estimate.to_bits();

    let grid = PathGrid::uniform(1 << 12).unwrap();
    let path = NoisePath::sample_brownian(3, &grid, 1.0);
    let solver = SolveSettings::with_grid(1 << 12);
    let m1 = maximal_solution_cached(&b, &path, &solver, &SolverCache::new()).unwrap();
    let m2 = maximal_solution_cached(&b, &path, &solver, &SolverCache::new()).unwrap();
    let solve_identical = m1
        .y()
        .iter()
        .zip(m2.y())
        .all(|(a, b)| a.to_bits() == b.to_bits());

    let ok = agg_identical && reports_identical && h7_identical && solve_identical;
    report(
        "criterion 10 (bit-identical reruns)",
        ok,
        &format!(
            "aggregates identical: {agg_identical}, full reports identical: {reports_identical}, \
             h7 identical: {h7_identical}, solves identical: {solve_identical}"
        ),
    );
}
