//! A seeded Monte Carlo ensemble: gap statistics and certificate rates over
//! Brownian paths. Same seed base in, bit-identical report out, regardless of
//! how many worker threads rayon uses.

use extremal_ode::drift::DriftSpec;
use extremal_ode::ensemble::{run_gap_ensemble, EnsembleSettings, NoiseKind};
use extremal_ode::solver::SolveSettings;

fn main() {
    let drift = DriftSpec::power_law(0.5).expect("alpha in (0,1)");
    let settings = EnsembleSettings {
        paths: 50,
        seed_base: 42,
        gap_epsilon: 1e-2,
        discretization_allowance: 1e-3,
        solver: SolveSettings::with_grid(1 << 12),
    };
    let report = run_gap_ensemble(&drift, NoiseKind::Brownian, &settings).expect("ensemble");
    let a = &report.aggregates;
    println!(
        "{} paths over seeds mix({}, i): {:.1}% with gap < {:.0e}",
        a.paths,
        report.seed_base,
        100.0 * a.fraction_gap_below_epsilon,
        a.gap_epsilon
    );
    println!(
        "gap quantiles: min {:.2e}  median {:.2e}  p95 {:.2e}  max {:.2e}",
        a.gap_quantiles.min, a.gap_quantiles.median, a.gap_quantiles.p95, a.gap_quantiles.max
    );
    for (criterion, counts) in &a.verdict_counts {
        println!("{criterion}: {counts:?}");
    }
    println!(
        "certificate/gap coupling ok: {} (outliers: {:?})",
        a.coupling.quantile_ratio_ok, a.coupling.outlier_paths
    );
    println!("wall clock: {:.2}s", report.wall_clock_seconds);
}
