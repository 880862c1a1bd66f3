//! Builds the stage approximant family p_n of the shifted drifts
//! b - 1/n with certified sup-error below eps_n = 1/(2n(n+1)), verifies the
//! monotone envelope p_n <= p_{n+1} and p_n + eps_n <= b on a grid, and
//! reports the uniform growth constant and per-stage Lipschitz constants.

use extremal_ode::approx::{
    build_family, check_monotone_family, family_growth_constant, ShiftMode,
};
use extremal_ode::drift::{DriftKind, DriftSpec};

fn main() {
    for drift in [DriftSpec::power_law(0.5).unwrap(), DriftSpec::discontinuous_sqrt()] {
        let mode = match drift.kind() {
            DriftKind::DiscontinuousSqrt => ShiftMode::SmoothedDiscontinuous,
            _ => ShiftMode::MinusShift,
        };
        println!("base {:?} ({mode:?})", drift.kind());
        let family = build_family(&drift, mode, 12, 10_000).expect("family");
        println!("  n   sup-error      eps_n        degree  Lipschitz");
        for p in &family {
            println!(
                "  {:>2}  {:.3e}   {:.3e}   {:>4}    {:.3e}",
                p.n(),
                p.certified_sup_error(),
                p.epsilon_n(),
                p.degree(),
                p.lipschitz_constant()
            );
        }
        let n_max = family.last().unwrap().n() as f64;
        let grid: Vec<f64> = (0..=4000)
            .map(|i| -n_max + 2.0 * n_max * i as f64 / 4000.0)
            .collect();
        let report = check_monotone_family(&family, &drift, &grid);
        println!("  monotone family check: {}", if report.passed() { "pass" } else { "VIOLATION" });
        println!(
            "  uniform growth constant on [-40, 40]: K = {:.4}",
            family_growth_constant(&family, 40.0)
        );
    }
}
