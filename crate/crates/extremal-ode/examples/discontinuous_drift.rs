//! Continuity of the drift is not essential: the square root with a unit
//! jump on the negative side (sqrt(-x) + 1 for x < 0) still admits the
//! monotone scheme through continuous bridge-segment minorants and lowered
//! starts, with a mirrored majorant family from above.

use extremal_ode::drift::DriftSpec;
use extremal_ode::noise::{NoisePath, PathGrid};
use extremal_ode::solver::{
    gap, maximal_solution_cached, minimal_solution_cached, SolveSettings, SolverCache,
};

fn main() {
    let drift = DriftSpec::discontinuous_sqrt();
    println!(
        "drift values: b(-1) = {}, b(0) = {}, b(4) = {}",
        drift.eval(-1.0),
        drift.eval(0.0),
        drift.eval(4.0)
    );

    let grid = PathGrid::uniform(1 << 14).expect("grid");
    let noise = NoisePath::sample_brownian(42, &grid, 1.0);
    let settings = SolveSettings::default();
    let cache = SolverCache::new();

    let min = minimal_solution_cached(&drift, &noise, &settings, &cache).expect("minimal");
    let max = maximal_solution_cached(&drift, &noise, &settings, &cache).expect("maximal");
    println!("minimal ({:?}): stage trail", min.route());
    println!("  k   shift       start       sup gap to prev   within bound");
    for r in min.trail() {
        println!(
            "  {:>2}  {:.3e}  {:+.3e}  {}        {}",
            r.index,
            r.shift,
            r.start,
            r.sup_gap_from_prev
                .map(|g| format!("{g:.3e}"))
                .unwrap_or_else(|| "-".into()),
            r.apriori_ok
        );
    }
    let stats = gap(&min, &max).expect("same grid");
    println!(
        "maximal ({:?}): {} stages; extremal sup gap {:.3e}",
        max.route(),
        max.trail().len(),
        stats.sup_gap
    );
}
