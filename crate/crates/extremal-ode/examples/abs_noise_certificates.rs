//! With non-negative noise |W| the uniqueness tests simplify: neither the
//! comparison-function certificate nor the non-negative-noise L1 certificate
//! needs a solved path. Both agree across seeds and match the extremal gap.

use extremal_ode::certify::{certify_lakshmikantham, certify_nonneg_noise};
use extremal_ode::drift::DriftSpec;
use extremal_ode::noise::{NoisePath, PathGrid};
use extremal_ode::rng::mix;
use extremal_ode::solver::{
    gap, maximal_solution_cached, minimal_solution_cached, SolveSettings, SolverCache,
};

fn main() {
    let drift = DriftSpec::power_law(0.5).expect("alpha in (0,1)");
    let grid = PathGrid::uniform(1 << 13).expect("grid");
    let settings = SolveSettings::with_grid(1 << 13);
    let cache = SolverCache::new();

    println!("seed       lakshmikantham  nonneg-noise   sup gap");
    for i in 0..8u64 {
        let seed = mix(7, i);
        let noise = NoisePath::sample_brownian(seed, &grid, 1.0).transform_abs();
        let lk = certify_lakshmikantham(&noise).expect("certificate");
        let nn = certify_nonneg_noise(&drift, &noise).expect("certificate");
        let min = minimal_solution_cached(&drift, &noise, &settings, &cache).expect("minimal");
        let max = maximal_solution_cached(&drift, &noise, &settings, &cache).expect("maximal");
        let stats = gap(&min, &max).expect("same grid");
        println!(
            "{seed:>20}  {:<14}{:<14} {:.3e}",
            format!("{:?}", lk.verdict).to_lowercase(),
            format!("{:?}", nn.verdict).to_lowercase(),
            stats.sup_gap
        );
    }
}
