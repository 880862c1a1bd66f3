//! Differentiable noise: omega_t = alpha t + t^(2+beta) sin(1/t) oscillates
//! below any grid near 0, so it is always evaluated analytically. Uniqueness
//! for the power-law drift follows from the transform-monotonicity tests
//! (H8/H9) with the transform x^(1-a)/(1-a), whose composite with the drift
//! is constant.

use extremal_ode::certify::{certify_peano, default_transform_for, peano_grid, PeanoSide};
use extremal_ode::drift::DriftSpec;
use extremal_ode::noise::{NoisePath, PathGrid};
use extremal_ode::solver::{gap, maximal_solution, minimal_solution, SolveSettings};

fn main() {
    let grid = peano_grid(1.0, 1000);
    println!("H9 transform test, x -> h'(x) b(x) non-increasing on (0, 1):");
    for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let drift = DriftSpec::power_law(alpha).expect("alpha in (0,1)");
        let transform = default_transform_for(&drift, 1.0).expect("power transform");
        let h9 = certify_peano(&drift, &transform, PeanoSide::H9, &grid).expect("certificate");
        let h8 = certify_peano(&drift, &transform, PeanoSide::H8, &grid).expect("certificate");
        println!(
            "  alpha {alpha:.1}: H9 {:?}, H8 {:?} (transform {})",
            h9.verdict, h8.verdict, transform.label
        );
    }

    let drift = DriftSpec::power_law(0.5).expect("alpha");
    let pgrid = PathGrid::uniform(1 << 14).expect("grid");
    let noise = NoisePath::smooth(1.0, 1.0, &pgrid, 1.0);
    let t = 1.0 / std::f64::consts::PI;
    println!(
        "omega(1/pi) = {:.6} (sin(pi) = 0, so exactly alpha/pi = {:.6})",
        noise.eval(t).expect("in range"),
        t
    );
    let settings = SolveSettings::default();
    let min = minimal_solution(&drift, &noise, &settings).expect("minimal");
    let max = maximal_solution(&drift, &noise, &settings).expect("maximal");
    let stats = gap(&min, &max).expect("same grid");
    println!("extremal gap under the oscillatory noise: {:.3e}", stats.sup_gap);
}
