//! The unperturbed square-root equation x' = sqrt(|x|), x(0) = 0 has two
//! extremal solutions: x = 0 and x = t^2/4. This example computes both and
//! shows the L1 uniqueness certificate correctly diagnosing the failure.

use extremal_ode::certify::certify_iyanaga;
use extremal_ode::drift::DriftSpec;
use extremal_ode::noise::{NoisePath, PathGrid};
use extremal_ode::solver::{gap, maximal_solution, minimal_solution, SolveSettings};

fn main() {
    let drift = DriftSpec::power_law(0.5).expect("alpha in (0,1)");
    let grid = PathGrid::uniform(1 << 14).expect("grid");
    let noise = NoisePath::zero(&grid, 1.0);
    let settings = SolveSettings::default();

    let minimal = minimal_solution(&drift, &noise, &settings).expect("minimal");
    let maximal = maximal_solution(&drift, &noise, &settings).expect("maximal");
    let stats = gap(&minimal, &maximal).expect("same grid");

    println!("minimal route: {:?}, sup |y| = {:.2e}", minimal.route(), minimal.sup_abs_y());
    println!(
        "maximal route: {:?}, {} stages, y(1) = {:.6} (t^2/4 gives 0.25)",
        maximal.route(),
        maximal.trail().len(),
        maximal.value_at_end()
    );
    println!("sup gap = {:.6} at t = {:.3}", stats.sup_gap, stats.argmax_time);

    let cert = certify_iyanaga(&drift, &noise, &minimal).expect("certificate");
    println!(
        "uniqueness certificate: {:?} (capped fraction {:.2})",
        cert.verdict, cert.capped_fraction
    );

    for &t in &[0.25, 0.5, 0.75, 1.0] {
        let i = maximal.times().iter().position(|&u| u >= t).unwrap();
        println!(
            "t = {t:.2}: minimal {:.6}, maximal {:.6}, t^2/4 = {:.6}",
            minimal.y()[i],
            maximal.y()[i],
            t * t / 4.0
        );
    }
}
