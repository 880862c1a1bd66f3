//! Machine-checkable hypothesis predicates over the drift catalog: exact
//! answers for the analytic kinds, grid predicates for tabulated pieces, and
//! the aux-transform tests H8/H9.

use extremal_ode::drift::{
    check_hypotheses, default_grid, DriftSpec, Hypothesis, HypothesisOutcome, Transform,
};

fn outcome_word(o: &HypothesisOutcome) -> String {
    match o {
        HypothesisOutcome::Holds { exact: true } => "holds (exact)".into(),
        HypothesisOutcome::Holds { exact: false } => "holds (grid)".into(),
        HypothesisOutcome::Fails { at } => format!("FAILS at {at}"),
        HypothesisOutcome::Skipped { reason } => format!("skipped: {reason}"),
    }
}

fn main() {
    let grid = default_grid(4.0);
    let catalog = [
        DriftSpec::power_law(0.5).unwrap(),
        DriftSpec::discontinuous_sqrt(),
        DriftSpec::linear(1.0),
        DriftSpec::zero(),
        DriftSpec::tabulated(vec![-2.0, 0.0, 2.0], vec![vec![0.0, 1.0], vec![0.0, 1.0, -0.2]])
            .unwrap(),
    ];
    for drift in &catalog {
        println!("{:?} (growth constant {}):", drift.kind(), drift.growth_constant());
        let report = check_hypotheses(drift, &Hypothesis::ALL[..7], &grid, None).expect("no aux needed");
        for (h, o) in &report {
            println!("  {h:?}: {}", outcome_word(o));
        }
    }

    let sqrt = DriftSpec::power_law(0.5).unwrap();
    let transform = Transform::power_default(0.5, 1.0);
    let report = check_hypotheses(
        &sqrt,
        &[Hypothesis::H8, Hypothesis::H9],
        &grid,
        Some(&transform),
    )
    .expect("transform supplied");
    println!("PowerLaw(0.5) with transform {}:", transform.label);
    for (h, o) in &report {
        println!("  {h:?}: {}", outcome_word(o));
    }
}
