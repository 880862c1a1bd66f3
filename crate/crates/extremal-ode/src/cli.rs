//! Scenario-driven command frontend: solve, extremal, certify, ensemble,
//! reproduce and approx-cache, emitting CSV/JSON/SVG artifacts.
//!
//! Exit-code policy: mathematical verdicts (Diverging certificates,
//! NotConverged solves, failed reproduction checks) never drive exit codes;
//! only operational failures (parse, validation, I/O, unknown case ids) do.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::approx::{build_family, ApproxError, PolyFamily, ShiftMode};
use crate::certify::{
    self, certify_iyanaga, certify_lakshmikantham, certify_nonneg_noise, certify_peano,
    CertVerdict, Certificate, PeanoSide,
};
use crate::drift::{DriftKind, DriftSpec};
use crate::ensemble::{run_gap_ensemble, EnsembleError};
use crate::noise::NoisePath;
use crate::report;
use crate::scenario::{Scenario, ScenarioError};
use crate::solver::{
    gap, maximal_solution_cached, minimal_solution_cached, SolutionPath, SolveSettings,
    SolverCache, SolverError,
};
use crate::svg;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "EXTREMAL_ODE_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Certify(#[from] certify::CertifyError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unknown reproduce case \"{0}\"; known cases: {}", KNOWN_CASES.join(", "))]
    UnknownCase(String),
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Solve,
    Extremal,
    Certify,
    Ensemble,
    ApproxCache,
}

/// Common flag overrides shared by every command.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn resolve_out_dir(overrides: &Overrides, scenario_dir: Option<&str>) -> PathBuf {
    overrides
        .out
        .clone()
        .or_else(|| scenario_dir.map(PathBuf::from))
        .or_else(|| std::env::var(OUT_DIR_ENV).ok().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn apply_overrides(scenario: &mut Scenario, overrides: &Overrides) {
    if let Some(seed) = overrides.seed {
        if scenario.noise.seed.is_some() {
            scenario.noise.seed = Some(seed);
        }
        scenario.ensemble.seed_base = seed;
    }
    if let Some(grid) = overrides.grid {
        scenario.run.grid = grid;
    }
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    write_text(dir, name, &text)
}

/// Runs a scenario-file command; returns the emitted artifact paths.
pub fn run_scenario_command(
    kind: CommandKind,
    scenario_path: &Path,
    overrides: &Overrides,
) -> Result<Vec<PathBuf>, CliError> {
    let mut scenario = Scenario::from_file(scenario_path)?;
    apply_overrides(&mut scenario, overrides);
    scenario.validate()?;
    let out_dir = resolve_out_dir(overrides, scenario.output.dir.as_deref());
    let svg_wanted = overrides.svg || scenario.output.svg;
    match kind {
        CommandKind::Solve => cmd_solve(&scenario, &out_dir, svg_wanted),
        CommandKind::Extremal => cmd_extremal(&scenario, &out_dir, svg_wanted),
        CommandKind::Certify => cmd_certify(&scenario, &out_dir, svg_wanted),
        CommandKind::Ensemble => cmd_ensemble(&scenario, &out_dir),
        CommandKind::ApproxCache => cmd_approx_cache(&scenario, &out_dir),
    }
}

fn solution_artifacts(
    scenario: &Scenario,
    label: &str,
    sol: &SolutionPath,
    path: &NoisePath,
    settings: &SolveSettings,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let mut csv = Vec::new();
    report::write_solution_csv(sol, &mut csv).expect("in-memory write");
    let csv_path = write_text(
        out_dir,
        &format!("{}-{label}.csv", scenario.name),
        &String::from_utf8(csv).expect("utf8 csv"),
    )?;
    let drift = scenario.build_drift()?.descriptor();
    let sidecar = report::solution_sidecar(sol, path, &drift, settings);
    let json_path = write_json(out_dir, &format!("{}-{label}.json", scenario.name), &sidecar)?;
    Ok(vec![csv_path, json_path])
}

pub fn cmd_solve(
    scenario: &Scenario,
    out_dir: &Path,
    svg_wanted: bool,
) -> Result<Vec<PathBuf>, CliError> {
    let b = scenario.build_drift()?;
    let path = scenario.build_noise()?;
    let settings = scenario.solve_settings();
    let cache = SolverCache::new();
    let sol = minimal_solution_cached(&b, &path, &settings, &cache)?;
    let mut artifacts = solution_artifacts(scenario, "solution", &sol, &path, &settings, out_dir)?;
    if svg_wanted {
        let series = svg::Series {
            label: "x(t)",
            color: "#1f77b4",
            points: sol
                .times()
                .iter()
                .zip(sol.x())
                .map(|(&t, &x)| (t, x))
                .collect(),
        };
        let doc = svg::render(&format!("{} solution", scenario.name), &[series]);
        artifacts.push(write_text(
            out_dir,
            &format!("{}-solution.svg", scenario.name),
            &doc,
        )?);
    }
    println!(
        "{}: solved ({:?}, {:?}), sup|y| = {:.6e}",
        scenario.name,
        sol.route(),
        sol.verdict(),
        sol.sup_abs_y()
    );
    Ok(artifacts)
}

pub fn cmd_extremal(
    scenario: &Scenario,
    out_dir: &Path,
    svg_wanted: bool,
) -> Result<Vec<PathBuf>, CliError> {
    let b = scenario.build_drift()?;
    let path = scenario.build_noise()?;
    let settings = scenario.solve_settings();
    let cache = SolverCache::new();
    let min = minimal_solution_cached(&b, &path, &settings, &cache)?;
    let max = maximal_solution_cached(&b, &path, &settings, &cache)?;
    let stats = gap(&min, &max)?;
    let mut artifacts = solution_artifacts(scenario, "minimal", &min, &path, &settings, out_dir)?;
    artifacts.extend(solution_artifacts(scenario, "maximal", &max, &path, &settings, out_dir)?);
    let summary = json!({
        "scenario": scenario.name,
        "gap": stats,
        "minimal": {"route": min.route(), "verdict": min.verdict(), "stages": min.trail().len()},
        "maximal": {"route": max.route(), "verdict": max.verdict(), "stages": max.trail().len()},
    });
    artifacts.push(write_json(
        out_dir,
        &format!("{}-extremal.json", scenario.name),
        &summary,
    )?);
    if svg_wanted {
        let mk = |sol: &SolutionPath| -> Vec<(f64, f64)> {
            sol.times().iter().zip(sol.x()).map(|(&t, &x)| (t, x)).collect()
        };
        let doc = svg::render(
            &format!("{} extremal solutions", scenario.name),
            &[
                svg::Series { label: "x minimal", color: "#1f77b4", points: mk(&min) },
                svg::Series { label: "x maximal", color: "#d62728", points: mk(&max) },
            ],
        );
        artifacts.push(write_text(
            out_dir,
            &format!("{}-extremal.svg", scenario.name),
            &doc,
        )?);
    }
    println!(
        "{}: sup gap = {:.6e} at t = {:.4}, L1 gap = {:.6e}",
        scenario.name, stats.sup_gap, stats.argmax_time, stats.l1_gap
    );
    Ok(artifacts)
}

fn verdict_word(c: &Certificate) -> &'static str {
    match (c.criterion, c.verdict) {
        (certify::Criterion::PeanoH8 | certify::Criterion::PeanoH9, CertVerdict::Integrable) => {
            "holds"
        }
        (certify::Criterion::PeanoH8 | certify::Criterion::PeanoH9, CertVerdict::Diverging) => {
            "fails"
        }
        (_, CertVerdict::Integrable) => "integrable",
        (_, CertVerdict::Diverging) => "diverging",
        (_, CertVerdict::Inconclusive) => "inconclusive",
    }
}

pub fn cmd_certify(
    scenario: &Scenario,
    out_dir: &Path,
    svg_wanted: bool,
) -> Result<Vec<PathBuf>, CliError> {
    let b = scenario.build_drift()?;
    let path = scenario.build_noise()?;
    let settings = scenario.solve_settings();
    let cache = SolverCache::new();
    let eta = scenario.certificates.eta;

    let mut entries: Vec<Value> = Vec::new();
    let mut a_trace: Option<Vec<(f64, f64)>> = None;
    for which in &scenario.certificates.which {
        let outcome: Result<Certificate, String> = match which.as_str() {
            "iyanaga" => {
                let min = minimal_solution_cached(&b, &path, &settings, &cache)?;
                match certify_iyanaga(&b, &path, &min) {
                    Ok(cert) => {
                        if svg_wanted {
                            if let Ok(curve) = certify::a_curve(&b, &path, &min) {
                                a_trace = Some(
                                    curve
                                        .times
                                        .iter()
                                        .zip(&curve.values)
                                        .map(|(&t, v)| (t, v.capped(10.0)))
                                        .collect(),
                                );
                            }
                        }
                        Ok(cert)
                    }
                    Err(e) => Err(e.to_string()),
                }
            }
            "nonneg-noise" => certify_nonneg_noise(&b, &path).map_err(|e| e.to_string()),
            "lakshmikantham" => certify_lakshmikantham(&path).map_err(|e| e.to_string()),
            "peano-h8" | "peano-h9" => {
                let side = if which == "peano-h8" { PeanoSide::H8 } else { PeanoSide::H9 };
                match certify::default_transform_for(&b, eta) {
                    Some(t) => certify_peano(&b, &t, side, &certify::peano_grid(eta, 1000))
                        .map_err(|e| e.to_string()),
                    None => Err(format!(
                        "no default transform for drift kind {:?}; H8/H9 need the power family",
                        b.kind()
                    )),
                }
            }
            _ => unreachable!("validated certificate name"),
        };
        match outcome {
            Ok(cert) => {
                println!(
                    "{:<16} {:<13} integral={:<12.5e} tail={:<8.3} capped={:.2e}",
                    which,
                    verdict_word(&cert),
                    cert.integral_value,
                    cert.tail_exponent,
                    cert.capped_fraction
                );
                entries.push(json!({
                    "criterion": which,
                    "status": "evaluated",
                    "certificate": cert,
                }));
            }
            Err(reason) => {
                println!("{:<16} {:<13} ({reason})", which, "skipped");
                entries.push(json!({
                    "criterion": which,
                    "status": "skipped",
                    "reason": reason,
                }));
            }
        }
    }
    let doc = json!({
        "scenario": scenario.name,
        "drift": b.descriptor(),
        "noise": path.provenance(),
        "certificates": entries,
    });
    let mut artifacts = vec![write_json(
        out_dir,
        &format!("{}-certificates.json", scenario.name),
        &doc,
    )?];
    if let Some(points) = a_trace {
        let doc = svg::render(
            &format!("{} a(t) trace (capped at 10)", scenario.name),
            &[svg::Series { label: "a(t)", color: "#2ca02c", points }],
        );
        artifacts.push(write_text(
            out_dir,
            &format!("{}-a-trace.svg", scenario.name),
            &doc,
        )?);
    }
    Ok(artifacts)
}

pub fn cmd_ensemble(scenario: &Scenario, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let b = scenario.build_drift()?;
    let kind = scenario.ensemble_noise_kind().ok_or_else(|| {
        CliError::Unsupported(format!(
            "ensemble runs need a seeded noise kind (brownian family or zero), got \"{}\"",
            scenario.noise.kind
        ))
    })?;
    let settings = scenario.ensemble_settings();
    let report = run_gap_ensemble(&b, kind, &settings)?;
    let doc = serde_json::to_value(&report).expect("serializable report");
    let json_path = write_json(out_dir, &format!("{}-ensemble.json", scenario.name), &doc)?;
    let mut csv = Vec::new();
    report::write_records_csv(&report, &mut csv).expect("in-memory write");
    let csv_path = write_text(
        out_dir,
        &format!("{}-records.csv", scenario.name),
        &String::from_utf8(csv).expect("utf8"),
    )?;
    let a = &report.aggregates;
    println!(
        "{}: {} paths, gap median {:.3e} / p95 {:.3e}, {:.1}% below {:.0e}, {} not converged ({:.1}s)",
        scenario.name,
        a.paths,
        a.gap_quantiles.median,
        a.gap_quantiles.p95,
        100.0 * a.fraction_gap_below_epsilon,
        a.gap_epsilon,
        a.not_converged_paths,
        report.wall_clock_seconds,
    );
    Ok(vec![json_path, csv_path])
}

pub fn cmd_approx_cache(scenario: &Scenario, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let b = scenario.build_drift()?;
    let mode = match b.kind() {
        DriftKind::DiscontinuousSqrt => ShiftMode::SmoothedDiscontinuous,
        _ => ShiftMode::MinusShift,
    };
    let polys = build_family(&b, mode, 20, 10_000)?;
    let family = PolyFamily {
        drift: b.descriptor(),
        mode,
        polys,
    };
    let path = write_json(
        out_dir,
        &format!("{}-family.json", scenario.name),
        &serde_json::to_value(&family).expect("serializable family"),
    )?;
    let worst = family
        .polys
        .iter()
        .map(|p| p.certified_sup_error() / p.epsilon_n())
        .fold(0.0f64, f64::max);
    println!(
        "{}: cached {} approximants (n <= 20), worst error/eps ratio {:.3}",
        scenario.name,
        family.polys.len(),
        worst
    );
    Ok(vec![path])
}

// ---------------------------------------------------------------------------
// reproduce

pub const KNOWN_CASES: [&str; 6] = [
    "sqrt-zero-noise",
    "sqrt-brownian",
    "sqrt-abs-brownian",
    "discontinuous-sqrt-brownian",
    "sqrt-neg-abs-brownian",
    "smooth-noise-peano",
];

struct Check {
    name: &'static str,
    observed: Value,
    expected: Value,
    passed: bool,
}

fn num_check(name: &'static str, value: f64, threshold: f64) -> Check {
    Check {
        name,
        observed: json!(value),
        expected: json!({"below": threshold}),
        passed: value < threshold,
    }
}

fn verdict_check(name: &'static str, got: CertVerdict, want: CertVerdict) -> Check {
    Check {
        name,
        observed: json!(format!("{got:?}").to_lowercase()),
        expected: json!(format!("{want:?}").to_lowercase()),
        passed: got == want,
    }
}

fn bool_check(name: &'static str, got: bool) -> Check {
    Check {
        name,
        observed: json!(got),
        expected: json!(true),
        passed: got,
    }
}

/// Runs a built-in reproduction case, writing solutions, certificates and a
/// pass/fail summary. The exit status reports only operational problems; the
/// mathematical outcome lives in the summary.
pub fn cmd_reproduce(case: &str, overrides: &Overrides) -> Result<Vec<PathBuf>, CliError> {
    if !KNOWN_CASES.contains(&case) {
        return Err(CliError::UnknownCase(case.to_string()));
    }
    let out_dir = resolve_out_dir(overrides, None);
    let grid = overrides.grid.unwrap_or(1 << 14);
    let seed = overrides.seed.unwrap_or(42);
    let settings = SolveSettings::with_grid(grid);
    let pgrid = crate::noise::PathGrid::uniform(grid)
        .map_err(|e| CliError::Unsupported(e.to_string()))?;
    let sqrt = DriftSpec::power_law(0.5).expect("alpha 0.5 valid");
    let cache = SolverCache::new();

    let (drift, path): (DriftSpec, NoisePath) = match case {
        "sqrt-zero-noise" => (sqrt.clone(), NoisePath::zero(&pgrid, 1.0)),
        "sqrt-brownian" => (sqrt.clone(), NoisePath::sample_brownian(seed, &pgrid, 1.0)),
        "sqrt-abs-brownian" => (
            sqrt.clone(),
            NoisePath::sample_brownian(seed, &pgrid, 1.0).transform_abs(),
        ),
        "sqrt-neg-abs-brownian" => (
            sqrt.clone(),
            NoisePath::sample_brownian(seed, &pgrid, 1.0).transform_neg_abs(),
        ),
        "discontinuous-sqrt-brownian" => (
            DriftSpec::discontinuous_sqrt(),
            NoisePath::sample_brownian(seed, &pgrid, 1.0),
        ),
        "smooth-noise-peano" => (sqrt.clone(), NoisePath::smooth(1.0, 1.0, &pgrid, 1.0)),
        _ => unreachable!("checked above"),
    };

    let min = minimal_solution_cached(&drift, &path, &settings, &cache)?;
    let max = maximal_solution_cached(&drift, &path, &settings, &cache)?;
    let stats = gap(&min, &max)?;

    let mut checks: Vec<Check> = Vec::new();
    match case {
        "sqrt-zero-noise" => {
            // the two extremal solutions are genuinely distinct: 0 and t^2/4
            checks.push(num_check("minimal sup-norm", min.sup_abs_y(), 1e-6));
            checks.push(Check {
                name: "maximal at t = 1 near 1/4",
                observed: json!(max.value_at_end()),
                expected: json!({"within": 1e-3, "of": 0.25}),
                passed: (max.value_at_end() - 0.25).abs() < 1e-3,
            });
            checks.push(num_check("sup gap near 1/4: |gap - 0.25|",
                (stats.sup_gap - 0.25).abs(), 1e-3));
            let cert = certify_iyanaga(&drift, &path, &min)?;
            checks.push(verdict_check("iyanaga verdict", cert.verdict, CertVerdict::Diverging));
        }
        "sqrt-brownian" => {
            checks.push(num_check("sup gap", stats.sup_gap, 1e-2));
            let cert = certify_iyanaga(&drift, &path, &min)?;
            checks.push(verdict_check("iyanaga verdict", cert.verdict, CertVerdict::Integrable));
            checks.push(bool_check("both routes converged", min.is_converged() && max.is_converged()));
        }
        "sqrt-abs-brownian" => {
            let lk = certify_lakshmikantham(&path)?;
            checks.push(verdict_check("lakshmikantham verdict", lk.verdict, CertVerdict::Integrable));
            let nn = certify_nonneg_noise(&drift, &path)?;
            checks.push(verdict_check("nonneg-noise verdict", nn.verdict, CertVerdict::Integrable));
            checks.push(num_check("sup gap", stats.sup_gap, 1e-2));
        }
        "sqrt-neg-abs-brownian" => {
            let cert = certify_iyanaga(&drift, &path, &min)?;
            checks.push(verdict_check("iyanaga verdict", cert.verdict, CertVerdict::Integrable));
            checks.push(num_check("sup gap", stats.sup_gap, 1e-2));
            checks.push(bool_check(
                "x stays below y (noise non-positive)",
                min.x().iter().zip(min.y()).all(|(&x, &y)| x <= y + 1e-12),
            ));
        }
        "discontinuous-sqrt-brownian" => {
            checks.push(bool_check("bridge route converged", min.is_converged() && max.is_converged()));
            checks.push(num_check("sup gap", stats.sup_gap, 1e-2));
            checks.push(bool_check(
                "a-priori bound held on every stage",
                min.trail().iter().chain(max.trail()).all(|r| r.apriori_ok),
            ));
        }
        "smooth-noise-peano" => {
            let t = certify::default_transform_for(&drift, 1.0).expect("power transform");
            let cert = certify_peano(&drift, &t, PeanoSide::H9, &certify::peano_grid(1.0, 1000))?;
            checks.push(verdict_check("h9 transform test", cert.verdict, CertVerdict::Integrable));
            checks.push(num_check("sup gap", stats.sup_gap, 1e-3));
        }
        _ => unreachable!(),
    }

    let passed = checks.iter().all(|c| c.passed);
    for c in &checks {
        println!(
            "[{}] {}: observed {}, expected {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.observed,
            c.expected
        );
    }
    println!(
        "{case}: {}",
        if passed { "all checks passed" } else { "CHECKS FAILED" }
    );

    // artifacts: solution CSVs and sidecars, certificates where computed,
    // and the summary with pass/fail per expectation
    std::fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
    let mut artifacts = Vec::new();
    for (label, sol) in [("minimal", &min), ("maximal", &max)] {
        let mut csv = Vec::new();
        report::write_solution_csv(sol, &mut csv).expect("in-memory write");
        artifacts.push(write_text(
            &out_dir,
            &format!("{case}-{label}.csv"),
            &String::from_utf8(csv).expect("utf8"),
        )?);
        let sidecar = report::solution_sidecar(sol, &path, &drift.descriptor(), &settings);
        artifacts.push(write_json(&out_dir, &format!("{case}-{label}.json"), &sidecar)?);
    }
    let summary = json!({
        "case": case,
        "passed": passed,
        "gap": stats,
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "observed": c.observed,
            "expected": c.expected,
            "passed": c.passed,
        })).collect::<Vec<_>>(),
    });
    artifacts.push(write_json(&out_dir, &format!("{case}-summary.json"), &summary)?);
    if overrides.svg {
        let mk = |sol: &SolutionPath| -> Vec<(f64, f64)> {
            sol.times().iter().zip(sol.x()).map(|(&t, &x)| (t, x)).collect()
        };
        let doc = svg::render(
            &format!("{case} extremal solutions"),
            &[
                svg::Series { label: "x minimal", color: "#1f77b4", points: mk(&min) },
                svg::Series { label: "x maximal", color: "#d62728", points: mk(&max) },
            ],
        );
        artifacts.push(write_text(&out_dir, &format!("{case}-extremal.svg"), &doc)?);
    }
    Ok(artifacts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "extremal-ode-test-{tag}-{}",
            std::process::id()
        ));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn write_scenario(dir: &Path, name: &str, text: &str) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn zero_scenario_solves_to_zero_csv() {
        let dir = tmp_dir("solve");
        let scenario = write_scenario(
            &dir,
            "zero.toml",
            r#"
name = "zero-zero"
[drift]
kind = "zero"
[noise]
kind = "zero"
[run]
horizon = 1.0
grid = 64
"#,
        );
        let overrides = Overrides {
            out: Some(dir.join("out")),
            ..Overrides::default()
        };
        let artifacts =
            run_scenario_command(CommandKind::Solve, &scenario, &overrides).unwrap();
        let csv = std::fs::read_to_string(&artifacts[0]).unwrap();
        assert!(csv.starts_with("t,y,x\n"));
        for line in csv.lines().skip(1) {
            let mut parts = line.split(',');
            let _t = parts.next().unwrap();
            assert_eq!(parts.next().unwrap(), "0");
            assert_eq!(parts.next().unwrap(), "0");
        }
        // sidecar validates against the shipped schema
        let sidecar: Value =
            serde_json::from_str(&std::fs::read_to_string(&artifacts[1]).unwrap()).unwrap();
        let schema = report::load_schema(
            Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").as_path(),
            "solution-sidecar.schema.json",
        )
        .unwrap();
        report::check_against_schema(&schema, &sidecar).unwrap();
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn validation_error_names_alpha_range() {
        let dir = tmp_dir("badalpha");
        let scenario = write_scenario(
            &dir,
            "bad.toml",
            r#"
name = "bad"
[drift]
kind = "power-law"
alpha = 1.5
[noise]
kind = "zero"
"#,
        );
        let err = run_scenario_command(CommandKind::Solve, &scenario, &Overrides::default())
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("alpha") && msg.contains("(0, 1)"), "{msg}");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn ensemble_json_is_bit_identical_across_runs() {
        let dir = tmp_dir("ens");
        let scenario = write_scenario(
            &dir,
            "ens.toml",
            r#"
name = "mini-ensemble"
[drift]
kind = "power-law"
alpha = 0.5
[noise]
kind = "brownian"
seed = 42
[run]
grid = 1024
[ensemble]
paths = 10
seed_base = 7
gap_epsilon = 1e-2
"#,
        );
        let o1 = Overrides { out: Some(dir.join("a")), ..Overrides::default() };
        let o2 = Overrides { out: Some(dir.join("b")), ..Overrides::default() };
        let a1 = run_scenario_command(CommandKind::Ensemble, &scenario, &o1).unwrap();
        let a2 = run_scenario_command(CommandKind::Ensemble, &scenario, &o2).unwrap();
        let j1 = std::fs::read(&a1[0]).unwrap();
        let j2 = std::fs::read(&a2[0]).unwrap();
        assert_eq!(j1, j2);
        // and the report validates against its schema
        let doc: Value = serde_json::from_slice(&j1).unwrap();
        let schema = report::load_schema(
            Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").as_path(),
            "ensemble-report.schema.json",
        )
        .unwrap();
        report::check_against_schema(&schema, &doc).unwrap();
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn unknown_case_rejected() {
        assert!(matches!(
            cmd_reproduce("sqrt-banana", &Overrides::default()),
            Err(CliError::UnknownCase(_))
        ));
    }

    #[test]
    fn reproduce_summary_and_family_validate_against_schemas() {
        let dir = tmp_dir("repro");
        let overrides = Overrides {
            out: Some(dir.clone()),
            grid: Some(8192),
            ..Overrides::default()
        };
        let artifacts = cmd_reproduce("sqrt-zero-noise", &overrides).unwrap();
        let schema_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas");
        let summary_path = artifacts
            .iter()
            .find(|p| p.to_string_lossy().ends_with("summary.json"))
            .unwrap();
        let summary: Value =
            serde_json::from_str(&std::fs::read_to_string(summary_path).unwrap()).unwrap();
        let schema = report::load_schema(&schema_dir, "reproduce-summary.schema.json").unwrap();
        report::check_against_schema(&schema, &summary).unwrap();
        assert_eq!(summary["passed"], Value::Bool(true), "{summary}");

        // approx-cache family document
        let scenario = write_scenario(
            &dir,
            "fam.toml",
            r#"
name = "family-check"
[drift]
kind = "power-law"
alpha = 0.5
[noise]
kind = "zero"
"#,
        );
        let fam_overrides = Overrides { out: Some(dir.clone()), ..Overrides::default() };
        let fam = run_scenario_command(CommandKind::ApproxCache, &scenario, &fam_overrides);
        // n <= 20 certification takes a few seconds; validate the document
        let fam = fam.unwrap();
        let doc: Value =
            serde_json::from_str(&std::fs::read_to_string(&fam[0]).unwrap()).unwrap();
        let schema = report::load_schema(&schema_dir, "poly-family.schema.json").unwrap();
        report::check_against_schema(&schema, &doc).unwrap();
        assert_eq!(doc["polys"].as_array().unwrap().len(), 20);

        // the H7 block of ensemble aggregates matches its schema
        let est = crate::ensemble::estimate_h7(0.5, 20, 256, 1.0, 3).unwrap();
        let h7doc = serde_json::to_value(&est).unwrap();
        let schema = report::load_schema(&schema_dir, "h7.schema.json").unwrap();
        report::check_against_schema(&schema, &h7doc).unwrap();
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn certify_emits_schema_valid_json() {
        let dir = tmp_dir("cert");
        let scenario = write_scenario(
            &dir,
            "cert.toml",
            r#"
name = "certify-sqrt"
[drift]
kind = "power-law"
alpha = 0.5
[noise]
kind = "abs-brownian"
seed = 7
[run]
grid = 4096
[certificates]
which = ["iyanaga", "nonneg-noise", "lakshmikantham", "peano-h9"]
eta = 1.0
"#,
        );
        let overrides = Overrides { out: Some(dir.join("out")), ..Overrides::default() };
        let artifacts =
            run_scenario_command(CommandKind::Certify, &scenario, &overrides).unwrap();
        let doc: Value =
            serde_json::from_str(&std::fs::read_to_string(&artifacts[0]).unwrap()).unwrap();
        let schema = report::load_schema(
            Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").as_path(),
            "certificates.schema.json",
        )
        .unwrap();
        report::check_against_schema(&schema, &doc).unwrap();
        assert_eq!(doc["certificates"].as_array().unwrap().len(), 4);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
