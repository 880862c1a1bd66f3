//! Seeded Monte Carlo ensembles over Brownian paths: uniqueness-gap
//! statistics, certificate success rates, the H7 expectation check against
//! its quadrature oracle, and grid-refinement studies.
//!
//! Reproducibility contract: path i uses seed mix(seed_base, i); refinement
//! levels additionally mix the grid size, mix(mix(seed_base, i), n). Paths
//! are independent work items (rayon); records are collected in path order
//! and aggregates reduce sequentially over that fixed order, so reports are
//! bit-identical regardless of worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

use crate::certify::{
    certify_iyanaga, certify_lakshmikantham, certify_nonneg_noise, gronwall_gap_bound,
    CertVerdict,
};
use crate::drift::{check_hypotheses, default_grid, DriftSpec, Hypothesis, HypothesisOutcome};
use crate::noise::{NoisePath, PathGrid};
use crate::quad;
use crate::rng::{mix, GaussianSource};
use crate::solver::{
    gap, maximal_solution_cached, minimal_solution_cached, SolveSettings, SolverCache,
};

#[derive(Debug, thiserror::Error)]
pub enum EnsembleError {
    #[error("drift fails its declared hypothesis {hypothesis:?} at x = {at}")]
    HypothesisViolation { hypothesis: Hypothesis, at: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Drift(#[from] crate::drift::DriftError),
}

/// Noise family an ensemble draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    Brownian,
    AbsBrownian,
    NegAbsBrownian,
    Zero,
}

impl NoiseKind {
    pub fn sample(&self, seed: u64, grid: &PathGrid, horizon: f64) -> NoisePath {
        match self {
            NoiseKind::Brownian => NoisePath::sample_brownian(seed, grid, horizon),
            NoiseKind::AbsBrownian => {
                NoisePath::sample_brownian(seed, grid, horizon).transform_abs()
            }
            NoiseKind::NegAbsBrownian => {
                NoisePath::sample_brownian(seed, grid, horizon).transform_neg_abs()
            }
            NoiseKind::Zero => NoisePath::zero(grid, horizon),
        }
    }

    fn is_nonnegative(&self) -> bool {
        matches!(self, NoiseKind::AbsBrownian | NoiseKind::Zero)
    }
}

/// Per-path outcome of a gap ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathRecord {
    pub index: u64,
    pub seed: u64,
    pub sup_gap: f64,
    pub l1_gap: f64,
    pub min_converged: bool,
    pub max_converged: bool,
    pub min_stages: usize,
    pub max_stages: usize,
    pub apriori_ok: bool,
    pub iyanaga: Option<CertVerdict>,
    pub iyanaga_integral: Option<f64>,
    pub nonneg_noise: Option<CertVerdict>,
    pub lakshmikantham: Option<CertVerdict>,
    /// Solver failure, recorded instead of aborting the ensemble.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapQuantiles {
    pub min: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub p95: f64,
    pub max: f64,
}

/// Coupling between certificate verdicts and measured gaps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingReport {
    pub integrable_paths: usize,
    pub median_gap_integrable: f64,
    pub p95_gap_integrable: f64,
    /// p95 <= 10 x median among Integrable-verdict paths.
    pub quantile_ratio_ok: bool,
    /// Paths whose gap exceeds 10x the Integrable median (listed, not hidden).
    pub outlier_paths: Vec<u64>,
    /// Paths with an Integrable verdict whose gap exceeds the Gronwall
    /// ceiling plus the discretization allowance.
    pub gronwall_violations: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McAggregates {
    pub paths: usize,
    pub failed_paths: usize,
    pub not_converged_paths: usize,
    pub gap_epsilon: f64,
    pub fraction_gap_below_epsilon: f64,
    pub gap_quantiles: GapQuantiles,
    pub verdict_counts: BTreeMap<String, BTreeMap<String, usize>>,
    pub coupling: CouplingReport,
    /// H7 moment check with the ensemble's seeds, for power-law drifts.
    pub h7: Option<H7Estimate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McReport {
    pub scenario_id: String,
    pub seed_base: u64,
    pub path_count: usize,
    pub grid_steps: usize,
    pub horizon: f64,
    pub drift: serde_json::Value,
    pub noise_kind: NoiseKind,
    pub records: Vec<PathRecord>,
    pub aggregates: McAggregates,
    /// Timing is skipped on serialization so emitted reports are
    /// bit-identical for identical (scenario, seed base).
    #[serde(skip_serializing, default)]
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleSettings {
    pub paths: usize,
    pub seed_base: u64,
    pub gap_epsilon: f64,
    /// Gap allowance added to the Gronwall ceiling for the coupling check.
    pub discretization_allowance: f64,
    pub solver: SolveSettings,
}

impl Default for EnsembleSettings {
    fn default() -> Self {
        EnsembleSettings {
            paths: 100,
            seed_base: 42,
            gap_epsilon: 1e-2,
            discretization_allowance: 1e-3,
            solver: SolveSettings::default(),
        }
    }
}

/// Checks the drift against its own declared hypothesis profile.
pub fn verify_declared_hypotheses(b: &DriftSpec) -> Result<(), EnsembleError> {
    let declared: Vec<Hypothesis> = b
        .hypothesis_profile()
        .iter()
        .copied()
        .filter(|h| !matches!(h, Hypothesis::H8 | Hypothesis::H9))
        .collect();
    let grid = default_grid(4.0);
    let report = check_hypotheses(b, &declared, &grid, None)?;
    for (h, outcome) in report {
        if let HypothesisOutcome::Fails { at } = outcome {
            return Err(EnsembleError::HypothesisViolation { hypothesis: h, at });
        }
    }
    Ok(())
}

/// Runs the seeded gap ensemble: per derived seed, sample a path, compute the
/// extremal pair, record the gap and certificates. Deterministic in
/// (seed_base, settings); solver failures are recorded per path, not fatal.
pub fn run_gap_ensemble(
    b: &DriftSpec,
    noise: NoiseKind,
    settings: &EnsembleSettings,
) -> Result<McReport, EnsembleError> {
    if settings.paths == 0 {
        return Err(EnsembleError::InvalidParameter("need at least one path".into()));
    }
    verify_declared_hypotheses(b)?;
    let t_start = Instant::now();
    let horizon = 1.0;
    let grid_steps = settings.solver.grid.n_steps();
    let path_grid = settings.solver.grid.clone();
    let cache = SolverCache::new();

    let records: Vec<PathRecord> = (0..settings.paths as u64)
        .into_par_iter()
        .map(|i| {
            let seed = mix(settings.seed_base, i);
            let path = noise.sample(seed, &path_grid, horizon);
            run_single(b, &path, i, seed, noise, &settings.solver, &cache)
        })
        .collect();

    let mut aggregates = aggregate(&records, settings);
    if let crate::drift::DriftKind::PowerLaw { alpha } = b.kind() {
        aggregates.h7 = estimate_h7(
            *alpha,
            settings.paths,
            grid_steps,
            horizon,
            settings.seed_base,
        )
        .ok();
    }
    Ok(McReport {
        scenario_id: format!("{:?}/{noise:?}", b.kind()),
        seed_base: settings.seed_base,
        path_count: settings.paths,
        grid_steps,
        horizon,
        drift: b.descriptor(),
        noise_kind: noise,
        records,
        aggregates,
        wall_clock_seconds: t_start.elapsed().as_secs_f64(),
    })
}

fn run_single(
    b: &DriftSpec,
    path: &NoisePath,
    index: u64,
    seed: u64,
    noise: NoiseKind,
    solver: &SolveSettings,
    cache: &SolverCache,
) -> PathRecord {
    let mut rec = PathRecord {
        index,
        seed,
        sup_gap: f64::NAN,
        l1_gap: f64::NAN,
        min_converged: false,
        max_converged: false,
        min_stages: 0,
        max_stages: 0,
        apriori_ok: true,
        iyanaga: None,
        iyanaga_integral: None,
        nonneg_noise: None,
        lakshmikantham: None,
        error: None,
    };
    let min = match minimal_solution_cached(b, path, solver, cache) {
        Ok(s) => s,
        Err(e) => {
            rec.error = Some(format!("minimal: {e}"));
            return rec;
        }
    };
    let max = match maximal_solution_cached(b, path, solver, cache) {
        Ok(s) => s,
        Err(e) => {
            rec.error = Some(format!("maximal: {e}"));
            return rec;
        }
    };
    rec.min_converged = min.is_converged();
    rec.max_converged = max.is_converged();
    rec.min_stages = min.trail().len();
    rec.max_stages = max.trail().len();
    rec.apriori_ok = min.trail().iter().chain(max.trail()).all(|r| r.apriori_ok);
    match gap(&min, &max) {
        Ok(g) => {
            rec.sup_gap = g.sup_gap;
            rec.l1_gap = g.l1_gap;
        }
        Err(e) => {
            rec.error = Some(format!("gap: {e}"));
            return rec;
        }
    }
    if b.declares(Hypothesis::H3) {
        if let Ok(cert) = certify_iyanaga(b, path, &min) {
            rec.iyanaga = Some(cert.verdict);
            rec.iyanaga_integral = Some(cert.integral_value);
        }
    }
    if noise.is_nonnegative() {
        if let Ok(cert) = certify_nonneg_noise(b, path) {
            rec.nonneg_noise = Some(cert.verdict);
        }
        if let Ok(cert) = certify_lakshmikantham(path) {
            rec.lakshmikantham = Some(cert.verdict);
        }
    }
    rec
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[pos.min(sorted.len() - 1)]
}

fn aggregate(records: &[PathRecord], settings: &EnsembleSettings) -> McAggregates {
    let ok: Vec<&PathRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let failed_paths = records.len() - ok.len();
    let not_converged_paths = ok
        .iter()
        .filter(|r| !(r.min_converged && r.max_converged))
        .count();
    let mut gaps: Vec<f64> = ok.iter().map(|r| r.sup_gap).collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let below = gaps
        .iter()
        .filter(|&&g| g < settings.gap_epsilon)
        .count();
    let gap_quantiles = GapQuantiles {
        min: gaps.first().copied().unwrap_or(f64::NAN),
        p25: quantile(&gaps, 0.25),
        median: quantile(&gaps, 0.5),
        p75: quantile(&gaps, 0.75),
        p95: quantile(&gaps, 0.95),
        max: gaps.last().copied().unwrap_or(f64::NAN),
    };

    let mut verdict_counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut bump = |crit: &str, v: Option<CertVerdict>| {
        if let Some(v) = v {
            *verdict_counts
                .entry(crit.to_string())
                .or_default()
                .entry(format!("{v:?}").to_lowercase())
                .or_default() += 1;
        }
    };
    for r in &ok {
        bump("iyanaga", r.iyanaga);
        bump("nonneg-noise", r.nonneg_noise);
        bump("lakshmikantham", r.lakshmikantham);
    }

    // coupling: gaps among Integrable-verdict paths
    let mut integ_gaps: Vec<(u64, f64)> = ok
        .iter()
        .filter(|r| r.iyanaga == Some(CertVerdict::Integrable))
        .map(|r| (r.index, r.sup_gap))
        .collect();
    integ_gaps.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let ig: Vec<f64> = integ_gaps.iter().map(|p| p.1).collect();
    let median_i = quantile(&ig, 0.5);
    let p95_i = quantile(&ig, 0.95);
    let outlier_paths: Vec<u64> = integ_gaps
        .iter()
        .filter(|(_, g)| *g > 10.0 * median_i)
        .map(|(i, _)| *i)
        .collect();
    let gronwall_violations: Vec<u64> = ok
        .iter()
        .filter(|r| {
            r.iyanaga == Some(CertVerdict::Integrable)
                && r.sup_gap
                    > gronwall_gap_bound(
                        r.iyanaga_integral.unwrap_or(0.0),
                        settings.solver.stage_tolerance,
                    ) + settings.discretization_allowance
        })
        .map(|r| r.index)
        .collect();

    McAggregates {
        paths: records.len(),
        failed_paths,
        not_converged_paths,
        gap_epsilon: settings.gap_epsilon,
        fraction_gap_below_epsilon: below as f64 / gaps.len().max(1) as f64,
        gap_quantiles,
        verdict_counts,
        coupling: CouplingReport {
            integrable_paths: ig.len(),
            median_gap_integrable: median_i,
            p95_gap_integrable: p95_i,
            quantile_ratio_ok: ig.is_empty() || p95_i <= 10.0 * median_i,
            outlier_paths,
            gronwall_violations,
        },
        h7: None,
    }
}

// ---------------------------------------------------------------------------
// H7 expectation check

/// The closed-form target of the H7 check: E int_0^T b'(|W_s|+) ds for
/// b = |x|^alpha, evaluated by deterministic quadrature (the constant
/// C_alpha = E|Z|^(alpha-1) is computed, never hardcoded, and its provenance
/// is recorded).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct H7Target {
    pub alpha: f64,
    pub horizon: f64,
    pub oracle_value: f64,
    pub c_alpha: f64,
    pub method: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct H7Estimate {
    pub alpha: f64,
    pub horizon: f64,
    pub paths: usize,
    pub grid_steps: usize,
    pub estimate: f64,
    pub stderr: f64,
    /// Deterministic-quadrature value of E int_0^T b'(|W_s|+) ds.
    pub oracle_value: f64,
    /// The Gaussian moment E|Z|^(alpha-1), from the quadrature oracle.
    pub c_alpha: f64,
    pub oracle_method: String,
}

/// E|Z|^(alpha-1) for a standard normal Z, by Gauss-Legendre quadrature of
/// the smooth substituted integrand: with z = u^(1/alpha),
/// int_0^inf z^(alpha-1) e^(-z^2/2) dz = (1/alpha) int_0^inf e^(-u^(2/alpha)/2) du.
pub fn gaussian_abs_moment(alpha: f64) -> f64 {
    let upper = 90.0f64.powf(alpha / 2.0).max(1.0);
    let inner = quad::integrate(
        |u: f64| (-0.5 * u.powf(2.0 / alpha)).exp(),
        0.0,
        upper,
        196,
    );
    (2.0 / std::f64::consts::PI).sqrt() * inner / alpha
}

/// The H7 oracle: E int_0^T alpha |W_s|^(alpha-1) ds
///   = alpha * E|Z|^(alpha-1) * 2 T^((alpha+1)/2) / (alpha+1).
pub fn h7_oracle(alpha: f64, horizon: f64) -> H7Target {
    let c_alpha = gaussian_abs_moment(alpha);
    let time_factor = 2.0 * horizon.powf((alpha + 1.0) / 2.0) / (alpha + 1.0);
    H7Target {
        alpha,
        horizon,
        oracle_value: alpha * c_alpha * time_factor,
        c_alpha,
        method: "gauss-legendre-196 on exp(-u^(2/alpha)/2), u = z^alpha".into(),
    }
}

/// Per-path time integral of alpha |W_s|^(alpha-1) over the linear bridge:
/// midpoint rule, with steps straddling a sign change of W integrated by the
/// exact antiderivative sign(v) |v|^alpha (exact for the linear bridge, and
/// the reason single near-zero samples cannot blow up the estimate).
fn h7_path_integral(alpha: f64, times: &[f64], w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        let (a, b) = (w[i - 1], w[i]);
        let straddles = a.signum() != b.signum() || a.abs() < 1e-12 || b.abs() < 1e-12;
        if straddles && (b - a).abs() > 1e-300 {
            let anti = |v: f64| v.signum() * v.abs().powf(alpha);
            acc += (anti(b) - anti(a)) / ((b - a) / dt);
        } else {
            let mid = 0.5 * (a + b);
            acc += alpha * mid.abs().powf(alpha - 1.0) * dt;
        }
    }
    acc
}

/// Monte Carlo estimate of E int_0^T b'(|W_s|+) ds for b = |x|^alpha,
/// alpha in (0, 1], against the quadrature oracle.
pub fn estimate_h7(
    alpha: f64,
    paths: usize,
    grid_steps: usize,
    horizon: f64,
    seed_base: u64,
) -> Result<H7Estimate, EnsembleError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(EnsembleError::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if paths == 0 || grid_steps < 2 {
        return Err(EnsembleError::InvalidParameter(
            "need at least one path and two grid steps".into(),
        ));
    }
    let dt = horizon / grid_steps as f64;
    let values: Vec<f64> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut gauss = GaussianSource::new(mix(seed_base, i));
            let mut w = Vec::with_capacity(grid_steps + 1);
            let mut times = Vec::with_capacity(grid_steps + 1);
            w.push(0.0);
            times.push(0.0);
            for k in 1..=grid_steps {
                let prev = *w.last().unwrap();
                w.push(prev + dt.sqrt() * gauss.next_standard_normal());
                times.push(horizon * k as f64 / grid_steps as f64);
            }
            h7_path_integral(alpha, &times, &w)
        })
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let target = h7_oracle(alpha, horizon);
    Ok(H7Estimate {
        alpha,
        horizon,
        paths,
        grid_steps,
        estimate: mean,
        stderr: (var / n).sqrt(),
        oracle_value: target.oracle_value,
        c_alpha: target.c_alpha,
        oracle_method: target.method,
    })
}

// ---------------------------------------------------------------------------
// refinement study

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementRow {
    pub grid_steps: usize,
    pub seed: u64,
    pub sup_gap: f64,
    /// gap at this resolution divided by the previous row's gap.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementTable {
    pub seed_base: u64,
    pub rows: Vec<RefinementRow>,
}

/// Gap versus grid resolution, with an independent path per level (seed mixed
/// with the level's grid size, so statements are about the scheme rather than
/// shared randomness).
pub fn refinement_study(
    b: &DriftSpec,
    noise: NoiseKind,
    seed: u64,
    grid_list: &[usize],
    settings: &SolveSettings,
) -> Result<RefinementTable, EnsembleError> {
    if grid_list.is_empty() || grid_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EnsembleError::InvalidParameter(
            "grid list must be non-empty and increasing".into(),
        ));
    }
    let cache = SolverCache::new();
    let mut rows: Vec<RefinementRow> = Vec::new();
    for &n in grid_list {
        let level_seed = mix(seed, n as u64);
        let grid = PathGrid::uniform(n)
            .map_err(|e| EnsembleError::InvalidParameter(e.to_string()))?;
        let path = noise.sample(level_seed, &grid, 1.0);
        let mut solver = settings.clone();
        solver.grid = grid;
        let record = run_single(b, &path, 0, level_seed, noise, &solver, &cache);
        let sup_gap = record.sup_gap;
        let ratio = rows.last().map(|prev: &RefinementRow| sup_gap / prev.sup_gap);
        rows.push(RefinementRow {
            grid_steps: n,
            seed: level_seed,
            sup_gap,
            ratio,
        });
    }
    Ok(RefinementTable {
        seed_base: seed,
        rows,
    })
}
