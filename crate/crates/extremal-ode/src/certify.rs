//! Uniqueness certificates: numerical evidence for the path-by-path
//! uniqueness criteria.
//!
//! - the L1 test on a(t), built from the one-sided derivative of the drift
//!   along the minimal solution (with the indicator split on the sign of the
//!   noise);
//! - the non-negative-noise specialization, which needs no solved path;
//! - the comparison-function test for the square-root drift with
//!   non-negative noise;
//! - the transform-monotonicity tests for differentiable noises (H8/H9);
//! - the Gronwall ceiling on solution separation.
//!
//! Certificates are evidence aligned with the theorems, not proofs: verdicts
//! are Integrable/Holds, Diverging/Fails, or Inconclusive, with the computed
//! integral, tail-exponent diagnostics and capping statistics attached.

use serde::{Deserialize, Serialize};

use crate::drift::{DriftError, DriftKind, DriftSpec, ExtReal, Hypothesis, Transform};
use crate::noise::NoisePath;
use crate::solver::SolutionPath;

/// Integrand cap applied where the derivative argument collapses.
pub const VALUE_CAP: f64 = 1e12;
/// Argument threshold below which a point counts as capped.
pub const ARG_DELTA: f64 = 1e-8;
/// Integrable requires at most this fraction of capped grid points.
pub const CAPPED_INTEGRABLE_MAX: f64 = 1e-3;
/// Beyond this capped fraction the integrand is treated as diverging.
pub const CAPPED_DIVERGING_MIN: f64 = 0.5;
/// Integrable requires every fitted tail exponent above this margin.
pub const EXPONENT_INTEGRABLE_MIN: f64 = -0.9;
/// At or below the L1 boundary exponent the verdict is Diverging.
pub const EXPONENT_DIVERGING_MAX: f64 = -1.0;
/// Integrable requires the integral to move less than this (relatively)
/// when the cap is doubled.
pub const CAP_SENSITIVITY_MAX: f64 = 0.01;
/// Points used per side in the tail log-log regression.
pub const TAIL_WINDOW: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum CertifyError {
    #[error("drift does not declare the hypotheses this certificate needs: {0}")]
    HypothesisViolation(String),
    #[error("noise must be non-negative for this certificate (omega({at}) < 0)")]
    NegativeNoise { at: f64 },
    #[error("invalid transform: {reason} (at x = {at})")]
    BadTransform { reason: String, at: f64 },
    #[error(transparent)]
    Drift(#[from] DriftError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    IyanagaL1,
    NonNegNoiseL1,
    Lakshmikantham,
    PeanoH8,
    PeanoH9,
}

/// Verdict of a certificate. For the monotonicity-style criteria (H8/H9)
/// `Integrable` reads "holds" and `Diverging` reads "fails".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertVerdict {
    Integrable,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub criterion: Criterion,
    pub verdict: CertVerdict,
    /// Capped trapezoid integral (finite by construction; divergence is
    /// expressed by the verdict, not by a float sentinel).
    pub integral_value: f64,
    /// Smallest fitted tail exponent near detected singular times; 0 when no
    /// singular time was detected.
    pub tail_exponent: f64,
    /// Fraction of grid points whose derivative argument fell below the
    /// capping threshold.
    pub capped_fraction: f64,
    /// Separation amplification ceiling exp(integral), when meaningful.
    pub gronwall_bound: Option<f64>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub cap: f64,
    pub arg_delta: f64,
    pub capped_points: usize,
    pub grid_points: usize,
    /// Relative change of the integral when the cap is doubled.
    pub cap_sensitivity: f64,
    /// First few detected singular times.
    pub singular_times: Vec<f64>,
    /// Fitted exponents (one per singular-time side with enough points).
    pub tail_exponents: Vec<f64>,
}

impl Certificate {
    pub fn is_integrable(&self) -> bool {
        self.verdict == CertVerdict::Integrable
    }

    /// "holds" for the H8/H9 criteria.
    pub fn holds(&self) -> bool {
        self.is_integrable()
    }
}

/// The certified ceiling on solution-separation growth,
/// initial_gap * exp(a_integral).
pub fn gronwall_gap_bound(a_integral: f64, initial_gap: f64) -> f64 {
    initial_gap * a_integral.exp()
}

// ---------------------------------------------------------------------------
// a(t) along the minimal solution

/// Sampled a(t) on the solution grid: extended-real values with the
/// derivative arguments that produced them.
#[derive(Debug, Clone)]
pub struct ACurve {
    pub times: Vec<f64>,
    pub values: Vec<ExtReal>,
    pub args: Vec<f64>,
}

/// Builds a(t) = 1_{omega>=0} b'((omega_t + int_0^t 1_{omega>0} b(omega))+)
///             + 1_{omega<0}  b'(|y_t + omega_t|+)
/// on the minimal solution's grid, with the inner integral by trapezoid.
pub fn a_curve(
    b: &DriftSpec,
    path: &NoisePath,
    y_min: &SolutionPath,
) -> Result<ACurve, CertifyError> {
    if !b.declares(Hypothesis::H3) {
        return Err(CertifyError::HypothesisViolation(format!(
            "the L1 criterion needs H3 (C^1 with non-increasing b' on the positive axis); profile is {:?}",
            b.hypothesis_profile()
        )));
    }
    let times = y_min.times().to_vec();
    let n = times.len();
    let omega: Vec<f64> = times.iter().map(|&t| path.eval_unchecked(t)).collect();
    // running integral of 1_{omega>0} b(omega) by trapezoid
    let mut inner = vec![0.0f64; n];
    for i in 1..n {
        let f0 = if omega[i - 1] > 0.0 { b.eval(omega[i - 1]) } else { 0.0 };
        let f1 = if omega[i] > 0.0 { b.eval(omega[i]) } else { 0.0 };
        inner[i] = inner[i - 1] + 0.5 * (f0 + f1) * (times[i] - times[i - 1]);
    }
    let mut values = Vec::with_capacity(n);
    let mut args = Vec::with_capacity(n);
    for i in 0..n {
        let arg = if omega[i] >= 0.0 {
            (omega[i] + inner[i]).max(0.0)
        } else {
            (y_min.y()[i] + omega[i]).abs()
        };
        values.push(b.right_derivative(arg)?);
        args.push(arg);
    }
    Ok(ACurve {
        times,
        values,
        args,
    })
}

/// a(t) at a single time (the grid point nearest from below).
pub fn eval_a(
    b: &DriftSpec,
    path: &NoisePath,
    y_min: &SolutionPath,
    t: f64,
) -> Result<ExtReal, CertifyError> {
    let curve = a_curve(b, path, y_min)?;
    let i = curve
        .times
        .partition_point(|&u| u <= t)
        .saturating_sub(1);
    Ok(curve.values[i])
}

// ---------------------------------------------------------------------------
// integrability scoring

fn score(criterion: Criterion, times: &[f64], values: &[ExtReal], args: &[f64]) -> Certificate {
    let n = times.len();
    let capped: Vec<bool> = args.iter().map(|&a| a < ARG_DELTA).collect();
    let capped_points = capped.iter().filter(|&&c| c).count();
    let capped_fraction = capped_points as f64 / n as f64;

    let integral = trapezoid_capped(times, values, &capped, VALUE_CAP);
    let integral2 = trapezoid_capped(times, values, &capped, 2.0 * VALUE_CAP);
    let cap_sensitivity = (integral2 - integral).abs() / integral.abs().max(1e-300);

    // singular times: maximal runs of capped points
    let mut singular_runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < n {
        if capped[i] {
            let start = i;
            while i < n && capped[i] {
                i += 1;
            }
            singular_runs.push((start, i - 1));
        } else {
            i += 1;
        }
    }

    let mut tail_exponents = Vec::new();
    let mut singular_times = Vec::new();
    for &(lo, hi) in &singular_runs {
        singular_times.push(times[lo]);
        // left side: usable points below the run
        if lo >= 2 {
            let mut pts = Vec::new();
            let mut j = lo - 1;
            loop {
                if !capped[j] {
                    if let ExtReal::Finite(v) = values[j] {
                        if v > 0.0 {
                            pts.push(((times[lo] - times[j]).max(1e-300), v));
                        }
                    }
                }
                if pts.len() >= TAIL_WINDOW || j == 0 {
                    break;
                }
                j -= 1;
            }
            if let Some(e) = loglog_slope(&pts) {
                tail_exponents.push(e);
            }
        }
        // right side
        if hi + 2 < n {
            let mut pts = Vec::new();
            for j in hi + 1..n {
                if !capped[j] {
                    if let ExtReal::Finite(v) = values[j] {
                        if v > 0.0 {
                            pts.push(((times[j] - times[hi]).max(1e-300), v));
                        }
                    }
                }
                if pts.len() >= TAIL_WINDOW {
                    break;
                }
            }
            if let Some(e) = loglog_slope(&pts) {
                tail_exponents.push(e);
            }
        }
    }
    let tail_exponent = tail_exponents
        .iter()
        .fold(0.0f64, |m, &e| m.min(e));

    let verdict = if capped_fraction > CAPPED_DIVERGING_MIN || tail_exponent <= EXPONENT_DIVERGING_MAX
    {
        CertVerdict::Diverging
    } else if capped_fraction <= CAPPED_INTEGRABLE_MAX
        && tail_exponent > EXPONENT_INTEGRABLE_MIN
        && cap_sensitivity < CAP_SENSITIVITY_MAX
    {
        CertVerdict::Integrable
    } else {
        CertVerdict::Inconclusive
    };

    singular_times.truncate(8);
    Certificate {
        criterion,
        verdict,
        integral_value: integral,
        tail_exponent,
        capped_fraction,
        gronwall_bound: Some(integral.min(700.0).exp()),
        diagnostics: Diagnostics {
            cap: VALUE_CAP,
            arg_delta: ARG_DELTA,
            capped_points,
            grid_points: n,
            cap_sensitivity,
            singular_times,
            tail_exponents,
        },
    }
}

/// Trapezoid rule with singular points handled one-sidedly: a cell with one
/// capped endpoint takes the finite endpoint's value (an isolated grid hit of
/// the zero set must not inject cap-sized mass), a cell with both endpoints
/// capped contributes the capped value and so responds to cap doubling.
fn trapezoid_capped(times: &[f64], values: &[ExtReal], capped: &[bool], cap: f64) -> f64 {
    let mut acc = 0.0;
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        let v0 = values[i - 1].capped(cap);
        let v1 = values[i].capped(cap);
        let cell = match (capped[i - 1], capped[i]) {
            (false, false) => 0.5 * (v0 + v1),
            (true, false) => v1,
            (false, true) => v0,
            (true, true) => 0.5 * (v0 + v1),
        };
        acc += cell * dt;
    }
    acc
}

/// Least-squares slope of ln(v) against ln(d); None with fewer than 8 points.
fn loglog_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 8 {
        return None;
    }
    let n = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(d, v) in pts {
        let x = d.ln();
        let y = v.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

// ---------------------------------------------------------------------------
// certificates

/// The L1 certificate for a(t) along the minimal solution.
pub fn certify_iyanaga(
    b: &DriftSpec,
    path: &NoisePath,
    y_min: &SolutionPath,
) -> Result<Certificate, CertifyError> {
    let curve = a_curve(b, path, y_min)?;
    Ok(score(
        Criterion::IyanagaL1,
        &curve.times,
        &curve.values,
        &curve.args,
    ))
}

/// The non-negative-noise certificate: integrability of
/// t -> b'((omega_t + int_0^t b(omega_s) ds)+). Needs no solved path.
pub fn certify_nonneg_noise(b: &DriftSpec, path: &NoisePath) -> Result<Certificate, CertifyError> {
    require_nonneg(path)?;
    let times = path.times().to_vec();
    let omega = path.values().to_vec();
    let n = times.len();
    let mut inner = vec![0.0f64; n];
    for i in 1..n {
        inner[i] = inner[i - 1]
            + 0.5 * (b.eval(omega[i - 1]) + b.eval(omega[i])) * (times[i] - times[i - 1]);
    }
    let mut values = Vec::with_capacity(n);
    let mut args = Vec::with_capacity(n);
    for i in 0..n {
        let arg = (omega[i] + inner[i]).max(0.0);
        values.push(b.right_derivative(arg)?);
        args.push(arg);
    }
    Ok(score(Criterion::NonNegNoiseL1, &times, &values, &args))
}

/// The comparison-function certificate for the square-root drift:
/// integrability of (omega_t + int_0^t omega_s^(1/2) ds)^(-1/2).
pub fn certify_lakshmikantham(path: &NoisePath) -> Result<Certificate, CertifyError> {
    require_nonneg(path)?;
    let times = path.times().to_vec();
    let omega = path.values().to_vec();
    let n = times.len();
    let mut inner = vec![0.0f64; n];
    for i in 1..n {
        inner[i] = inner[i - 1]
            + 0.5 * (omega[i - 1].sqrt() + omega[i].sqrt()) * (times[i] - times[i - 1]);
    }
    let mut values = Vec::with_capacity(n);
    let mut args = Vec::with_capacity(n);
    for i in 0..n {
        let arg = omega[i] + inner[i];
        let v = if arg <= 0.0 {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(1.0 / arg.sqrt())
        };
        values.push(v);
        args.push(arg);
    }
    Ok(score(Criterion::Lakshmikantham, &times, &values, &args))
}

fn require_nonneg(path: &NoisePath) -> Result<(), CertifyError> {
    for (t, v) in path.times().iter().zip(path.values()) {
        if *v < 0.0 {
            return Err(CertifyError::NegativeNoise { at: *t });
        }
    }
    Ok(())
}

/// Which side the transform-monotonicity test applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeanoSide {
    /// x -> g'(-x) b(x) non-increasing on (-eta, 0): noises with negative
    /// derivative.
    H8,
    /// x -> h'(x) b(x) non-increasing on (0, eta): noises positive near 0.
    H9,
}

/// Default transform for the power family: x^(1-alpha)/(1-alpha).
pub fn default_transform_for(b: &DriftSpec, eta: f64) -> Option<Transform> {
    match b.kind() {
        DriftKind::PowerLaw { alpha } | DriftKind::ScaledPower { alpha, .. } => {
            Some(Transform::power_default(*alpha, eta))
        }
        _ => None,
    }
}

/// Uniform grid on (0, eta), endpoints excluded.
pub fn peano_grid(eta: f64, points: usize) -> Vec<f64> {
    (1..=points)
        .map(|i| eta * i as f64 / (points + 1) as f64)
        .collect()
}

/// The transform-monotonicity certificate of the Peano-style uniqueness
/// arguments. Grid points are magnitudes in (0, eta); the H8 side evaluates
/// the drift at their negatives.
pub fn certify_peano(
    b: &DriftSpec,
    transform: &Transform,
    side: PeanoSide,
    grid: &[f64],
) -> Result<Certificate, CertifyError> {
    let eta = transform.eta;
    let pts: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&x| x > 0.0 && x < eta)
        .collect();
    if pts.len() < 2 {
        return Err(CertifyError::BadTransform {
            reason: "grid has fewer than 2 points inside (0, eta)".into(),
            at: eta,
        });
    }
    // transform validity: increasing, C^1 with positive non-increasing
    // derivative on (0, eta)
    for w in pts.windows(2) {
        if transform.eval(w[1]) <= transform.eval(w[0]) {
            return Err(CertifyError::BadTransform {
                reason: "transform is not increasing".into(),
                at: w[0],
            });
        }
        let (d0, d1) = (transform.deriv(w[0]), transform.deriv(w[1]));
        if d0 <= 0.0 {
            return Err(CertifyError::BadTransform {
                reason: "transform derivative is not positive".into(),
                at: w[0],
            });
        }
        if d1 > d0 * (1.0 + 1e-12) + 1e-12 {
            return Err(CertifyError::BadTransform {
                reason: "transform derivative is not non-increasing".into(),
                at: w[0],
            });
        }
    }
    let composite: Vec<(f64, f64)> = match side {
        PeanoSide::H9 => pts
            .iter()
            .map(|&x| (x, transform.deriv(x) * b.eval(x)))
            .collect(),
        PeanoSide::H8 => pts
            .iter()
            .map(|&x| (-x, transform.deriv(x) * b.eval(-x)))
            .collect(),
    };
    // H8 runs over (-eta, 0) in increasing x order: magnitudes descending
    let ordered: Vec<(f64, f64)> = match side {
        PeanoSide::H9 => composite,
        PeanoSide::H8 => composite.into_iter().rev().collect(),
    };
    let mut verdict = CertVerdict::Integrable;
    for w in ordered.windows(2) {
        let slack = 1e-12 * (1.0 + w[0].1.abs());
        if w[1].1 > w[0].1 + slack {
            verdict = CertVerdict::Diverging;
            break;
        }
    }
    let criterion = match side {
        PeanoSide::H8 => Criterion::PeanoH8,
        PeanoSide::H9 => Criterion::PeanoH9,
    };
    Ok(Certificate {
        criterion,
        verdict,
        integral_value: 0.0,
        tail_exponent: 0.0,
        capped_fraction: 0.0,
        gronwall_bound: None,
        diagnostics: Diagnostics {
            cap: 0.0,
            arg_delta: 0.0,
            capped_points: 0,
            grid_points: ordered.len(),
            cap_sensitivity: 0.0,
            singular_times: Vec::new(),
            tail_exponents: Vec::new(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{PathGrid, Provenance};
    use crate::solver::{minimal_solution, SolveSettings};

    fn sqrt_drift() -> DriftSpec {
        DriftSpec::power_law(0.5).unwrap()
    }

    #[test]
    fn eval_a_zero_noise_is_infinite() {
        let b = sqrt_drift();
        let grid = PathGrid::uniform(256).unwrap();
        let path = NoisePath::zero(&grid, 1.0);
        let y_min = minimal_solution(&b, &path, &SolveSettings::with_grid(256)).unwrap();
        for &t in &[0.1, 0.5, 0.9] {
            assert!(eval_a(&b, &path, &y_min, t).unwrap().is_infinite());
        }
    }

    #[test]
    fn eval_a_linear_is_constant_one() {
        let b = DriftSpec::linear(1.0);
        // the t = 0 point is always capped (argument 0), so the capped
        // fraction threshold needs a production-sized grid
        let grid = PathGrid::uniform(1 << 12).unwrap();
        let path = NoisePath::sample_brownian(5, &grid, 1.0);
        let y_min = minimal_solution(&b, &path, &SolveSettings::with_grid(1 << 12)).unwrap();
        let curve = a_curve(&b, &path, &y_min).unwrap();
        for v in &curve.values {
            assert_eq!(*v, ExtReal::Finite(1.0));
        }
        let cert = certify_iyanaga(&b, &path, &y_min).unwrap();
        assert!(cert.is_integrable());
        assert!((cert.integral_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eval_a_nonneg_noise_uses_first_branch() {
        let b = sqrt_drift();
        let grid = PathGrid::uniform(512).unwrap();
        let path = NoisePath::sample_brownian(7, &grid, 1.0).transform_abs();
        let y_min = minimal_solution(&b, &path, &SolveSettings::with_grid(512)).unwrap();
        let curve = a_curve(&b, &path, &y_min).unwrap();
        // omega >= 0 everywhere, so the argument never involves y
        let mut inner = 0.0;
        for i in 1..curve.times.len() {
            let dt = curve.times[i] - curve.times[i - 1];
            let w0 = path.eval_unchecked(curve.times[i - 1]);
            let w1 = path.eval_unchecked(curve.times[i]);
            inner += 0.5
                * ((if w0 > 0.0 { b.eval(w0) } else { 0.0 })
                    + (if w1 > 0.0 { b.eval(w1) } else { 0.0 }))
                * dt;
            let expect = (w1 + inner).max(0.0);
            assert!((curve.args[i] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn iyanaga_verdicts() {
        let b = sqrt_drift();
        let settings = SolveSettings::with_grid(1 << 12);
        let grid = PathGrid::uniform(1 << 12).unwrap();

        let zero = NoisePath::zero(&grid, 1.0);
        let y0 = minimal_solution(&b, &zero, &settings).unwrap();
        let diverging = certify_iyanaga(&b, &zero, &y0).unwrap();
        assert_eq!(diverging.verdict, CertVerdict::Diverging);
        assert!(diverging.capped_fraction > 0.99);

        let path = NoisePath::sample_brownian(42, &grid, 1.0);
        let y = minimal_solution(&b, &path, &settings).unwrap();
        let cert = certify_iyanaga(&b, &path, &y).unwrap();
        assert_eq!(cert.verdict, CertVerdict::Integrable, "{cert:?}");
        assert!(cert.capped_fraction <= CAPPED_INTEGRABLE_MAX);
    }

    #[test]
    fn iyanaga_requires_h3() {
        let b = DriftSpec::scaled_power(0.5, 1.0, "1", |_| 1.0, None).unwrap();
        let grid = PathGrid::uniform(64).unwrap();
        let path = NoisePath::zero(&grid, 1.0);
        let y = minimal_solution(&DriftSpec::linear(0.0), &path, &SolveSettings::with_grid(64))
            .unwrap();
        assert!(matches!(
            certify_iyanaga(&b, &path, &y),
            Err(CertifyError::HypothesisViolation(_))
        ));
    }

    #[test]
    fn nonneg_noise_certificates() {
        let b = sqrt_drift();
        let grid = PathGrid::uniform(1 << 12).unwrap();

        let abs = NoisePath::sample_brownian(7, &grid, 1.0).transform_abs();
        let cert = certify_nonneg_noise(&b, &abs).unwrap();
        assert_eq!(cert.verdict, CertVerdict::Integrable, "{cert:?}");

        let zero = NoisePath::zero(&grid, 1.0);
        let cert0 = certify_nonneg_noise(&b, &zero).unwrap();
        assert_eq!(cert0.verdict, CertVerdict::Diverging);

        let neg = NoisePath::sample_brownian(7, &grid, 1.0).transform_neg_abs();
        assert!(matches!(
            certify_nonneg_noise(&b, &neg),
            Err(CertifyError::NegativeNoise { .. })
        ));

        // bounded derivative: integral <= T * sup b'
        let lin = DriftSpec::linear(2.0);
        let cert_lin = certify_nonneg_noise(&lin, &abs).unwrap();
        assert!(cert_lin.is_integrable());
        assert!(cert_lin.integral_value <= 2.0 * 1.0 + 1e-12);
    }

    #[test]
    fn lakshmikantham_linear_ramp_matches_quadrature_oracle() {
        // omega_t = t: integrand (t + (2/3) t^(3/2))^(-1/2); with t = u^2 the
        // oracle is 2 int_0^1 (1 + 2u/3)^(-1/2) du, computed by quadrature
        let oracle = crate::quad::integrate(
            |u: f64| 2.0 / (1.0 + 2.0 * u / 3.0).sqrt(),
            0.0,
            1.0,
            64,
        );
        assert!((oracle - 1.7459666924).abs() < 1e-9);

        let n = 1 << 14;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let values = times.clone();
        let path = NoisePath::from_samples(
            times,
            values,
            Provenance::External { file: "ramp".into() },
        )
        .unwrap();
        let cert = certify_lakshmikantham(&path).unwrap();
        assert!(cert.is_integrable(), "{cert:?}");
        // trapezoid near the t^(-1/2) head loses a little mass
        assert!(
            (cert.integral_value - oracle).abs() < 0.05,
            "integral {} vs oracle {}",
            cert.integral_value,
            oracle
        );

        let zero = NoisePath::zero(&PathGrid::uniform(256).unwrap(), 1.0);
        let cert0 = certify_lakshmikantham(&zero).unwrap();
        assert_eq!(cert0.verdict, CertVerdict::Diverging);
    }

    #[test]
    fn lakshmikantham_and_nonneg_agree_on_abs_brownian() {
        let b = sqrt_drift();
        let grid = PathGrid::uniform(1 << 12).unwrap();
        let mut agree = 0;
        for i in 0..10u64 {
            let path =
                NoisePath::sample_brownian(crate::rng::mix(1234, i), &grid, 1.0).transform_abs();
            let lk = certify_lakshmikantham(&path).unwrap();
            let nn = certify_nonneg_noise(&b, &path).unwrap();
            if lk.verdict == nn.verdict {
                agree += 1;
            }
            assert!(lk.is_integrable(), "seed {i}: {lk:?}");
        }
        assert!(agree >= 9, "agreement {agree}/10");
    }

    #[test]
    fn gronwall_bound_arithmetic() {
        assert_eq!(gronwall_gap_bound(1.0, 0.0), 0.0);
        assert_eq!(gronwall_gap_bound(0.0, 0.3), 0.3);
        assert!((gronwall_gap_bound(2.0f64.ln(), 0.1) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn peano_h9_power_law_holds() {
        let grid = peano_grid(1.0, 1000);
        for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let b = DriftSpec::power_law(alpha).unwrap();
            let t = default_transform_for(&b, 1.0).unwrap();
            let cert = certify_peano(&b, &t, PeanoSide::H9, &grid).unwrap();
            assert!(cert.holds(), "alpha {alpha}");
            // composite is the constant 1
            assert!((t.deriv(0.5) * b.eval(0.5) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn peano_h9_linear_fails_with_identity() {
        let b = DriftSpec::linear(1.0);
        let t = Transform::identity(1.0);
        let cert = certify_peano(&b, &t, PeanoSide::H9, &peano_grid(1.0, 500)).unwrap();
        assert_eq!(cert.verdict, CertVerdict::Diverging);
    }

    #[test]
    fn peano_h8_signed_sqrt_variant_holds() {
        // b(x) = sqrt(x) for x >= 0, sqrt(-x) - 1 for x < 0, written as a
        // scaled power with r(x) = 1 - 1/sqrt(-x) on the negative side
        let b = DriftSpec::scaled_power(
            0.5,
            1.5,
            "signed-sqrt",
            |x| if x >= 0.0 { 1.0 } else { 1.0 - 1.0 / (-x).sqrt() },
            None,
        )
        .unwrap();
        assert!((b.eval(-4.0) - 1.0).abs() < 1e-12); // sqrt(4) - 1
        let t = Transform::power_default(0.5, 1.0);
        let cert = certify_peano(&b, &t, PeanoSide::H8, &peano_grid(1.0, 1000)).unwrap();
        assert!(cert.holds(), "{cert:?}");
    }

    #[test]
    fn peano_rejects_bad_transforms() {
        let b = sqrt_drift();
        let decreasing = Transform::new("-x", |x| -x, |_| -1.0, 1.0);
        assert!(matches!(
            certify_peano(&b, &decreasing, PeanoSide::H9, &peano_grid(1.0, 100)),
            Err(CertifyError::BadTransform { .. })
        ));
        // derivative increasing: h = x^2
        let convex = Transform::new("x^2", |x| x * x, |x| 2.0 * x, 1.0);
        assert!(matches!(
            certify_peano(&b, &convex, PeanoSide::H9, &peano_grid(1.0, 100)),
            Err(CertifyError::BadTransform { .. })
        ));
    }

    #[test]
    fn cap_sensitivity_reported() {
        let b = sqrt_drift();
        let grid = PathGrid::uniform(1 << 12).unwrap();
        let path = NoisePath::sample_brownian(42, &grid, 1.0);
        let y = minimal_solution(&b, &path, &SolveSettings::with_grid(1 << 12)).unwrap();
        let cert = certify_iyanaga(&b, &path, &y).unwrap();
        assert!(cert.diagnostics.cap_sensitivity < CAP_SENSITIVITY_MAX);
    }
}
