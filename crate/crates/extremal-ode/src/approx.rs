//! Clamped polynomial approximants of the shifted drifts, with certified
//! sup-error.
//!
//! A stage approximant is built per shift: the drift shifted down (or up) by
//! 1/n, fitted by least squares on Chebyshev nodes, and extended by constants
//! outside [-n, n]. The core is a piecewise-Chebyshev approximant on a mesh
//! that adaptively bisects toward the sqrt-type singularities: a single global
//! polynomial fit cannot reach the certified error 1/(2n(n+1)) at any usable
//! degree for these drifts (the best-approximation error of sqrt|x| decays
//! like degree^(-1/2)).

use serde::{Deserialize, Serialize};

use crate::drift::{DriftKind, DriftSpec};

#[derive(Debug, thiserror::Error)]
pub enum ApproxError {
    #[error("mode {mode:?} incompatible with base {base}")]
    BadMode { mode: ShiftMode, base: String },
    #[error("degree exhausted: best sup error {best:e} above target {target:e}")]
    DegreeExhausted { best: f64, target: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// How a drift is shifted before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftMode {
    /// b - shift: the minorant family for the minimal-solution scheme.
    MinusShift,
    /// b + shift: the majorant family for the maximal-solution scheme.
    PlusShift,
    /// The continuous minorant of the discontinuous sqrt drift: sqrt(x) - s
    /// for x > 0, sqrt(-x) + 1 - s for x < -s, a bridge segment of slope
    /// -(1 + sqrt(s))/s on [-s, 0].
    SmoothedDiscontinuous,
    /// The mirrored continuous majorant of the discontinuous sqrt drift:
    /// sqrt(-x) + 1 + s for x < 0, max(1 + s - ((1+sqrt(s))/s) x, sqrt(x) + s)
    /// for x >= 0.
    SmoothedDiscontinuousUpper,
}

/// A target function the fitter can approximate.
pub trait Curve {
    fn eval(&self, x: f64) -> f64;
    /// Points where the curve is merely continuous; the mesh splits there.
    fn split_points(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// A drift shifted by a positive amount, evaluable on all of R.
#[derive(Debug, Clone)]
pub struct ShiftedDrift {
    base: DriftSpec,
    n: u32,
    shift: f64,
    mode: ShiftMode,
}

/// Builds the stage-n shifted drift with the family shift 1/n.
pub fn build_shifted(base: &DriftSpec, n: u32, mode: ShiftMode) -> Result<ShiftedDrift, ApproxError> {
    if n == 0 {
        return Err(ApproxError::InvalidParameter("n must be >= 1".into()));
    }
    ShiftedDrift::with_shift(base, n, 1.0 / n as f64, mode)
}

impl ShiftedDrift {
    /// Shifted drift with an explicit shift amount; the staged solver uses
    /// geometrically decaying shifts, the paper family uses 1/n.
    pub fn with_shift(
        base: &DriftSpec,
        n: u32,
        shift: f64,
        mode: ShiftMode,
    ) -> Result<Self, ApproxError> {
        if shift.is_nan() || shift <= 0.0 {
            return Err(ApproxError::InvalidParameter(format!(
                "shift must be positive, got {shift}"
            )));
        }
        let discontinuous = matches!(base.kind(), DriftKind::DiscontinuousSqrt);
        let smoothed = matches!(
            mode,
            ShiftMode::SmoothedDiscontinuous | ShiftMode::SmoothedDiscontinuousUpper
        );
        if smoothed != discontinuous {
            return Err(ApproxError::BadMode {
                mode,
                base: format!("{:?}", base.kind()),
            });
        }
        Ok(ShiftedDrift {
            base: base.clone(),
            n,
            shift,
            mode,
        })
    }

    pub fn base(&self) -> &DriftSpec {
        &self.base
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn mode(&self) -> ShiftMode {
        self.mode
    }

    /// Slope of the bridge segment, (1 + sqrt(s))/s; equals n + sqrt(n) for
    /// the paper family s = 1/n.
    pub fn bridge_slope(&self) -> f64 {
        (1.0 + self.shift.sqrt()) / self.shift
    }

    /// Where the upper majorant's bridge line meets sqrt(x) + s: the root of
    /// slope * x + sqrt(x) - 1 = 0.
    fn upper_bridge_end(&self) -> f64 {
        let m = self.bridge_slope();
        let s = ((1.0 + 4.0 * m).sqrt() - 1.0) / (2.0 * m);
        s * s
    }
}

impl Curve for ShiftedDrift {
    fn eval(&self, x: f64) -> f64 {
        let s = self.shift;
        match self.mode {
            ShiftMode::MinusShift => self.base.eval(x) - s,
            ShiftMode::PlusShift => self.base.eval(x) + s,
            ShiftMode::SmoothedDiscontinuous => {
                if x > 0.0 {
                    x.sqrt() - s
                } else if x < -s {
                    (-x).sqrt() + 1.0 - s
                } else {
                    -self.bridge_slope() * x - s
                }
            }
            ShiftMode::SmoothedDiscontinuousUpper => {
                if x < 0.0 {
                    (-x).sqrt() + 1.0 + s
                } else {
                    let line = 1.0 + s - self.bridge_slope() * x;
                    let tail = x.sqrt() + s;
                    line.max(tail)
                }
            }
        }
    }

    fn split_points(&self) -> Vec<f64> {
        let mut pts = self.base.kinks();
        match self.mode {
            ShiftMode::SmoothedDiscontinuous => pts.push(-self.shift),
            ShiftMode::SmoothedDiscontinuousUpper => pts.push(self.upper_bridge_end()),
            _ => {}
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }
}

/// One Chebyshev-basis polynomial piece on [lo, hi], with the derivative
/// series precomputed for the solver's local step-size rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChebPiece {
    lo: f64,
    hi: f64,
    coeffs: Vec<f64>,
    dcoeffs: Vec<f64>,
}

fn clenshaw(coeffs: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let tmp = b1;
        b1 = 2.0 * t * b1 - b2 + c;
        b2 = tmp;
    }
    t * b1 - b2 + coeffs[0]
}

impl ChebPiece {
    fn new(lo: f64, hi: f64, coeffs: Vec<f64>) -> Self {
        let n = coeffs.len();
        let dcoeffs = if n <= 1 {
            vec![0.0]
        } else {
            let mut d = vec![0.0; n];
            // recurrence d_{k-1} = d_{k+1} + 2k c_k, downward
            for k in (1..n).rev() {
                let upper = if k + 1 < n { d[k + 1] } else { 0.0 };
                d[k - 1] = upper + 2.0 * k as f64 * coeffs[k];
            }
            d[0] *= 0.5;
            d.truncate(n - 1);
            let scale = 2.0 / (hi - lo);
            for v in &mut d {
                *v *= scale;
            }
            d
        };
        ChebPiece {
            lo,
            hi,
            coeffs,
            dcoeffs,
        }
    }

    fn scaled(&self, x: f64) -> f64 {
        (2.0 * x - self.lo - self.hi) / (self.hi - self.lo)
    }

    fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, self.scaled(x))
    }

    fn deriv(&self, x: f64) -> f64 {
        clenshaw(&self.dcoeffs, self.scaled(x))
    }

    /// Fit nodes used for this piece (Chebyshev points of the first kind).
    fn nodes(&self) -> Vec<f64> {
        let m = 2 * self.coeffs.len();
        let mid = 0.5 * (self.lo + self.hi);
        let half = 0.5 * (self.hi - self.lo);
        (0..m)
            .map(|k| mid + half * (std::f64::consts::PI * (k as f64 + 0.5) / m as f64).cos())
            .collect()
    }
}

/// Least-squares Chebyshev fit of `f` on [lo, hi] at degree `d`, sampled at
/// 2(d+1) Chebyshev nodes (discrete orthogonality makes the truncated
/// transform the least-squares solution on the node set).
fn fit_piece<C: Curve + ?Sized>(f: &C, lo: f64, hi: f64, d: usize) -> ChebPiece {
    let m = 2 * (d + 1);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut samples = Vec::with_capacity(m);
    for k in 0..m {
        let theta = std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
        samples.push(f.eval(mid + half * theta.cos()));
    }
    let mut coeffs = vec![0.0; d + 1];
    for (j, c) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, fv) in samples.iter().enumerate() {
            acc += fv * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / m as f64).cos();
        }
        *c = 2.0 * acc / m as f64;
    }
    coeffs[0] *= 0.5;
    ChebPiece::new(lo, hi, coeffs)
}

fn piece_error<C: Curve + ?Sized>(f: &C, piece: &ChebPiece) -> f64 {
    // probe at off-node Chebyshev points, uniform points and the endpoints
    let mut worst = 0.0f64;
    let m = 4 * piece.coeffs.len() + 3;
    let mid = 0.5 * (piece.lo + piece.hi);
    let half = 0.5 * (piece.hi - piece.lo);
    for k in 0..m {
        let theta = std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
        let x = mid + half * theta.cos();
        worst = worst.max((piece.eval(x) - f.eval(x)).abs());
    }
    for k in 0..=16 {
        let x = piece.lo + (piece.hi - piece.lo) * k as f64 / 16.0;
        worst = worst.max((piece.eval(x) - f.eval(x)).abs());
    }
    worst
}

/// The clamped piecewise-Chebyshev approximant p_n: polynomial core on
/// [-range, range], constant clamp values outside.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiecewisePoly {
    n: u32,
    range: f64,
    pieces: Vec<ChebPiece>,
    clamp_lo: f64,
    clamp_hi: f64,
    certified_sup_error: f64,
    epsilon_n: f64,
    target_eps: f64,
    lipschitz: f64,
    degree: u32,
}

impl PiecewisePoly {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Half-width of the core range [-range, range].
    pub fn range(&self) -> f64 {
        self.range
    }

    /// Measured sup-error against the target on the verification grid.
    pub fn certified_sup_error(&self) -> f64 {
        self.certified_sup_error
    }

    /// The paper family tolerance 1/(2 n (n+1)).
    pub fn epsilon_n(&self) -> f64 {
        self.epsilon_n
    }

    pub fn target_eps(&self) -> f64 {
        self.target_eps
    }

    /// Max |p'| over the core; clamping contributes zero slope, so this is
    /// the global Lipschitz constant. Feeds the solver's step-size rule.
    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }

    /// Largest piece degree used.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn clamp_values(&self) -> (f64, f64) {
        (self.clamp_lo, self.clamp_hi)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= -self.range {
            return self.clamp_lo;
        }
        if x >= self.range {
            return self.clamp_hi;
        }
        let i = self
            .pieces
            .partition_point(|p| p.hi < x)
            .min(self.pieces.len() - 1);
        self.pieces[i].eval(x)
    }

    /// Evaluates p'(x); zero outside the core range (clamping).
    pub fn deriv_eval(&self, x: f64) -> f64 {
        if x <= -self.range || x >= self.range {
            return 0.0;
        }
        let i = self
            .pieces
            .partition_point(|p| p.hi < x)
            .min(self.pieces.len() - 1);
        self.pieces[i].deriv(x)
    }

    /// Degree-1 exact construction used by tests and oracles: p(x) = a + b x
    /// on [-range, range], clamped outside.
    pub fn linear_exact(n: u32, range: f64, intercept: f64, slope: f64) -> Self {
        let piece = ChebPiece::new(-range, range, vec![intercept, slope * range]);
        let (clamp_lo, clamp_hi) = (piece.eval(-range), piece.eval(range));
        PiecewisePoly {
            n,
            range,
            pieces: vec![piece],
            clamp_lo,
            clamp_hi,
            certified_sup_error: 0.0,
            epsilon_n: epsilon_for(n),
            target_eps: 0.0,
            lipschitz: slope.abs(),
            degree: 1,
        }
    }

    /// Additively perturbs all pieces (fault injection for monotone-family
    /// violation tests).
    pub fn perturb_for_test(&mut self, delta: f64) {
        for p in &mut self.pieces {
            p.coeffs[0] += delta;
        }
        self.clamp_lo += delta;
        self.clamp_hi += delta;
    }

    /// The approximant shifted by a constant: p(x) - c, relabeled as stage n.
    ///
    /// Constant shifts commute exactly with the Chebyshev fit, so the staged
    /// solver derives its whole stage family from one master fit; members then
    /// differ by exact constants and their ordering cannot be eaten by fit
    /// error.
    pub fn offset_down(&self, c: f64, n: u32, target_eps: f64) -> PiecewisePoly {
        let mut out = self.clone();
        for p in &mut out.pieces {
            p.coeffs[0] -= c;
        }
        out.clamp_lo -= c;
        out.clamp_hi -= c;
        out.n = n;
        out.epsilon_n = epsilon_for(n);
        out.target_eps = target_eps;
        out
    }
}

/// The paper family tolerance eps_n = 1/(2 n (n+1)).
pub fn epsilon_for(n: u32) -> f64 {
    1.0 / (2.0 * n as f64 * (n as f64 + 1.0))
}

/// The lowered stage starts of the discontinuous route, eps~_m = 1/m
/// (any sequence decreasing to 0 works; 1/m matches the family shift).
pub fn epsilon_tilde(m: u32) -> f64 {
    1.0 / m as f64
}

const PIECE_DEGREES: [usize; 4] = [8, 16, 32, 64];
const MAX_DEPTH: u32 = 52;

/// Approximates a stage drift to `target_eps` on [-n, n] and certifies the
/// sup-error on the spec's verification grid (uniform points, all fit nodes,
/// all mesh breakpoints).
pub fn approximate(
    shifted: &ShiftedDrift,
    target_eps: f64,
    verify_grid_size: usize,
) -> Result<PiecewisePoly, ApproxError> {
    approximate_curve(
        shifted,
        shifted.n() as f64,
        shifted.n(),
        target_eps,
        verify_grid_size,
    )
}

/// As [`approximate`] with an explicit core range; the staged solver widens
/// the range past the a-priori solution bound so clamping stays inactive.
pub fn approximate_on_range(
    shifted: &ShiftedDrift,
    range: f64,
    target_eps: f64,
    verify_grid_size: usize,
) -> Result<PiecewisePoly, ApproxError> {
    approximate_curve(shifted, range, shifted.n(), target_eps, verify_grid_size)
}

pub fn approximate_curve<C: Curve + ?Sized>(
    curve: &C,
    range: f64,
    n: u32,
    target_eps: f64,
    verify_grid_size: usize,
) -> Result<PiecewisePoly, ApproxError> {
    if range.is_nan() || range <= 0.0 || target_eps.is_nan() || target_eps <= 0.0 {
        return Err(ApproxError::InvalidParameter(
            "range and target_eps must be positive".into(),
        ));
    }
    // breakpoints: range ends plus interior split points
    let mut breaks = vec![-range];
    for p in curve.split_points() {
        if p > -range && p < range {
            breaks.push(p);
        }
    }
    breaks.push(range);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();

    let tol = 0.45 * target_eps;
    let mut pieces = Vec::new();
    let mut best_err = 0.0f64;
    for w in breaks.windows(2) {
        build_segment(curve, w[0], w[1], tol, 0, &mut pieces, &mut best_err)?;
    }
    pieces.sort_by(|a, b| a.lo.partial_cmp(&b.lo).unwrap());

    // verification grid: uniform points + all fit nodes + breakpoints
    let mut worst = 0.0f64;
    let m = verify_grid_size.max(2);
    let probe = |x: f64, pieces: &[ChebPiece]| -> f64 {
        let i = pieces.partition_point(|p| p.hi < x).min(pieces.len() - 1);
        (pieces[i].eval(x) - curve.eval(x)).abs()
    };
    for k in 0..m {
        let x = -range + 2.0 * range * k as f64 / (m - 1) as f64;
        worst = worst.max(probe(x, &pieces));
    }
    for p in &pieces {
        for x in p.nodes() {
            worst = worst.max(probe(x, &pieces));
        }
        worst = worst.max(probe(p.lo, &pieces));
        worst = worst.max(probe(p.hi, &pieces));
    }
    if worst >= target_eps {
        return Err(ApproxError::DegreeExhausted {
            best: worst,
            target: target_eps,
        });
    }

    let mut lipschitz = 0.0f64;
    let mut degree = 0u32;
    for p in &pieces {
        degree = degree.max((p.coeffs.len() - 1) as u32);
        let probes = 8 * p.coeffs.len() + 1;
        for k in 0..=probes {
            let x = p.lo + (p.hi - p.lo) * k as f64 / probes as f64;
            lipschitz = lipschitz.max(p.deriv(x).abs());
        }
    }

    let clamp_lo = pieces.first().unwrap().eval(-range);
    let clamp_hi = pieces.last().unwrap().eval(range);
    Ok(PiecewisePoly {
        n,
        range,
        pieces,
        clamp_lo,
        clamp_hi,
        certified_sup_error: worst,
        epsilon_n: epsilon_for(n),
        target_eps,
        lipschitz,
        degree,
    })
}

fn build_segment<C: Curve + ?Sized>(
    curve: &C,
    lo: f64,
    hi: f64,
    tol: f64,
    depth: u32,
    out: &mut Vec<ChebPiece>,
    best_err: &mut f64,
) -> Result<(), ApproxError> {
    let mut last_err = f64::INFINITY;
    for &d in &PIECE_DEGREES {
        let piece = fit_piece(curve, lo, hi, d);
        let err = piece_error(curve, &piece);
        if err < tol {
            out.push(piece);
            return Ok(());
        }
        last_err = err;
    }
    if depth >= MAX_DEPTH {
        *best_err = best_err.max(last_err);
        return Err(ApproxError::DegreeExhausted {
            best: last_err,
            target: tol / 0.45,
        });
    }
    let mid = 0.5 * (lo + hi);
    build_segment(curve, lo, mid, tol, depth + 1, out, best_err)?;
    build_segment(curve, mid, hi, tol, depth + 1, out, best_err)
}

/// Outcome of the monotone-family verification: p_{n+1} >= p_n pairwise and
/// p_n + eps_n <= b on the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub pairs_checked: usize,
    pub pair_violation: Option<FamilyViolation>,
    pub envelope_violation: Option<FamilyViolation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyViolation {
    pub n: u32,
    pub at: f64,
    pub excess: f64,
}

impl MonotoneReport {
    pub fn passed(&self) -> bool {
        self.pair_violation.is_none() && self.envelope_violation.is_none()
    }
}

/// Verifies the ordering of a built family against its base drift on a grid.
/// A single-element (or empty) family passes vacuously on the pair check.
pub fn check_monotone_family(
    polys: &[PiecewisePoly],
    base: &DriftSpec,
    grid: &[f64],
) -> MonotoneReport {
    let mut report = MonotoneReport {
        pairs_checked: polys.len().saturating_sub(1),
        pair_violation: None,
        envelope_violation: None,
    };
    'pairs: for w in polys.windows(2) {
        for &x in grid {
            let (lo, hi) = (w[0].eval(x), w[1].eval(x));
            if hi < lo {
                report.pair_violation = Some(FamilyViolation {
                    n: w[1].n(),
                    at: x,
                    excess: lo - hi,
                });
                break 'pairs;
            }
        }
    }
    'env: for p in polys {
        let eps = p.epsilon_n();
        for &x in grid {
            let v = p.eval(x) + eps;
            let b = base.eval(x);
            if v > b {
                report.envelope_violation = Some(FamilyViolation {
                    n: p.n(),
                    at: x,
                    excess: v - b,
                });
                break 'env;
            }
        }
    }
    report
}

/// Builds the paper family p_1..p_n_max for a base drift (minorant side).
pub fn build_family(
    base: &DriftSpec,
    mode: ShiftMode,
    n_max: u32,
    verify_grid_size: usize,
) -> Result<Vec<PiecewisePoly>, ApproxError> {
    (1..=n_max)
        .map(|n| {
            let shifted = build_shifted(base, n, mode)?;
            approximate(&shifted, epsilon_for(n), verify_grid_size)
        })
        .collect()
}

/// Single growth constant K with |p(x)| <= K (1 + |x|) for every member on
/// [-probe_range, probe_range].
pub fn family_growth_constant(polys: &[PiecewisePoly], probe_range: f64) -> f64 {
    let mut k = 0.0f64;
    for p in polys {
        for i in 0..=4000 {
            let x = -probe_range + 2.0 * probe_range * i as f64 / 4000.0;
            k = k.max(p.eval(x).abs() / (1.0 + x.abs()));
        }
    }
    k
}

/// Serializable family bundle for the approx-cache CLI command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyFamily {
    pub drift: serde_json::Value,
    pub mode: ShiftMode,
    pub polys: Vec<PiecewisePoly>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt_drift() -> DriftSpec {
        DriftSpec::power_law(0.5).unwrap()
    }

    #[test]
    fn shifted_values() {
        let s = build_shifted(&sqrt_drift(), 2, ShiftMode::MinusShift).unwrap();
        assert!((s.eval(4.0) - 1.5).abs() < 1e-15);

        let sm = build_shifted(&DriftSpec::discontinuous_sqrt(), 4, ShiftMode::SmoothedDiscontinuous)
            .unwrap();
        assert!((sm.eval(0.0) - (-0.25)).abs() < 1e-15);
        // junction: both formulas give 1.25 at x = -1/4
        assert!((sm.eval(-0.25) - 1.25).abs() < 1e-12);
        assert!((sm.bridge_slope() - 6.0).abs() < 1e-12); // n + sqrt(n) at n=4
    }

    #[test]
    fn smoothed_family_is_continuous_at_junctions() {
        for n in [1u32, 3, 7, 20] {
            let sm =
                build_shifted(&DriftSpec::discontinuous_sqrt(), n, ShiftMode::SmoothedDiscontinuous)
                    .unwrap();
            let s = 1.0 / n as f64;
            for &x in &[-s, 0.0] {
                let eps = 1e-9 * (1.0 + s);
                let (l, r) = (sm.eval(x - eps), sm.eval(x + eps));
                assert!((l - r).abs() < 1e-4, "n={n} x={x} l={l} r={r}");
            }
        }
    }

    #[test]
    fn bad_mode_rejected() {
        assert!(matches!(
            build_shifted(&sqrt_drift(), 2, ShiftMode::SmoothedDiscontinuous),
            Err(ApproxError::BadMode { .. })
        ));
        assert!(matches!(
            build_shifted(&DriftSpec::discontinuous_sqrt(), 2, ShiftMode::MinusShift),
            Err(ApproxError::BadMode { .. })
        ));
    }

    #[test]
    fn family_gap_lower_bound() {
        // b_{n+1} - b_n >= 1/(n(n+1)) for both shifted families
        let base = DriftSpec::discontinuous_sqrt();
        let mut rng = crate::rng::SplitMix64::new(3);
        for n in 1u32..8 {
            let a = build_shifted(&base, n, ShiftMode::SmoothedDiscontinuous).unwrap();
            let b = build_shifted(&base, n + 1, ShiftMode::SmoothedDiscontinuous).unwrap();
            let bound = 1.0 / (n as f64 * (n as f64 + 1.0));
            for _ in 0..500 {
                let x = (rng.next_uniform() - 0.5) * 2.0 * (n as f64 + 2.0);
                let gap = b.eval(x) - a.eval(x);
                assert!(gap >= bound - 1e-12, "n={n} x={x} gap={gap} bound={bound}");
            }
        }
    }

    #[test]
    fn upper_family_majorizes_and_decreases() {
        let base = DriftSpec::discontinuous_sqrt();
        let mut rng = crate::rng::SplitMix64::new(4);
        for n in 1u32..8 {
            let hi = build_shifted(&base, n, ShiftMode::SmoothedDiscontinuousUpper).unwrap();
            let lo = build_shifted(&base, n + 1, ShiftMode::SmoothedDiscontinuousUpper).unwrap();
            let bound = 1.0 / (n as f64 * (n as f64 + 1.0));
            for _ in 0..500 {
                let x = (rng.next_uniform() - 0.5) * 2.0 * (n as f64 + 2.0);
                assert!(hi.eval(x) >= base.eval(x), "majorant fails at {x}");
                let gap = hi.eval(x) - lo.eval(x);
                assert!(gap >= bound - 1e-12, "n={n} x={x} gap={gap}");
            }
        }
    }

    #[test]
    fn linear_fit_is_exact() {
        let lin = DriftSpec::linear(1.0);
        let shifted = build_shifted(&lin, 1, ShiftMode::MinusShift).unwrap();
        let p = approximate(&shifted, 0.25, 1000).unwrap();
        assert!(p.certified_sup_error() < 1e-12);
        for &x in &[-1.0, -0.3, 0.0, 0.9] {
            assert!((p.eval(x) - (x - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn sqrt_n1_fit_meets_quarter() {
        let shifted = build_shifted(&sqrt_drift(), 1, ShiftMode::MinusShift).unwrap();
        let p = approximate(&shifted, 0.25, 10_000).unwrap();
        assert!(p.certified_sup_error() < 0.25);
    }

    #[test]
    fn clamp_is_constant_outside_range() {
        let shifted = build_shifted(&sqrt_drift(), 3, ShiftMode::MinusShift).unwrap();
        let p = approximate(&shifted, epsilon_for(3), 10_000).unwrap();
        assert_eq!(p.eval(3.0 + 5.0), p.eval(3.0));
        assert_eq!(p.eval(-8.0), p.eval(-3.0));
        assert_eq!(p.eval(1e9), p.clamp_values().1);
    }

    #[test]
    fn small_family_certifies_and_orders() {
        for base in [sqrt_drift(), DriftSpec::discontinuous_sqrt()] {
            let mode = if matches!(base.kind(), DriftKind::DiscontinuousSqrt) {
                ShiftMode::SmoothedDiscontinuous
            } else {
                ShiftMode::MinusShift
            };
            let family = build_family(&base, mode, 6, 10_000).unwrap();
            for p in &family {
                assert!(
                    p.certified_sup_error() < p.epsilon_n(),
                    "n={} err={} eps={}",
                    p.n(),
                    p.certified_sup_error(),
                    p.epsilon_n()
                );
            }
            let grid: Vec<f64> = (0..=1200).map(|i| -6.0 + 12.0 * i as f64 / 1200.0).collect();
            let report = check_monotone_family(&family, &base, &grid);
            assert!(report.passed(), "{report:?}");
        }
    }

    #[test]
    fn single_element_family_vacuous() {
        let family = build_family(&sqrt_drift(), ShiftMode::MinusShift, 1, 2000).unwrap();
        let grid: Vec<f64> = (0..100).map(|i| -1.0 + 0.02 * i as f64).collect();
        let report = check_monotone_family(&family, &sqrt_drift(), &grid);
        assert_eq!(report.pairs_checked, 0);
        assert!(report.passed());
    }

    #[test]
    fn corrupted_member_reports_violation() {
        let mut family = build_family(&sqrt_drift(), ShiftMode::MinusShift, 4, 2000).unwrap();
        family[2].perturb_for_test(1.0);
        let grid: Vec<f64> = (0..=400).map(|i| -4.0 + 8.0 * i as f64 / 400.0).collect();
        let report = check_monotone_family(&family, &sqrt_drift(), &grid);
        assert!(!report.passed());
        assert!(report.envelope_violation.is_some());
    }

    #[test]
    fn uniform_growth_constant() {
        let family = build_family(&sqrt_drift(), ShiftMode::MinusShift, 8, 4000).unwrap();
        let k = family_growth_constant(&family, 40.0);
        for p in &family {
            for i in 0..=2000 {
                let x = -40.0 + 80.0 * i as f64 / 2000.0;
                assert!(p.eval(x).abs() <= k * (1.0 + x.abs()) + 1e-12);
            }
        }
        // stays comparable to the base growth constant
        assert!(k < 2.0, "K = {k}");
    }

    #[test]
    fn lipschitz_constant_reported() {
        let shifted = build_shifted(&sqrt_drift(), 2, ShiftMode::MinusShift).unwrap();
        let p = approximate(&shifted, epsilon_for(2), 10_000).unwrap();
        let lip = p.lipschitz_constant();
        assert!(lip.is_finite() && lip > 0.0);
        // finite-difference spot check
        let mut worst = 0.0f64;
        for i in 0..4000 {
            let x = -2.0 + 4.0 * i as f64 / 4000.0;
            let h = 1e-7;
            worst = worst.max(((p.eval(x + h) - p.eval(x)) / h).abs());
        }
        assert!(worst <= lip * 1.2 + 1.0, "probe {worst} vs reported {lip}");
    }

    #[test]
    fn json_round_trip() {
        let shifted = build_shifted(&sqrt_drift(), 2, ShiftMode::MinusShift).unwrap();
        let p = approximate(&shifted, epsilon_for(2), 4000).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: PiecewisePoly = serde_json::from_str(&text).unwrap();
        for i in 0..200 {
            let x = -3.0 + 6.0 * i as f64 / 200.0;
            assert_eq!(p.eval(x), back.eval(x));
        }
    }
}
