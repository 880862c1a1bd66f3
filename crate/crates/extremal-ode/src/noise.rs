//! Noise paths omega on [0, T]: sampled Brownian motion, |W|, -|W|, the
//! oscillatory differentiable noise alpha*t + t^(2+beta) sin(1/t), the zero
//! path, and externally supplied CSV paths.
//!
//! Paths are immutable after construction. Brownian sampling is a
//! deterministic function of (seed, grid): generation of distinct paths is
//! embarrassingly parallel with seeds derived through [`crate::rng::mix`].

use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::rng::GaussianSource;

#[derive(Debug, thiserror::Error)]
pub enum NoiseError {
    #[error("t = {t} outside [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid noise csv: {0}")]
    InvalidCsv(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Time grid: N steps (N+1 points) on [0, T].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathGrid {
    n_steps: usize,
    policy: StepPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StepPolicy {
    Uniform,
    Explicit(Vec<f64>),
}

impl PathGrid {
    pub fn uniform(n_steps: usize) -> Result<Self, NoiseError> {
        if n_steps < 2 {
            return Err(NoiseError::InvalidGrid(format!(
                "need at least 2 steps, got {n_steps}"
            )));
        }
        Ok(PathGrid {
            n_steps,
            policy: StepPolicy::Uniform,
        })
    }

    /// Explicit strictly increasing times t_0 = 0 < ... < t_N.
    pub fn explicit(times: Vec<f64>) -> Result<Self, NoiseError> {
        if times.len() < 3 {
            return Err(NoiseError::InvalidGrid("need at least 3 time points".into()));
        }
        if times[0] != 0.0 {
            return Err(NoiseError::InvalidGrid("times must start at 0".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NoiseError::InvalidGrid("times must be strictly increasing".into()));
        }
        Ok(PathGrid {
            n_steps: times.len() - 1,
            policy: StepPolicy::Explicit(times),
        })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Concrete grid times for horizon T (explicit grids are rescaled to T).
    pub fn times(&self, horizon: f64) -> Vec<f64> {
        match &self.policy {
            StepPolicy::Uniform => (0..=self.n_steps)
                .map(|i| horizon * i as f64 / self.n_steps as f64)
                .collect(),
            StepPolicy::Explicit(ts) => {
                let last = *ts.last().unwrap();
                ts.iter().map(|&t| t * horizon / last).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AnalyticFormula {
    Zero,
    /// alpha * t + t^(2+beta) * sin(1/t), with value 0 at t = 0.
    Smooth { alpha: f64, beta: f64 },
    /// The negation of `Smooth` (analytic reflection).
    NegSmooth { alpha: f64, beta: f64 },
}

impl AnalyticFormula {
    fn eval(&self, t: f64) -> f64 {
        match self {
            AnalyticFormula::Zero => 0.0,
            AnalyticFormula::Smooth { alpha, beta } => {
                if t == 0.0 {
                    0.0
                } else {
                    alpha * t + t.powf(2.0 + beta) * (1.0 / t).sin()
                }
            }
            AnalyticFormula::NegSmooth { alpha, beta } => {
                -AnalyticFormula::Smooth {
                    alpha: *alpha,
                    beta: *beta,
                }
                .eval(t)
            }
        }
    }

    fn negated(&self) -> AnalyticFormula {
        match *self {
            AnalyticFormula::Zero => AnalyticFormula::Zero,
            AnalyticFormula::Smooth { alpha, beta } => AnalyticFormula::NegSmooth { alpha, beta },
            AnalyticFormula::NegSmooth { alpha, beta } => AnalyticFormula::Smooth { alpha, beta },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Interpolation {
    Linear,
    Analytic(AnalyticFormula),
}

/// Where a path came from; serialized into JSON reports for replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Brownian { seed: u64 },
    AbsBrownian { seed: u64 },
    NegAbsBrownian { seed: u64 },
    Smooth { alpha: f64, beta: f64 },
    Zero,
    External { file: String },
}

/// A continuous noise path on [0, T], stored as grid samples with an
/// interpolation rule.
#[derive(Debug, Clone)]
pub struct NoisePath {
    horizon: f64,
    times: Arc<Vec<f64>>,
    values: Vec<f64>,
    interpolation: Interpolation,
    provenance: Provenance,
}

impl NoisePath {
    /// Brownian path: partial sums of independent Gaussian increments with
    /// variance equal to the time step. Deterministic in (seed, grid, T).
    pub fn sample_brownian(seed: u64, grid: &PathGrid, horizon: f64) -> Self {
        let times = grid.times(horizon);
        let mut gauss = GaussianSource::new(seed);
        let mut values = Vec::with_capacity(times.len());
        values.push(0.0);
        for w in times.windows(2) {
            let dt = w[1] - w[0];
            let prev = *values.last().unwrap();
            values.push(prev + dt.sqrt() * gauss.next_standard_normal());
        }
        NoisePath {
            horizon,
            times: Arc::new(times),
            values,
            interpolation: Interpolation::Linear,
            provenance: Provenance::Brownian { seed },
        }
    }

    pub fn zero(grid: &PathGrid, horizon: f64) -> Self {
        let times = grid.times(horizon);
        let n = times.len();
        NoisePath {
            horizon,
            times: Arc::new(times),
            values: vec![0.0; n],
            interpolation: Interpolation::Analytic(AnalyticFormula::Zero),
            provenance: Provenance::Zero,
        }
    }

    /// The oscillatory differentiable noise alpha*t + t^(2+beta) sin(1/t).
    /// Evaluated analytically everywhere: sin(1/t) oscillates below any grid
    /// near 0, so interpolation would misrepresent it.
    pub fn smooth(alpha: f64, beta: f64, grid: &PathGrid, horizon: f64) -> Self {
        let formula = AnalyticFormula::Smooth { alpha, beta };
        let times = grid.times(horizon);
        let values = times.iter().map(|&t| formula.eval(t)).collect();
        NoisePath {
            horizon,
            times: Arc::new(times),
            values,
            interpolation: Interpolation::Analytic(formula),
            provenance: Provenance::Smooth { alpha, beta },
        }
    }

    /// Builds a path from explicit samples with linear interpolation.
    pub fn from_samples(
        times: Vec<f64>,
        values: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self, NoiseError> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(NoiseError::InvalidGrid(
                "times/values must have equal length >= 2".into(),
            ));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NoiseError::InvalidGrid(
                "times must be strictly increasing and start at 0".into(),
            ));
        }
        if values[0] != 0.0 {
            return Err(NoiseError::InvalidGrid("omega_0 must be 0".into()));
        }
        Ok(NoisePath {
            horizon: *times.last().unwrap(),
            times: Arc::new(times),
            values,
            interpolation: Interpolation::Linear,
            provenance,
        })
    }

    /// Reads a CSV path with header `t,omega`, strictly increasing t from 0.
    pub fn from_csv<R: BufRead>(reader: R, file: impl Into<String>) -> Result<Self, NoiseError> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| NoiseError::InvalidCsv("empty file".into()))??;
        if header.trim() != "t,omega" {
            return Err(NoiseError::InvalidCsv(format!(
                "expected header 't,omega', got '{header}'"
            )));
        }
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let t: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| NoiseError::InvalidCsv(format!("row {}: bad t", i + 2)))?;
            let v: f64 = parts
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| NoiseError::InvalidCsv(format!("row {}: bad omega", i + 2)))?;
            times.push(t);
            values.push(v);
        }
        NoisePath::from_samples(times, values, Provenance::External { file: file.into() })
    }

    /// Writes the `t,omega` CSV form; floats use shortest round-trip
    /// formatting so re-ingestion is exact.
    pub fn to_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "t,omega")?;
        for (t, v) in self.times.iter().zip(self.values.iter()) {
            writeln!(out, "{t},{v}")?;
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn shared_times(&self) -> Arc<Vec<f64>> {
        Arc::clone(&self.times)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// sup_t |omega_t| over the stored grid (W*_T).
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Evaluates the path at any t in [0, T]: exact for analytic
    /// interpolation, linear between bracketing grid points otherwise.
    pub fn eval(&self, t: f64) -> Result<f64, NoiseError> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(NoiseError::OutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self.eval_unchecked(t))
    }

    /// As [`eval`](Self::eval) but clamping t into [0, T]; used by integrator
    /// inner loops where t is already validated.
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        match self.interpolation {
            Interpolation::Analytic(f) => f.eval(t),
            Interpolation::Linear => {
                let ts = &*self.times;
                match ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
                    Ok(i) => self.values[i],
                    Err(0) => self.values[0],
                    Err(i) if i >= ts.len() => *self.values.last().unwrap(),
                    Err(i) => {
                        let (t0, t1) = (ts[i - 1], ts[i]);
                        let w = (t - t0) / (t1 - t0);
                        self.values[i - 1] + w * (self.values[i] - self.values[i - 1])
                    }
                }
            }
        }
    }

    /// Pointwise |omega|. Brownian provenance becomes AbsBrownian.
    pub fn transform_abs(&self) -> NoisePath {
        let provenance = match &self.provenance {
            Provenance::Brownian { seed } => Provenance::AbsBrownian { seed: *seed },
            p => p.clone(),
        };
        NoisePath {
            horizon: self.horizon,
            times: Arc::clone(&self.times),
            values: self.values.iter().map(|v| v.abs()).collect(),
            interpolation: Interpolation::Linear,
            provenance,
        }
    }

    /// Pointwise -|omega|. Brownian provenance becomes NegAbsBrownian.
    pub fn transform_neg_abs(&self) -> NoisePath {
        let provenance = match &self.provenance {
            Provenance::Brownian { seed } => Provenance::NegAbsBrownian { seed: *seed },
            p => p.clone(),
        };
        NoisePath {
            horizon: self.horizon,
            times: Arc::clone(&self.times),
            values: self.values.iter().map(|v| -v.abs()).collect(),
            interpolation: Interpolation::Linear,
            provenance,
        }
    }

    /// Pointwise negation (the reflection route's omega~ = -omega).
    /// Analytic paths stay analytic under a negated formula; provenance is
    /// kept, reflected paths being an internal construction step.
    pub fn reflect(&self) -> NoisePath {
        let interpolation = match self.interpolation {
            Interpolation::Analytic(f) => Interpolation::Analytic(f.negated()),
            Interpolation::Linear => Interpolation::Linear,
        };
        NoisePath {
            horizon: self.horizon,
            times: Arc::clone(&self.times),
            values: self.values.iter().map(|v| -v).collect(),
            interpolation,
            provenance: self.provenance.clone(),
        }
    }

    /// True when the path is identically zero on its grid.
    pub fn is_identically_zero(&self) -> bool {
        match self.interpolation {
            Interpolation::Analytic(AnalyticFormula::Zero) => true,
            _ => self.values.iter().all(|&v| v == 0.0),
        }
    }
}
