//! Scenario configuration: a single human-editable TOML file describing the
//! drift, the noise, the run horizon and grid, solver settings, certificate
//! selection and output location.
//!
//! Grammar (all sections except `name`, `[drift]` and `[noise]` optional):
//!
//! ```toml
//! name = "sqrt-brownian"
//!
//! [drift]
//! kind = "power-law"        # power-law | discontinuous-sqrt | linear |
//!                           # zero | scaled-power | tabulated
//! alpha = 0.5               # power-law, scaled-power: alpha in (0, 1)
//! # slope = 1.0             # linear
//! # scale = { kind = "constant", value = 1.0 }          # scaled-power
//! # scale = { kind = "exp-decay", rate = 0.5 }
//! # breakpoints = [-1.0, 1.0]                            # tabulated
//! # pieces = [[0.0, 1.0]]                                # ascending coeffs
//!
//! [noise]
//! kind = "brownian"         # brownian | abs-brownian | neg-abs-brownian |
//!                           # smooth | zero | external
//! seed = 42                 # brownian kinds
//! # alpha = 1.0             # smooth: omega = alpha t + t^(2+beta) sin(1/t)
//! # beta = 1.0              # smooth: beta > 0
//! # file = "path.csv"       # external: header `t,omega`
//!
//! [run]
//! horizon = 1.0
//! grid = 16384
//!
//! [solver]
//! integrator = "rk4"        # rk4 | heun | euler
//! n_max = 64
//! stage_tolerance = 1e-4
//! safety_factor = 0.25
//! maximal_route = "reflection"   # reflection | plus-shift
//!
//! [certificates]
//! which = ["iyanaga", "nonneg-noise", "lakshmikantham", "peano-h8", "peano-h9"]
//! eta = 1.0
//!
//! [ensemble]
//! paths = 100
//! seed_base = 42
//! gap_epsilon = 1e-2
//!
//! [output]
//! dir = "out"
//! svg = false
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::drift::DriftSpec;
use crate::ensemble::{EnsembleSettings, NoiseKind};
use crate::noise::{NoiseError, NoisePath, PathGrid};
use crate::solver::{Integrator, MaximalRoute, SolveSettings};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
    #[error("io error reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub drift: DriftConfig,
    pub noise: NoiseConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub certificates: CertificatesConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory the scenario file was loaded from; external file references
    /// resolve relative to it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftConfig {
    pub kind: String,
    pub alpha: Option<f64>,
    pub slope: Option<f64>,
    pub scale: Option<ScaleConfig>,
    pub breakpoints: Option<Vec<f64>>,
    pub pieces: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScaleConfig {
    Constant { value: f64 },
    ExpDecay { rate: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: String,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub file: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_grid_steps")]
    pub grid: usize,
}

fn default_horizon() -> f64 {
    1.0
}

fn default_grid_steps() -> usize {
    1 << 14
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            horizon: 1.0,
            grid: 1 << 14,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_integrator")]
    pub integrator: Integrator,
    #[serde(default = "default_n_max")]
    pub n_max: u32,
    #[serde(default = "default_stage_tolerance")]
    pub stage_tolerance: f64,
    #[serde(default = "default_safety_factor")]
    pub safety_factor: f64,
    #[serde(default = "default_maximal_route")]
    pub maximal_route: MaximalRoute,
}

fn default_integrator() -> Integrator {
    Integrator::Rk4
}

fn default_n_max() -> u32 {
    64
}

fn default_stage_tolerance() -> f64 {
    1e-4
}

fn default_safety_factor() -> f64 {
    0.25
}

fn default_maximal_route() -> MaximalRoute {
    MaximalRoute::Reflection
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            integrator: Integrator::Rk4,
            n_max: 64,
            stage_tolerance: 1e-4,
            safety_factor: 0.25,
            maximal_route: MaximalRoute::Reflection,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificatesConfig {
    #[serde(default = "default_certificates")]
    pub which: Vec<String>,
    #[serde(default = "default_eta")]
    pub eta: f64,
}

fn default_certificates() -> Vec<String> {
    vec!["iyanaga".into()]
}

fn default_eta() -> f64 {
    1.0
}

impl Default for CertificatesConfig {
    fn default() -> Self {
        CertificatesConfig {
            which: vec!["iyanaga".into()],
            eta: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_seed_base")]
    pub seed_base: u64,
    #[serde(default = "default_gap_epsilon")]
    pub gap_epsilon: f64,
}

fn default_paths() -> usize {
    100
}

fn default_seed_base() -> u64 {
    42
}

fn default_gap_epsilon() -> f64 {
    1e-2
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            paths: 100,
            seed_base: 42,
            gap_epsilon: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub svg: bool,
}

#[allow(clippy::derivable_impls)]
impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            svg: false,
        }
    }
}

const DRIFT_KINDS: &[&str] = &[
    "power-law",
    "discontinuous-sqrt",
    "linear",
    "zero",
    "scaled-power",
    "tabulated",
];
const NOISE_KINDS: &[&str] = &[
    "brownian",
    "abs-brownian",
    "neg-abs-brownian",
    "smooth",
    "zero",
    "external",
];
const CERTIFICATE_NAMES: &[&str] = &[
    "iyanaga",
    "nonneg-noise",
    "lakshmikantham",
    "peano-h8",
    "peano-h9",
];

impl Scenario {
    pub fn from_toml_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, ScenarioError> {
        let mut scenario: Scenario =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        scenario.base_dir = base_dir.into();
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Scenario::from_toml_str(&text, base)
    }

    /// Validates parameter ranges, collecting every violation with the range
    /// it breaks.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut problems = Vec::new();
        let d = &self.drift;
        match d.kind.as_str() {
            "power-law" | "scaled-power" => match d.alpha {
                Some(a) if a > 0.0 && a < 1.0 => {}
                Some(a) => problems.push(format!(
                    "drift.alpha must lie in the open interval (0, 1), got {a}"
                )),
                None => problems.push("drift.alpha is required for this kind".into()),
            },
            "linear" => {
                if d.slope.is_none() {
                    problems.push("drift.slope is required for kind = \"linear\"".into());
                }
            }
            "tabulated" => {
                if d.breakpoints.is_none() || d.pieces.is_none() {
                    problems.push("drift.breakpoints and drift.pieces are required".into());
                }
            }
            "discontinuous-sqrt" | "zero" => {}
            other => problems.push(format!(
                "drift.kind must be one of {DRIFT_KINDS:?}, got \"{other}\""
            )),
        }
        if d.kind == "scaled-power" && d.scale.is_none() {
            problems.push("drift.scale is required for kind = \"scaled-power\"".into());
        }
        let n = &self.noise;
        match n.kind.as_str() {
            "brownian" | "abs-brownian" | "neg-abs-brownian" => {
                if n.seed.is_none() {
                    problems.push(format!("noise.seed is required for kind = \"{}\"", n.kind));
                }
            }
            "smooth" => {
                match n.alpha {
                    Some(a) if a > 0.0 => {}
                    Some(a) => problems.push(format!("noise.alpha must be > 0, got {a}")),
                    None => problems.push("noise.alpha is required for smooth noise".into()),
                }
                match n.beta {
                    Some(b) if b > 0.0 => {}
                    Some(b) => problems.push(format!("noise.beta must be > 0, got {b}")),
                    None => problems.push("noise.beta is required for smooth noise".into()),
                }
            }
            "external" => {
                if n.file.is_none() {
                    problems.push("noise.file is required for external noise".into());
                }
            }
            "zero" => {}
            other => problems.push(format!(
                "noise.kind must be one of {NOISE_KINDS:?}, got \"{other}\""
            )),
        }
        if self.run.horizon.is_nan() || self.run.horizon <= 0.0 {
            problems.push(format!("run.horizon must be > 0, got {}", self.run.horizon));
        }
        if self.run.grid < 2 {
            problems.push(format!("run.grid must be >= 2, got {}", self.run.grid));
        }
        if self.solver.stage_tolerance.is_nan() || self.solver.stage_tolerance <= 0.0 {
            problems.push(format!(
                "solver.stage_tolerance must be > 0, got {}",
                self.solver.stage_tolerance
            ));
        }
        if self.solver.n_max < 2 {
            problems.push(format!("solver.n_max must be >= 2, got {}", self.solver.n_max));
        }
        if self.solver.safety_factor.is_nan()
            || self.solver.safety_factor <= 0.0
            || self.solver.safety_factor > 1.0
        {
            problems.push(format!(
                "solver.safety_factor must lie in (0, 1], got {}",
                self.solver.safety_factor
            ));
        }
        for c in &self.certificates.which {
            if !CERTIFICATE_NAMES.contains(&c.as_str()) {
                problems.push(format!(
                    "certificates.which entries must be among {CERTIFICATE_NAMES:?}, got \"{c}\""
                ));
            }
        }
        if self.certificates.eta.is_nan() || self.certificates.eta <= 0.0 {
            problems.push(format!(
                "certificates.eta must be > 0, got {}",
                self.certificates.eta
            ));
        }
        if self.ensemble.paths == 0 {
            problems.push("ensemble.paths must be >= 1".into());
        }
        if self.ensemble.gap_epsilon.is_nan() || self.ensemble.gap_epsilon <= 0.0 {
            problems.push(format!(
                "ensemble.gap_epsilon must be > 0, got {}",
                self.ensemble.gap_epsilon
            ));
        }
        if let Some(file) = &n.file {
            if n.kind == "external" && !self.base_dir.join(file).exists() {
                problems.push(format!(
                    "noise.file \"{}\" does not exist (relative to the scenario file)",
                    file
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Validation(problems))
        }
    }

    pub fn build_drift(&self) -> Result<DriftSpec, ScenarioError> {
        let d = &self.drift;
        let spec = match d.kind.as_str() {
            "power-law" => DriftSpec::power_law(d.alpha.unwrap())
                .map_err(|e| ScenarioError::Validation(vec![e.to_string()]))?,
            "discontinuous-sqrt" => DriftSpec::discontinuous_sqrt(),
            "linear" => DriftSpec::linear(d.slope.unwrap()),
            "zero" => DriftSpec::zero(),
            "scaled-power" => {
                let alpha = d.alpha.unwrap();
                match d.scale.clone().unwrap() {
                    ScaleConfig::Constant { value } => DriftSpec::scaled_power(
                        alpha,
                        value.abs().max(1.0),
                        format!("constant({value})"),
                        move |_| value,
                        Some(std::sync::Arc::new(|_| 0.0)),
                    ),
                    ScaleConfig::ExpDecay { rate } => DriftSpec::scaled_power(
                        alpha,
                        1.0,
                        format!("exp(-{rate} x)"),
                        move |x: f64| (-rate * x).exp(),
                        Some(std::sync::Arc::new(move |x: f64| -rate * (-rate * x).exp())),
                    ),
                }
                .map_err(|e| ScenarioError::Validation(vec![e.to_string()]))?
            }
            "tabulated" => DriftSpec::tabulated(
                d.breakpoints.clone().unwrap(),
                d.pieces.clone().unwrap(),
            )
            .map_err(|e| ScenarioError::Validation(vec![e.to_string()]))?,
            _ => unreachable!("validated"),
        };
        Ok(spec)
    }

    pub fn build_noise(&self) -> Result<NoisePath, ScenarioError> {
        let grid = PathGrid::uniform(self.run.grid)?;
        let t = self.run.horizon;
        let n = &self.noise;
        Ok(match n.kind.as_str() {
            "brownian" => NoisePath::sample_brownian(n.seed.unwrap(), &grid, t),
            "abs-brownian" => NoisePath::sample_brownian(n.seed.unwrap(), &grid, t).transform_abs(),
            "neg-abs-brownian" => {
                NoisePath::sample_brownian(n.seed.unwrap(), &grid, t).transform_neg_abs()
            }
            "smooth" => NoisePath::smooth(n.alpha.unwrap(), n.beta.unwrap(), &grid, t),
            "zero" => NoisePath::zero(&grid, t),
            "external" => {
                let path = self.base_dir.join(n.file.as_ref().unwrap());
                let file = std::fs::File::open(&path).map_err(|source| ScenarioError::Io {
                    path: path.clone(),
                    source,
                })?;
                NoisePath::from_csv(std::io::BufReader::new(file), path.display().to_string())?
            }
            _ => unreachable!("validated"),
        })
    }

    /// The Brownian-family ensemble kind, when the noise is seeded.
    pub fn ensemble_noise_kind(&self) -> Option<NoiseKind> {
        match self.noise.kind.as_str() {
            "brownian" => Some(NoiseKind::Brownian),
            "abs-brownian" => Some(NoiseKind::AbsBrownian),
            "neg-abs-brownian" => Some(NoiseKind::NegAbsBrownian),
            "zero" => Some(NoiseKind::Zero),
            _ => None,
        }
    }

    pub fn solve_settings(&self) -> SolveSettings {
        SolveSettings {
            grid: PathGrid::uniform(self.run.grid).expect("validated grid"),
            n_max: self.solver.n_max,
            stage_tolerance: self.solver.stage_tolerance,
            integrator: self.solver.integrator,
            safety_factor: self.solver.safety_factor,
            allow_substepping: true,
            maximal_route: self.solver.maximal_route,
            verify_grid_size: 10_000,
            retain_stage_paths: false,
        }
    }

    pub fn ensemble_settings(&self) -> EnsembleSettings {
        EnsembleSettings {
            paths: self.ensemble.paths,
            seed_base: self.ensemble.seed_base,
            gap_epsilon: self.ensemble.gap_epsilon,
            discretization_allowance: 1e-3,
            solver: self.solve_settings(),
        }
    }
}
