//! Minimal and maximal solutions of the perturbed equation
//! x_t = int_0^t b(x_s) ds + omega_t for non-Lipschitz drifts, with numerical
//! certificates for path-by-path uniqueness.
//!
//! The equation is solved in shifted form, y_t = int_0^t b(y_s + omega_s) ds
//! with y = x - omega. The drift b may fail to be Lipschitz (the paradigmatic
//! case is b = sqrt|x|, where the unperturbed equation has the two solutions
//! 0 and t^2/4); the solver builds Lipschitz polynomial stage drifts strictly
//! below (or above) b, solves each stage, and takes the monotone limit, which
//! is the minimal (maximal) solution. Certificates then quantify when the two
//! extremal solutions must coincide: integrability of the one-sided Lipschitz
//! surrogate a(t) along the minimal solution, the simpler tests available for
//! non-negative noises, and transform-monotonicity tests for differentiable
//! noises.
//!
//! Module map:
//! - [`drift`]: the drift catalog, one-sided derivatives, hypothesis checks;
//! - [`noise`]: Brownian / |W| / -|W| / oscillatory / external noise paths;
//! - [`approx`]: certified clamped polynomial approximants of shifted drifts;
//! - [`solver`]: Lipschitz stage solves and the monotone extremal limits;
//! - [`certify`]: the uniqueness certificates and the Gronwall gap ceiling;
//! - [`ensemble`]: seeded Monte Carlo over Brownian paths, the H7 moment
//!   check against its quadrature oracle, refinement studies;
//! - [`scenario`] and [`cli`]: the TOML scenario frontend and its commands;
//! - [`rng`], [`quad`], [`report`], [`svg`]: reproducible randomness,
//!   Gauss-Legendre quadrature, emitters.
//!
//! Every Monte Carlo surface is deterministic in its seeds: path i derives
//! its stream via [`rng::mix`], and reports are bit-identical across runs and
//! worker counts.

pub mod approx;
pub mod certify;
pub mod cli;
pub mod drift;
pub mod ensemble;
pub mod noise;
pub mod quad;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod solver;
pub mod svg;
