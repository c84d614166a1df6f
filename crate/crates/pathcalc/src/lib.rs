//! Numerical functional Itô calculus via regularization.
//!
//! The library works with windows of paths on an interval `[-T, 0]` (the
//! "past up to now" view) and provides:
//!
//! * [`regcalc`] — forward/backward integrals and covariations defined as
//!   `ε → 0` limits of regularized difference quotients, with Richardson
//!   extrapolation and integration-by-parts cross checks;
//! * [`funcder`] — horizontal and vertical derivatives of path functionals,
//!   cylindrical functionals, and the Fréchet-representation check of the
//!   horizontal derivative as a backward integral;
//! * [`simflow`] — Brownian drivers with counter-based per-path RNG streams,
//!   window flows, and a pathwise Itô-formula verifier at fixed `ε`;
//! * [`ppde`] — Gaussian closed forms for cylindrical path-dependent heat
//!   equations, the lookback/running-maximum solution, and Monte Carlo
//!   pricing of path functionals;
//! * [`approx`] — trigonometric Fejér approximation of paths and the
//!   smoothed cylindrical approximants used to study convergence of
//!   non-smooth terminal functionals;
//! * [`bsde`] — Euler simulation of SDEs with mollified coefficients and a
//!   regression-based backward solver for (super/sub-solution) BSDEs with
//!   comparison and a-priori-estimate checks.
//!
//! Everything is deterministic given a seed: random number streams are keyed
//! by `(seed, path index)` so results do not depend on thread count.

pub mod approx;
pub mod bsde;
pub mod error;
pub mod fixtures;
pub mod funcder;
pub mod paths;
pub mod ppde;
pub mod quad;
pub mod regcalc;
pub mod report;
pub mod simflow;

pub use error::{Error, Result};
pub use paths::{Grid, SampledPath, Trajectory};
pub use regcalc::{EpsilonSchedule, LimitEstimate};
pub use report::{ReportEntry, VerificationReport};
