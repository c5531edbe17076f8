//! Pathwise stochastic integration for integrands of unbounded p-variation.
//!
//! The crate works on sampled trajectories ([`paths::SampledPath`]) and
//! provides fractional integrals and derivatives ([`fracops`]), p-variation
//! ([`variation`]), measure representations of convex and BV functions
//! ([`convexbv`]), generalized Lebesgue–Stieltjes and Riemann–Stieltjes
//! integrals ([`glsint`]), and reproducible verification experiments
//! ([`harness`]).

pub mod convexbv;
pub mod error;
pub mod fracops;
pub mod glsint;
pub mod harness;
pub mod paths;
mod numeric;
mod quad;
pub mod variation;

pub use error::{Error, Result};
pub use paths::{generate, ProcessKind, ProcessSpec, SampledPath};
