//! Simulation of squeezed-state generation in a lossy optical cavity coupled
//! to a thermal bath.
//!
//! A cavity mode pumped by degenerate parametric down conversion and damped
//! into a thermal environment stays a squeezed thermal state for all time;
//! its evolution reduces to a small set of coupled ODEs in the squeezing
//! amplitude `u`, squeezing phase `phi` and thermal photon number `n_th`.
//! This crate provides:
//!
//! - [`sts`]: the squeezed-thermal-state parameterization and closed-form
//!   observables (quadrature variances, total photon number, second-order
//!   coherence).
//! - [`pump`]: pump-ratio envelopes `g(t)` (constant, Gaussian, sampled).
//! - [`ode`]: the adaptive Dormand–Prince 5(4) integrator used by the
//!   analytic engine.
//! - [`analytic`]: time evolution of the state parameters, exact
//!   quadrature solutions, steady states and threshold formulas.
//! - [`oracle`]: a brute-force Lindblad master-equation solver on a
//!   truncated Fock space, used to verify the closed-form solution.

pub mod analytic;
pub mod ode;
pub mod oracle;
pub mod pump;
pub mod sts;

pub use analytic::{SteadyState, Trajectory};
pub use pump::PumpEnvelope;
pub use sts::{ModelParams, ObservableRecord, StsState};
