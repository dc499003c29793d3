//! Squeezed-thermal-state parameterization and closed-form observables.
//!
//! A squeezed thermal state is fully described by the triple `(u, phi, n_th)`:
//! the complex squeeze factor is `xi = u e^{i phi}` and `n_th` is the mean
//! occupation of the thermal core. Everything in this module is a pure
//! function of those parameters; time evolution lives in [`crate::analytic`].
//!
//! Quadrature convention: the vacuum has unit variance, so
//! `dX^2 = (2 n_th + 1) e^{-2u}` and `dY^2 = (2 n_th + 1) e^{2u}`.

use serde::Serialize;
use thiserror::Error;

/// Denominator threshold below which the second-order coherence is treated
/// as undefined (vacuum limit).
pub const G2_DENOM_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("squeezing amplitude must be finite and >= 0, got {0}")]
    InvalidSqueezing(f64),
    #[error("thermal photon number must be finite and >= 0, got {0}")]
    InvalidThermalPopulation(f64),
    #[error("squeezing phase must be finite, got {0}")]
    InvalidPhase(f64),
    #[error("decay rate must be finite and > 0, got {0}")]
    InvalidDecayRate(f64),
    #[error("bath photon number must be finite and >= 0, got {0}")]
    InvalidBathPopulation(f64),
    #[error("cavity frequency must be finite and >= 0, got {0}")]
    InvalidFrequency(f64),
    #[error("2*n_th0 + 1 must be > 0, got n_th0 = {0}")]
    Nth0OutOfDomain(f64),
}

/// Instantaneous squeezed-thermal-state parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StsState {
    /// Squeezing amplitude, dimensionless, >= 0.
    pub u: f64,
    /// Squeezing phase in radians.
    pub phi: f64,
    /// Thermal photon number, dimensionless, >= 0.
    pub n_th: f64,
}

impl StsState {
    pub fn new(u: f64, phi: f64, n_th: f64) -> Result<Self, ModelError> {
        if !u.is_finite() || u < 0.0 {
            return Err(ModelError::InvalidSqueezing(u));
        }
        if !n_th.is_finite() || n_th < 0.0 {
            return Err(ModelError::InvalidThermalPopulation(n_th));
        }
        if !phi.is_finite() {
            return Err(ModelError::InvalidPhase(phi));
        }
        Ok(Self { u, phi, n_th })
    }

    /// Unsqueezed thermal state at occupation `n_th`.
    pub fn thermal(n_th: f64) -> Result<Self, ModelError> {
        Self::new(0.0, 0.0, n_th)
    }
}

/// Physical constants of the cavity/bath model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Power decay rate of cavity photons into the bath (1/time).
    pub gamma_decay: f64,
    /// Mean photon number of the bath at the cavity frequency.
    pub n_b: f64,
    /// Cavity angular frequency (rad/time). Zero selects the rotating frame.
    pub omega: f64,
    /// Pump phase in radians; sets the initial squeezing phase
    /// `phi(0) = theta + pi/2`.
    pub theta: f64,
}

impl ModelParams {
    pub fn new(gamma_decay: f64, n_b: f64, omega: f64, theta: f64) -> Result<Self, ModelError> {
        if !gamma_decay.is_finite() || gamma_decay <= 0.0 {
            return Err(ModelError::InvalidDecayRate(gamma_decay));
        }
        if !n_b.is_finite() || n_b < 0.0 {
            return Err(ModelError::InvalidBathPopulation(n_b));
        }
        if !omega.is_finite() || omega < 0.0 {
            return Err(ModelError::InvalidFrequency(omega));
        }
        if !theta.is_finite() {
            return Err(ModelError::InvalidPhase(theta));
        }
        Ok(Self { gamma_decay, n_b, omega, theta })
    }

    /// Initial squeezing phase `theta + pi/2`.
    pub fn phi0(&self) -> f64 {
        self.theta + std::f64::consts::FRAC_PI_2
    }
}

/// One output sample of a trajectory: state parameters plus derived
/// observables at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservableRecord {
    /// Time (same units as 1/gamma_decay).
    pub t: f64,
    /// Pump ratio g at `t`.
    pub g: f64,
    pub u: f64,
    pub phi: f64,
    pub n_th: f64,
    /// Total photon number.
    pub n: f64,
    /// Squeezed quadrature variance.
    pub dx2: f64,
    /// Anti-squeezed quadrature variance.
    pub dy2: f64,
    /// Second-order coherence; `None` at vanishing population.
    pub g2: Option<f64>,
}

impl ObservableRecord {
    /// Fill the derived observables for a state at time `t` with pump ratio `g`.
    pub fn from_state(t: f64, g: f64, state: &StsState) -> Self {
        let (dx2, dy2) = quad_variances(state);
        Self {
            t,
            g,
            u: state.u,
            phi: state.phi,
            n_th: state.n_th,
            n: total_population(state),
            dx2,
            dy2,
            g2: g2_of_state(state),
        }
    }
}

/// Quadrature variances `(dX^2, dY^2) = ((2 n_th + 1) e^{-2u}, (2 n_th + 1) e^{2u})`.
///
/// Their product is `(2 n_th + 1)^2`, independent of `u`.
pub fn quad_variances(state: &StsState) -> (f64, f64) {
    let w = 2.0 * state.n_th + 1.0;
    (w * (-2.0 * state.u).exp(), w * (2.0 * state.u).exp())
}

/// Total photon number `n = n_th cosh(2u) + sinh^2(u)`.
pub fn total_population(state: &StsState) -> f64 {
    let s = state.u.sinh();
    state.n_th * (2.0 * state.u).cosh() + s * s
}

/// Equal-time second-order coherence of a squeezed thermal state,
///
/// `g2 = 2 + (2 n_th + 1)^2 sinh^2(2u) / [(2 n_th + 1) cosh(2u) - 1]^2`.
///
/// Returns `None` when the denominator falls below [`G2_DENOM_TOL`]
/// (vanishing population; the ratio is singular for the vacuum).
pub fn g2_of_state(state: &StsState) -> Option<f64> {
    let w = 2.0 * state.n_th + 1.0;
    let den = w * (2.0 * state.u).cosh() - 1.0;
    if den < G2_DENOM_TOL {
        return None;
    }
    let s2u = (2.0 * state.u).sinh();
    Some(2.0 + (w * s2u / den).powi(2))
}

/// Auxiliary zero-bath thermal population, `n_th0 = (n_th - n_b) / (2 n_b + 1)`.
///
/// May be negative when the cavity starts colder than the bath; only `n_th`
/// itself must stay nonnegative.
pub fn nth0_from_nth(n_th: f64, n_b: f64) -> f64 {
    (n_th - n_b) / (2.0 * n_b + 1.0)
}

/// Inverse of [`nth0_from_nth`]: `2 n_th + 1 = (2 n_b + 1)(2 n_th0 + 1)`.
///
/// Errors when `2 n_th0 + 1 <= 0`, which would give `n_th < -1/2`.
pub fn nth_from_nth0(n_th0: f64, n_b: f64) -> Result<f64, ModelError> {
    if 2.0 * n_th0 + 1.0 <= 0.0 {
        return Err(ModelError::Nth0OutOfDomain(n_th0));
    }
    Ok(((2.0 * n_b + 1.0) * (2.0 * n_th0 + 1.0) - 1.0) / 2.0)
}
