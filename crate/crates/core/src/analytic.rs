//! Time evolution of the squeezed-thermal-state parameters, exact quadrature
//! solutions, steady states and threshold formulas.
//!
//! For an unchirped pump the phase decouples, `phi(t) = theta + pi/2 - 2 w t`,
//! and the state follows the reduced system
//!
//! ```text
//! dn_th/dt = G [ n_b cosh(2u) + sinh^2(u) - n_th ]
//! du/dt    = G g(t)/2 - (G/2) sinh(2u) (2 n_b + 1)/(2 n_th + 1)
//! ```
//!
//! with `G` the power decay rate. The squeezed quadrature obeys the linear
//! equation `d(dX^2)/dt = G [(2 n_b + 1) - (1 + g(t)) dX^2]` (`g -> -g` for
//! `dY^2`), which this module also solves in closed form for constant and
//! arbitrary envelopes.

use serde::Serialize;
use thiserror::Error;

use crate::ode::{self, OdeError, StepStats, Tolerances};
use crate::pump::PumpEnvelope;
use crate::sts::{self, ModelError, ModelParams, ObservableRecord, StsState};

/// Relative excess over the steady-state coherence required to call an
/// interior maximum a peak.
pub const G2_PEAK_EXCESS: f64 = 1e-8;

/// Below this squeezing amplitude the full-mode phase equation is singular.
pub const FULL_MODE_MIN_U: f64 = 1e-12;

/// Internal substep (in units of `G t`) for the general quadrature solution.
/// Midpoint-frozen exponential stepping is second order, so this keeps the
/// global error well under 1e-8 for the pulse shapes of interest.
const QUAD_SUBSTEP: f64 = 2.5e-4;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("output grid must start at 0 and increase strictly")]
    InvalidGrid,
    #[error("full-mode derivatives are singular for u <= {FULL_MODE_MIN_U} (got u = {u})")]
    FullModeSingular { u: f64 },
    #[error("pump ratio must be finite and >= 0, got {0}")]
    InvalidPumpRatio(f64),
    #[error("no steady state exists for g0 = {0} >= 1")]
    NoSteadyState(f64),
    #[error("dX^2 never reaches 1 from equilibrium when g0 <= 2 n_b (g0 = {g0}, n_b = {n_b})")]
    NoThreshold { g0: f64, n_b: f64 },
    #[error("threshold anti-squeezing requires n_b > 0")]
    RequiresPositiveBath,
}

/// Derivative evaluation mode.
///
/// `Reduced` assumes the unchirped convention with the analytic phase;
/// `Full` evaluates the three coupled equations including the pump-phase
/// terms and needs the current time to reconstruct the complex pump product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivMode {
    Reduced,
    Full { t: f64 },
}

/// Time derivatives of the state parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StsDerivatives {
    pub dn_th: f64,
    pub du: f64,
    pub dphi: f64,
}

/// Evaluate the coupled equations of motion at one state.
pub fn sts_derivatives(
    state: &StsState,
    params: &ModelParams,
    g_t: f64,
    mode: DerivMode,
) -> Result<StsDerivatives, EngineError> {
    if !g_t.is_finite() || g_t < 0.0 {
        return Err(EngineError::InvalidPumpRatio(g_t));
    }
    let gamma = params.gamma_decay;
    let w_b = 2.0 * params.n_b + 1.0;
    let s = state.u.sinh();
    let dn_th = gamma * (params.n_b * (2.0 * state.u).cosh() + s * s - state.n_th);
    let decay = 0.5 * gamma * (2.0 * state.u).sinh() * w_b / (2.0 * state.n_th + 1.0);
    match mode {
        DerivMode::Reduced => Ok(StsDerivatives {
            dn_th,
            du: 0.5 * gamma * g_t - decay,
            dphi: -2.0 * params.omega,
        }),
        DerivMode::Full { t } => {
            if state.u <= FULL_MODE_MIN_U {
                return Err(EngineError::FullModeSingular { u: state.u });
            }
            // alpha(t) gamma = (G g/4) e^{i(theta - 2 w t)}; only the phase
            // difference to phi enters.
            let pump = 0.25 * gamma * g_t;
            let rel = state.phi - params.theta + 2.0 * params.omega * t;
            let du = 2.0 * pump * rel.sin() - decay;
            let dphi = -2.0 * params.omega
                + 4.0 * pump * ((2.0 * state.u).cosh() / (2.0 * state.u).sinh()) * rel.cos();
            Ok(StsDerivatives { dn_th, du, dphi })
        }
    }
}

/// Integrator settings and step statistics attached to a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub tol: Tolerances,
    pub stats: StepStats,
}

/// Time-ordered record of the state and derived observables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub records: Vec<ObservableRecord>,
    pub params: ModelParams,
    pub envelope: PumpEnvelope,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    /// Largest total photon number along the trajectory.
    pub fn max_n(&self) -> f64 {
        self.records.iter().map(|r| r.n).fold(0.0, f64::max)
    }

    pub fn last(&self) -> &ObservableRecord {
        self.records.last().expect("trajectory has at least two records")
    }
}

fn check_grid(t_grid: &[f64]) -> Result<(), EngineError> {
    let ok = t_grid.len() >= 2
        && t_grid[0] == 0.0
        && t_grid.iter().all(|t| t.is_finite())
        && t_grid.windows(2).all(|w| w[1] > w[0]);
    if ok {
        Ok(())
    } else {
        Err(EngineError::InvalidGrid)
    }
}

/// Uniform output grid `0, dt, 2 dt, ..` covering `[0, t_max]`.
pub fn time_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt).round().max(1.0) as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}

/// Integrate the reduced system from `initial` and fill derived observables
/// at every grid time. The phase column is analytic:
/// `phi(t) = theta + pi/2 - 2 w t`.
pub fn integrate(
    initial: &StsState,
    params: &ModelParams,
    env: &PumpEnvelope,
    t_grid: &[f64],
    tol: Tolerances,
) -> Result<Trajectory, EngineError> {
    check_grid(t_grid)?;
    let gamma = params.gamma_decay;
    let n_b = params.n_b;
    let w_b = 2.0 * n_b + 1.0;
    let rhs = |t: f64, y: &[f64; 2]| {
        let (n_th, u) = (y[0], y[1]);
        let g = env.eval_g(gamma * t);
        let s = u.sinh();
        [
            gamma * (n_b * (2.0 * u).cosh() + s * s - n_th),
            0.5 * gamma * (g - (2.0 * u).sinh() * w_b / (2.0 * n_th + 1.0)),
        ]
    };
    let (ys, stats) = ode::integrate_dense(rhs, [initial.n_th, initial.u], t_grid, tol)?;
    let records = t_grid
        .iter()
        .zip(&ys)
        .map(|(&t, y)| {
            let state = StsState {
                // integrator noise can undershoot the u = 0 / n_th = 0 floors
                u: y[1].max(0.0),
                phi: params.phi0() - 2.0 * params.omega * t,
                n_th: y[0].max(0.0),
            };
            ObservableRecord::from_state(t, env.eval_g(gamma * t), &state)
        })
        .collect();
    Ok(Trajectory {
        records,
        params: *params,
        envelope: env.clone(),
        meta: TrajectoryMeta { tol, stats },
    })
}

/// Trajectory of the auxiliary zero-bath system `(n_th0, u)`.
///
/// Its dynamics never read the bath population, so `u(t)` is literally
/// independent of `n_b`; [`Nth0Trajectory::to_trajectory`] maps back to the
/// physical `n_th` through `2 n_th + 1 = (2 n_b + 1)(2 n_th0 + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Nth0Trajectory {
    pub times: Vec<f64>,
    pub n_th0: Vec<f64>,
    pub u: Vec<f64>,
    pub params: ModelParams,
    pub envelope: PumpEnvelope,
    pub meta: TrajectoryMeta,
}

impl Nth0Trajectory {
    pub fn to_trajectory(&self) -> Result<Trajectory, EngineError> {
        let records = self
            .times
            .iter()
            .zip(self.n_th0.iter().zip(&self.u))
            .map(|(&t, (&n0, &u))| {
                let n_th = sts::nth_from_nth0(n0, self.params.n_b)?;
                let state = StsState {
                    u: u.max(0.0),
                    phi: self.params.phi0() - 2.0 * self.params.omega * t,
                    n_th: n_th.max(0.0),
                };
                Ok(ObservableRecord::from_state(
                    t,
                    self.envelope.eval_g(self.params.gamma_decay * t),
                    &state,
                ))
            })
            .collect::<Result<Vec<_>, EngineError>>()?;
        Ok(Trajectory {
            records,
            params: self.params,
            envelope: self.envelope.clone(),
            meta: self.meta,
        })
    }
}

/// Integrate the bath-independent system
/// `dn_th0/dt = G [sinh^2(u) - n_th0]`, `du/dt = G g/2 - G sinh(2u) / (2 (2 n_th0 + 1))`.
pub fn integrate_reduced_nth0(
    initial_nth0: f64,
    params: &ModelParams,
    env: &PumpEnvelope,
    t_grid: &[f64],
    tol: Tolerances,
) -> Result<Nth0Trajectory, EngineError> {
    if 2.0 * initial_nth0 + 1.0 <= 0.0 {
        return Err(EngineError::Model(ModelError::Nth0OutOfDomain(initial_nth0)));
    }
    check_grid(t_grid)?;
    let gamma = params.gamma_decay;
    let rhs = |t: f64, y: &[f64; 2]| {
        let (n0, u) = (y[0], y[1]);
        let g = env.eval_g(gamma * t);
        let s = u.sinh();
        [
            gamma * (s * s - n0),
            0.5 * gamma * (g - (2.0 * u).sinh() / (2.0 * n0 + 1.0)),
        ]
    };
    // the reduced-nth0 form starts unsqueezed by construction
    let (ys, stats) = ode::integrate_dense(rhs, [initial_nth0, 0.0], t_grid, tol)?;
    Ok(Nth0Trajectory {
        times: t_grid.to_vec(),
        n_th0: ys.iter().map(|y| y[0]).collect(),
        u: ys.iter().map(|y| y[1]).collect(),
        params: *params,
        envelope: env.clone(),
        meta: TrajectoryMeta { tol, stats },
    })
}

/// Constant-pump steady state. Everything except `dx2_min` diverges at and
/// above critical pumping and is reported as `None` there; `g2_ss` is also
/// `None` for a vanishing steady population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub g0: f64,
    pub n_b: f64,
    /// Squeezed-quadrature limit `(2 n_b + 1)/(1 + g0)`, valid for all `g0`.
    pub dx2_min: f64,
    pub u_ss: Option<f64>,
    pub n_th_ss: Option<f64>,
    pub n_ss: Option<f64>,
    pub dy2_max: Option<f64>,
    pub g2_ss: Option<f64>,
}

pub fn steady_state(g0: f64, params: &ModelParams) -> Result<SteadyState, EngineError> {
    if !g0.is_finite() || g0 < 0.0 {
        return Err(EngineError::InvalidPumpRatio(g0));
    }
    let n_b = params.n_b;
    let w = 2.0 * n_b + 1.0;
    let dx2_min = w / (1.0 + g0);
    if g0 >= 1.0 {
        return Ok(SteadyState {
            g0,
            n_b,
            dx2_min,
            u_ss: None,
            n_th_ss: None,
            n_ss: None,
            dy2_max: None,
            g2_ss: None,
        });
    }
    let u_ss = 0.5 * g0.atanh();
    let s = u_ss.sinh();
    let n_th_ss = n_b + s * s * w;
    let n_ss = (2.0 * n_b + g0 * g0) / (2.0 * (1.0 - g0 * g0));
    let g2_ss = if n_ss > 0.0 {
        Some(2.0 + (w * g0 / (2.0 * n_b + g0 * g0)).powi(2))
    } else {
        None
    };
    Ok(SteadyState {
        g0,
        n_b,
        dx2_min,
        u_ss: Some(u_ss),
        n_th_ss: Some(n_th_ss),
        n_ss: Some(n_ss),
        dy2_max: Some(w / (1.0 - g0)),
        g2_ss,
    })
}

/// `(1 - e^{-x}) / x`, continuous through `x = 0`.
fn em1(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// Exact constant-pump quadrature variances at time `t` from initial values
/// `(dx2_0, dy2_0)`:
///
/// ```text
/// dX^2(t) = A_x + (dX^2(0) - A_x) e^{-G(1+g0)t},   A_x = (2 n_b + 1)/(1 + g0)
/// dY^2(t) = A_y + (dY^2(0) - A_y) e^{-G(1-g0)t},   A_y = (2 n_b + 1)/(1 - g0)
/// ```
///
/// Evaluated in a form that is regular at `g0 = 1`, where the `dY^2` branch
/// degenerates to linear growth `dY^2(0) + G (2 n_b + 1) t`.
pub fn quad_closed_form_constant(
    g0: f64,
    params: &ModelParams,
    dx2_0: f64,
    dy2_0: f64,
    t: f64,
) -> Result<(f64, f64), EngineError> {
    if !g0.is_finite() || g0 < 0.0 {
        return Err(EngineError::InvalidPumpRatio(g0));
    }
    let gamma = params.gamma_decay;
    let w = 2.0 * params.n_b + 1.0;
    let xx = gamma * (1.0 + g0) * t;
    let xy = gamma * (1.0 - g0) * t;
    let dx2 = dx2_0 * (-xx).exp() + w * gamma * t * em1(xx);
    let dy2 = dy2_0 * (-xy).exp() + w * gamma * t * em1(xy);
    Ok((dx2, dy2))
}

/// Which quadrature the general closed form solves for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadBranch {
    /// `dX^2`: coefficient `1 + g(t)`.
    Squeezed,
    /// `dY^2`: obtained by the substitution `g(t) -> -g(t)`.
    AntiSqueezed,
}

/// Closed-form solution of the quadrature equation for an arbitrary envelope,
/// evaluated on `t_grid` starting from `v0` at `t_grid[0]`.
///
/// The literal solution involves `q(t) = exp(G \int (1 + g) dt)`, which
/// overflows for long horizons; instead each interval is advanced by the
/// exact propagator of the linear equation with the envelope frozen at the
/// substep midpoint, which is algebraically identical for constant pumps and
/// second-order accurate otherwise.
pub fn quad_closed_form_general(
    env: &PumpEnvelope,
    params: &ModelParams,
    v0: f64,
    t_grid: &[f64],
    branch: QuadBranch,
) -> Result<Vec<f64>, EngineError> {
    if t_grid.len() < 2
        || t_grid.iter().any(|t| !t.is_finite())
        || t_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(EngineError::InvalidGrid);
    }
    let gamma = params.gamma_decay;
    let w = 2.0 * params.n_b + 1.0;
    let sign = match branch {
        QuadBranch::Squeezed => 1.0,
        QuadBranch::AntiSqueezed => -1.0,
    };
    let exact_per_step = matches!(env.shape, crate::pump::PumpShape::Constant { .. });

    let mut out = Vec::with_capacity(t_grid.len());
    let mut v = v0;
    out.push(v);
    for pair in t_grid.windows(2) {
        let (t0, t1) = (pair[0], pair[1]);
        let n_sub = if exact_per_step {
            1
        } else {
            ((gamma * (t1 - t0) / QUAD_SUBSTEP).ceil() as usize).max(1)
        };
        let h = (t1 - t0) / n_sub as f64;
        for k in 0..n_sub {
            let tm = t0 + (k as f64 + 0.5) * h;
            let lam = gamma * (1.0 + sign * env.eval_g(gamma * tm));
            let x = lam * h;
            v = v * (-x).exp() + w * gamma * h * em1(x);
        }
        out.push(v);
    }
    Ok(out)
}

/// Anti-squeezing at the moment the squeezed quadrature first reaches the
/// vacuum level, for an equilibrium start under a constant pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdAntiSqueeze {
    /// Time at which `dX^2 = 1`.
    pub tau1: f64,
    /// `dY^2(tau1)` from the closed-form expression
    /// `(2 n_b + 1)/(1 - g0) [1 - ((g0 - 2 n_b)/(g0 (2 n_b + 1)))^{(1-g0)/(1+g0)}]`.
    pub dy2: f64,
}

pub fn anti_squeeze_at_threshold(
    g0: f64,
    params: &ModelParams,
) -> Result<ThresholdAntiSqueeze, EngineError> {
    if !g0.is_finite() || g0 < 0.0 {
        return Err(EngineError::InvalidPumpRatio(g0));
    }
    let n_b = params.n_b;
    if n_b <= 0.0 {
        return Err(EngineError::RequiresPositiveBath);
    }
    if g0 <= 2.0 * n_b {
        return Err(EngineError::NoThreshold { g0, n_b });
    }
    let w = 2.0 * n_b + 1.0;
    // e^{-G(1+g0) tau1} solved from dX^2(tau1) = 1
    let e = (g0 - 2.0 * n_b) / (g0 * w);
    let tau1 = -e.ln() / (params.gamma_decay * (1.0 + g0));
    let expo = (1.0 - g0) / (1.0 + g0);
    let dy2 = if g0 == 1.0 {
        // removable 0/0: limit is w * (-ln e)/(1 + g0)
        w * (-e.ln()) / (1.0 + g0)
    } else {
        w * (-(expo * e.ln()).exp_m1()) / (1.0 - g0)
    };
    Ok(ThresholdAntiSqueeze { tau1, dy2 })
}

/// Interior maximum of the coherence transient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G2Peak {
    pub tau_p: f64,
    pub g2_peak: f64,
}

/// Locate the peak of `g2(t)` for a constant pump from an equilibrium start.
///
/// Returns `None` when the coherence approaches its steady-state value
/// monotonically (no interior maximum above the [`G2_PEAK_EXCESS`] excess).
/// The discrete argmax on the output grid is refined by three-point parabolic
/// interpolation.
pub fn g2_peak_time(
    g0: f64,
    params: &ModelParams,
    horizon: f64,
    dt_out: f64,
) -> Result<Option<G2Peak>, EngineError> {
    let ss = steady_state(g0, params)?;
    let g2_ss = match (ss.u_ss, ss.g2_ss) {
        (None, _) => return Err(EngineError::NoSteadyState(g0)),
        (_, Some(v)) => v,
        // unpumped vacuum: g2 undefined for all time
        (_, None) => return Ok(None),
    };
    let env = PumpEnvelope::constant(g0, params.theta).expect("validated g0");
    let initial = StsState::thermal(params.n_b)?;
    let grid = time_grid(horizon, dt_out);
    let traj = integrate(&initial, params, &env, &grid, Tolerances::default())?;

    let g2: Vec<Option<f64>> = traj.records.iter().map(|r| r.g2).collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in g2.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    let Some((im, g2_max)) = best else {
        return Ok(None);
    };
    if g2_max <= g2_ss * (1.0 + G2_PEAK_EXCESS) {
        return Ok(None);
    }

    let mut tau_p = traj.records[im].t;
    let mut g2_peak = g2_max;
    if im > 0 && im + 1 < g2.len() {
        if let (Some(ym), Some(yp)) = (g2[im - 1], g2[im + 1]) {
            let curv = ym - 2.0 * g2_max + yp;
            if curv < 0.0 {
                let delta = 0.5 * (ym - yp) / curv;
                tau_p += delta * dt_out;
                g2_peak = g2_max - 0.25 * (ym - yp) * delta;
            }
        }
    }
    Ok(Some(G2Peak { tau_p, g2_peak }))
}

/// Pump-free thermal relaxation, `n_th(t) = n_b + (n_th(0) - n_b) e^{-G t}`.
pub fn thermal_relaxation(n_th_0: f64, params: &ModelParams, t: f64) -> f64 {
    params.n_b + (n_th_0 - params.n_b) * (-params.gamma_decay * t).exp()
}
