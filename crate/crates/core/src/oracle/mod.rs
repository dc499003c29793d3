//! Brute-force verification of the closed-form solution: the Lindblad master
//! equation integrated directly on a truncated Fock space.
//!
//! The density matrix is evolved with classical fixed-step fourth-order
//! Runge–Kutta; the generator is applied through the band structure of the
//! ladder operators, so one evaluation costs `O(dim^2)`. Hermiticity, trace,
//! positivity and truncation-tail invariants are checked at every output
//! time and any breach aborts the run with diagnostics.

mod fock;
mod lindblad;
mod squeeze;

pub use fock::{ladder_ops, trace_distance, FockDensityMatrix, Observables};
pub use lindblad::lindblad_rhs;
pub use squeeze::construct_sts_density;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::analytic::{self, EngineError};
use crate::ode::Tolerances;
use crate::pump::PumpEnvelope;
use crate::sts::{ModelParams, StsState};

/// Candidate truncation dimensions, smallest first.
pub const DIM_LADDER: [usize; 7] = [20, 30, 40, 60, 80, 120, 160];

/// Default bound on the population of the top 10% of Fock levels.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

/// Default fixed step in units of `G t`.
pub const DEFAULT_SCALED_STEP: f64 = 1e-3;

const HERMITICITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;
const POSITIVITY_TOL: f64 = -1e-8;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("truncation dimension must be >= 2, got {0}")]
    InvalidDimension(usize),
    #[error("density matrices have different dimensions ({a} vs {b})")]
    DimensionMismatch { a: usize, b: usize },
    #[error("thermal population must be finite and >= 0, got {0}")]
    InvalidThermalPopulation(f64),
    #[error("matrix is not Hermitian (max |rho - rho^dag| = {defect:.3e})")]
    Hermiticity { defect: f64 },
    #[error("trace drifted to {trace} (|trace - 1| > {TRACE_TOL})")]
    TraceDrift { trace: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    Positivity { min_eigenvalue: f64 },
    #[error(
        "tail mass {tail_mass:.3e} exceeds tolerance {tol:.3e}; retry with dim >= {suggested_dim}"
    )]
    TruncationOverflow { tail_mass: f64, tol: f64, suggested_dim: usize },
    #[error("truncated basis cannot represent the requested state: {0}")]
    TruncationInadequate(String),
    #[error("required dimension {required} exceeds the ladder maximum {max}; shorten the horizon")]
    ExceedsMaximumDim { required: usize, max: usize },
    #[error("output grid must increase strictly")]
    InvalidGrid,
    #[error("at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<OracleError>,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl OracleError {
    fn at(self, t: f64) -> Self {
        OracleError::AtTime { t, source: Box::new(self) }
    }
}

/// Observables and sanity diagnostics at one output time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleRecord {
    pub t: f64,
    pub n: f64,
    pub dx2: f64,
    pub dy2: f64,
    pub g2: Option<f64>,
    pub purity: f64,
    pub trace: f64,
    /// `None` when the positivity check is disabled.
    pub min_eigenvalue: Option<f64>,
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleMeta {
    pub dim: usize,
    /// Fixed step in units of `G t`.
    pub scaled_step: f64,
    /// Max elementwise difference between the full-step and half-step runs
    /// at the final time; `None` when the estimate was not requested.
    pub richardson_error: Option<f64>,
}

/// Result of one master-equation evolution.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub params: ModelParams,
    pub envelope: PumpEnvelope,
    pub dim: usize,
    pub records: Vec<OracleRecord>,
    /// Stored density matrices at the requested snapshot times.
    pub snapshots: Vec<(f64, FockDensityMatrix)>,
    pub meta: OracleMeta,
}

/// Knobs for [`evolve`].
#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Fixed Runge-Kutta step in units of `G t`.
    pub scaled_step: f64,
    /// Bound on the population of the top 10% of Fock levels.
    pub tail_tol: f64,
    /// Diagonalize at every output time to monitor the smallest eigenvalue.
    pub check_positivity: bool,
    /// Repeat the run at half the step and report the difference in meta.
    pub richardson: bool,
    /// Grid times at which the full density matrix is stored.
    pub snapshot_times: Vec<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            scaled_step: DEFAULT_SCALED_STEP,
            tail_tol: DEFAULT_TAIL_TOL,
            check_positivity: true,
            richardson: true,
            snapshot_times: Vec::new(),
        }
    }
}

fn next_ladder_dim(dim: usize) -> usize {
    DIM_LADDER
        .iter()
        .copied()
        .find(|&d| d > dim)
        .unwrap_or(dim * 2)
}

/// Integrate the master equation from `rho0`, recording observables at every
/// grid time. Quadratures are evaluated at the local-oscillator phase
/// `beta(t) = omega t`, which reduces to fixed quadratures in the rotating
/// frame (`omega = 0`).
pub fn evolve(
    rho0: &FockDensityMatrix,
    params: &ModelParams,
    env: &PumpEnvelope,
    t_grid: &[f64],
    options: &EvolveOptions,
) -> Result<OracleRun, OracleError> {
    if t_grid.len() < 2
        || t_grid.iter().any(|t| !t.is_finite())
        || t_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(OracleError::InvalidGrid);
    }
    rho0.validate(options.tail_tol)
        .map_err(|e| e.at(t_grid[0]))?;

    let dim = rho0.dim();
    let mut rho = rho0.matrix().clone();
    let mut records = Vec::with_capacity(t_grid.len());
    let mut snapshots = Vec::new();

    let mut observe = |t: f64, rho: &DMatrix<Complex64>| -> Result<(), OracleError> {
        let fdm = FockDensityMatrix::from_matrix_unchecked(rho.clone());

        let defect = fdm.hermiticity_defect();
        if defect > HERMITICITY_TOL {
            return Err(OracleError::Hermiticity { defect }.at(t));
        }
        let trace = fdm.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(OracleError::TraceDrift { trace }.at(t));
        }
        let tail_mass = fdm.tail_mass();
        if tail_mass > options.tail_tol {
            return Err(OracleError::TruncationOverflow {
                tail_mass,
                tol: options.tail_tol,
                suggested_dim: next_ladder_dim(dim),
            }
            .at(t));
        }
        let min_eigenvalue = if options.check_positivity {
            let lam = fdm.min_eigenvalue();
            if lam < POSITIVITY_TOL {
                return Err(OracleError::Positivity { min_eigenvalue: lam }.at(t));
            }
            Some(lam)
        } else {
            None
        };

        let obs = fdm.observables(params.omega * t);
        records.push(OracleRecord {
            t,
            n: obs.n,
            dx2: obs.dx2,
            dy2: obs.dy2,
            g2: obs.g2,
            purity: obs.purity,
            trace,
            min_eigenvalue,
            tail_mass,
        });
        if options
            .snapshot_times
            .iter()
            .any(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
        {
            snapshots.push((t, fdm));
        }
        Ok(())
    };

    observe(t_grid[0], &rho)?;
    propagate(&mut rho, params, env, t_grid, options.scaled_step, &mut |t, r| observe(t, r))?;

    let richardson_error = if options.richardson {
        let mut rho_half = rho0.matrix().clone();
        propagate(
            &mut rho_half,
            params,
            env,
            t_grid,
            options.scaled_step / 2.0,
            &mut |_, _| Ok(()),
        )?;
        Some(
            rho.iter()
                .zip(rho_half.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        )
    } else {
        None
    };

    Ok(OracleRun {
        params: *params,
        envelope: env.clone(),
        dim,
        records,
        snapshots,
        meta: OracleMeta { dim, scaled_step: options.scaled_step, richardson_error },
    })
}

type GridObserver<'a> = &'a mut dyn FnMut(f64, &DMatrix<Complex64>) -> Result<(), OracleError>;

/// Fixed-step RK4 over the grid, invoking `on_grid` after reaching each grid
/// time past the first.
fn propagate(
    rho: &mut DMatrix<Complex64>,
    params: &ModelParams,
    env: &PumpEnvelope,
    t_grid: &[f64],
    scaled_step: f64,
    on_grid: GridObserver,
) -> Result<(), OracleError> {
    let dim = rho.nrows();
    let h_target = scaled_step / params.gamma_decay;
    let mut k1 = DMatrix::zeros(dim, dim);
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut stage = k1.clone();

    for pair in t_grid.windows(2) {
        let (t0, t1) = (pair[0], pair[1]);
        let n_sub = ((t1 - t0) / h_target).ceil().max(1.0) as usize;
        let h = (t1 - t0) / n_sub as f64;
        for k in 0..n_sub {
            let t = t0 + k as f64 * h;
            lindblad::rhs_into(rho, t, params, env, &mut k1);
            stage_sum(&mut stage, rho, 0.5 * h, &k1);
            lindblad::rhs_into(&stage, t + 0.5 * h, params, env, &mut k2);
            stage_sum(&mut stage, rho, 0.5 * h, &k2);
            lindblad::rhs_into(&stage, t + 0.5 * h, params, env, &mut k3);
            stage_sum(&mut stage, rho, h, &k3);
            lindblad::rhs_into(&stage, t + h, params, env, &mut k4);
            let w = h / 6.0;
            for (((r, a), (b, c)), d) in rho
                .iter_mut()
                .zip(k1.iter())
                .zip(k2.iter().zip(k3.iter()))
                .zip(k4.iter())
            {
                *r += w * (a + 2.0 * b + 2.0 * c + d);
            }
        }
        on_grid(t1, rho)?;
    }
    Ok(())
}

fn stage_sum(
    out: &mut DMatrix<Complex64>,
    base: &DMatrix<Complex64>,
    h: f64,
    k: &DMatrix<Complex64>,
) {
    for ((o, b), kk) in out.iter_mut().zip(base.iter()).zip(k.iter()) {
        *o = b + h * kk;
    }
}

/// Pick the smallest ladder dimension that keeps the truncation tail below
/// `tail_tol` over `[0, horizon]`, starting from a thermal state with
/// population `initial_n_th`.
///
/// The starting candidate comes from the closed-form trajectory: the ladder
/// search begins at `ceil(10 (n_max + 1))` and each candidate is validated by
/// a trial evolution.
pub fn auto_dim(
    initial_n_th: f64,
    params: &ModelParams,
    env: &PumpEnvelope,
    horizon: f64,
    tail_tol: f64,
) -> Result<usize, OracleError> {
    let max_dim = *DIM_LADDER.last().unwrap();
    let initial = StsState::thermal(initial_n_th).map_err(EngineError::from)?;
    let grid = analytic::time_grid(horizon, horizon / 300.0);
    let traj = analytic::integrate(&initial, params, env, &grid, Tolerances::default())?;
    let n_max = traj.max_n().max(initial_n_th);
    let required = (10.0 * (n_max + 1.0)).ceil() as usize;
    if required > max_dim {
        return Err(OracleError::ExceedsMaximumDim { required, max: max_dim });
    }

    let trial_options = EvolveOptions {
        tail_tol,
        check_positivity: false,
        richardson: false,
        ..EvolveOptions::default()
    };
    for &dim in DIM_LADDER.iter().filter(|&&d| d >= required) {
        let rho0 = FockDensityMatrix::thermal(initial_n_th, dim)?;
        match evolve(&rho0, params, env, &grid, &trial_options) {
            Ok(_) => return Ok(dim),
            Err(OracleError::AtTime { source, .. })
                if matches!(*source, OracleError::TruncationOverflow { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Err(OracleError::ExceedsMaximumDim { required: max_dim + 1, max: max_dim })
}
