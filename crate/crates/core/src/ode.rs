//! Adaptive Dormand–Prince 5(4) integrator with dense output.
//!
//! The embedded pair gives a 5th-order solution with a 4th-order error
//! estimate; output values at requested grid times are produced by the
//! standard 4th-order continuous extension, so grid resolution never
//! constrains the step size. The state is a fixed-size array, which is all
//! the reduced squeezed-thermal-state systems (1–3 equations) need.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OdeError {
    #[error("output grid must contain at least two strictly increasing times")]
    InvalidGrid,
    #[error("tolerances must be finite and positive (rtol {rtol}, atol {atol})")]
    InvalidTolerances { rtol: f64, atol: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("step limit of {0} exceeded")]
    TooManySteps(usize),
}

/// Relative/absolute error tolerances for the adaptive step controller.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

/// Step statistics of one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const MAX_STEPS: usize = 10_000_000;

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// b_i - bhat_i (5th-order weights minus the embedded 4th-order weights).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Coefficients of the 4th-order continuous extension.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate `dy/dt = f(t, y)` and report the solution at every grid time.
///
/// `t_grid` must be strictly increasing; `t_grid[0]` is the initial time and
/// the returned vector holds one state per grid entry (the first is `y0`).
pub fn integrate_dense<const N: usize, F>(
    mut f: F,
    y0: [f64; N],
    t_grid: &[f64],
    tol: Tolerances,
) -> Result<(Vec<[f64; N]>, StepStats), OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OdeError::InvalidGrid);
    }
    if !(tol.rtol.is_finite() && tol.rtol > 0.0 && tol.atol.is_finite() && tol.atol > 0.0) {
        return Err(OdeError::InvalidTolerances { rtol: tol.rtol, atol: tol.atol });
    }

    let t0 = t_grid[0];
    let t_end = *t_grid.last().unwrap();
    let mut stats = StepStats::default();

    let mut out = Vec::with_capacity(t_grid.len());
    out.push(y0);
    let mut next_out = 1;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.rhs_evals += 1;

    let mut h = initial_step(&mut f, t0, &y0, &k1, tol, t_end - t0, &mut stats);
    let mut rejected_last = false;

    while next_out < t_grid.len() {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(OdeError::TooManySteps(MAX_STEPS));
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(1e-300) {
            return Err(OdeError::StepSizeUnderflow { t });
        }
        if t + h > t_end {
            h = t_end - t;
        }

        let k2 = f(t + C[1] * h, &axpy(&y, h, &[(A[0][0], &k1)]));
        let k3 = f(t + C[2] * h, &axpy(&y, h, &[(A[1][0], &k1), (A[1][1], &k2)]));
        let k4 = f(
            t + C[3] * h,
            &axpy(&y, h, &[(A[2][0], &k1), (A[2][1], &k2), (A[2][2], &k3)]),
        );
        let k5 = f(
            t + C[4] * h,
            &axpy(&y, h, &[(A[3][0], &k1), (A[3][1], &k2), (A[3][2], &k3), (A[3][3], &k4)]),
        );
        let k6 = f(
            t + C[5] * h,
            &axpy(
                &y,
                h,
                &[(A[4][0], &k1), (A[4][1], &k2), (A[4][2], &k3), (A[4][3], &k4), (A[4][4], &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h,
            &[(A[5][0], &k1), (A[5][2], &k3), (A[5][3], &k4), (A[5][4], &k5), (A[5][5], &k6)],
        );
        let k7 = f(t + h, &y_new);
        stats.rhs_evals += 6;

        let ks = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
        let mut err_sq = 0.0;
        for i in 0..N {
            let e: f64 = (0..7).map(|s| E[s] * ks[s][i]).sum();
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            let r = h * e / sc;
            err_sq += r * r;
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            // Dense output for grid points inside (t, t + h].
            while next_out < t_grid.len() && t_grid[next_out] <= t + h {
                let theta = (t_grid[next_out] - t) / h;
                out.push(interpolate(&y, &y_new, h, &ks, theta));
                next_out += 1;
            }
            t += h;
            y = y_new;
            k1 = k7; // FSAL
            stats.accepted += 1;

            let facmax = if rejected_last { 1.0 } else { 5.0 };
            h *= clamp_factor(err, 0.2, facmax);
            rejected_last = false;
        } else {
            stats.rejected += 1;
            h *= clamp_factor(err, 0.2, 1.0);
            rejected_last = true;
        }
    }

    Ok((out, stats))
}

fn clamp_factor(err: f64, facmin: f64, facmax: f64) -> f64 {
    let fac = 0.9 * err.powf(-0.2);
    fac.clamp(facmin, facmax)
}

fn interpolate<const N: usize>(
    y0: &[f64; N],
    y1: &[f64; N],
    h: f64,
    ks: &[&[f64; N]; 7],
    theta: f64,
) -> [f64; N] {
    let theta1 = 1.0 - theta;
    let mut out = [0.0; N];
    for i in 0..N {
        let dy = y1[i] - y0[i];
        let r1 = y0[i];
        let r2 = dy;
        let r3 = h * ks[0][i] - dy;
        let r4 = dy - h * ks[6][i] - r3;
        let r5: f64 = h * (0..7).map(|s| D[s] * ks[s][i]).sum::<f64>();
        out[i] = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
    }
    out
}

/// Standard cheap starting-step heuristic (Hairer, Nørsett & Wanner).
fn initial_step<const N: usize, F>(
    f: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    tol: Tolerances,
    span: f64,
    stats: &mut StepStats,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let sc = |i: usize| tol.atol + tol.rtol * y0[i].abs();
    let d0 = (0..N).map(|i| (y0[i] / sc(i)).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt();
    let d1 = (0..N).map(|i| (f0[i] / sc(i)).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }.min(span);

    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = f(t0 + h0, &y1);
    stats.rhs_evals += 1;
    let d2 = (0..N)
        .map(|i| ((f1[i] - f0[i]) / sc(i)).powi(2))
        .sum::<f64>()
        .sqrt()
        / (N as f64).sqrt()
        / h0;

    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    h1.min(100.0 * h0).min(span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(t_max: f64, dt: f64) -> Vec<f64> {
        let n = (t_max / dt).round() as usize;
        (0..=n).map(|k| k as f64 * dt).collect()
    }

    #[test]
    fn exponential_decay() {
        let g = grid(10.0, 0.1);
        let (ys, stats) =
            integrate_dense(|_, y: &[f64; 1]| [-y[0]], [1.0], &g, Tolerances::default()).unwrap();
        for (t, y) in g.iter().zip(&ys) {
            assert_abs_diff_eq!(y[0], (-t).exp(), epsilon = 1e-10);
        }
        assert!(stats.accepted > 0);
        assert_eq!(ys.len(), g.len());
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        // y'' = -y as a 2-system; grid points land inside steps.
        let g = grid(20.0, 0.017);
        let tol = Tolerances { rtol: 1e-12, atol: 1e-12 };
        let (ys, _) =
            integrate_dense(|_, y: &[f64; 2]| [y[1], -y[0]], [1.0, 0.0], &g, tol).unwrap();
        for (t, y) in g.iter().zip(&ys) {
            assert_abs_diff_eq!(y[0], t.cos(), epsilon = 1e-9);
            assert_abs_diff_eq!(y[1], -t.sin(), epsilon = 1e-9);
        }
    }

    #[test]
    fn forced_linear_system_hits_tolerance() {
        // y' = cos(t) - y, y(0)=0 => y = (cos t + sin t - e^{-t}) / 2.
        let g = grid(8.0, 0.05);
        let (ys, _) = integrate_dense(
            |t, y: &[f64; 1]| [t.cos() - y[0]],
            [0.0],
            &g,
            Tolerances::default(),
        )
        .unwrap();
        for (t, y) in g.iter().zip(&ys) {
            let exact = 0.5 * (t.cos() + t.sin() - (-t).exp());
            assert_abs_diff_eq!(y[0], exact, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_bad_grids_and_tolerances() {
        let f = |_: f64, y: &[f64; 1]| [-y[0]];
        assert_eq!(
            integrate_dense(f, [1.0], &[0.0], Tolerances::default()).unwrap_err(),
            OdeError::InvalidGrid
        );
        assert_eq!(
            integrate_dense(f, [1.0], &[0.0, 1.0, 1.0], Tolerances::default()).unwrap_err(),
            OdeError::InvalidGrid
        );
        assert_eq!(
            integrate_dense(f, [1.0], &[0.0, 1.0], Tolerances { rtol: 0.0, atol: 1e-8 })
                .unwrap_err(),
            OdeError::InvalidTolerances { rtol: 0.0, atol: 1e-8 }
        );
    }

    #[test]
    fn blow_up_reports_failure() {
        // y' = y^2 with y(0)=1 blows up at t=1; integration to 2 must fail.
        let g = [0.0, 2.0];
        let err = integrate_dense(|_, y: &[f64; 1]| [y[0] * y[0]], [1.0], &g, Tolerances::default())
            .unwrap_err();
        assert!(matches!(err, OdeError::StepSizeUnderflow { .. } | OdeError::TooManySteps(_)));
    }
}
