//! Cross-module consistency properties: the same physical quantity computed
//! through independent routes must agree.

use squeeze_core::analytic::{
    integrate, quad_closed_form_general, time_grid, QuadBranch,
};
use squeeze_core::ode::Tolerances;
use squeeze_core::pump::PumpEnvelope;
use squeeze_core::sts::{ModelParams, StsState};

fn params(n_b: f64) -> ModelParams {
    ModelParams::new(1.0, n_b, 0.0, -std::f64::consts::FRAC_PI_2).unwrap()
}

/// `e^{-2u}(2 n_th + 1)` from the coupled state equations and the direct
/// closed-form quadrature solution are two independent computations of
/// `dX^2(t)`; they must agree on a shared grid.
#[test]
fn state_equations_and_quadrature_solution_agree() {
    let grid = time_grid(6.0, 0.01);
    let cases: Vec<(ModelParams, PumpEnvelope)> = vec![
        (params(0.5), PumpEnvelope::constant(0.8, params(0.5).theta).unwrap()),
        (
            params(1.0),
            PumpEnvelope::gaussian(5.0, std::f64::consts::FRAC_1_SQRT_2, 2.5, params(1.0).theta)
                .unwrap(),
        ),
        (params(0.0), PumpEnvelope::constant(0.3, params(0.0).theta).unwrap()),
    ];
    for (p, env) in cases {
        let init = StsState::thermal(p.n_b).unwrap();
        let traj = integrate(&init, &p, &env, &grid, Tolerances::default()).unwrap();
        let w = 2.0 * p.n_b + 1.0;
        let xs = quad_closed_form_general(&env, &p, w, &grid, QuadBranch::Squeezed).unwrap();
        let ys = quad_closed_form_general(&env, &p, w, &grid, QuadBranch::AntiSqueezed).unwrap();
        let mut worst = 0.0_f64;
        for ((r, x), y) in traj.records.iter().zip(&xs).zip(&ys) {
            worst = worst.max((r.dx2 - x).abs() / x);
            worst = worst.max((r.dy2 - y).abs() / y);
        }
        assert!(
            worst < 1e-6,
            "representations disagree by {worst:.3e} for n_b = {}",
            p.n_b
        );
    }
}

/// The uncertainty product along a trajectory never drops below 1, with
/// equality only for a pure squeezed vacuum (n_th = 0).
#[test]
fn uncertainty_product_respects_the_heisenberg_floor() {
    let grid = time_grid(8.0, 0.02);
    for (g0, n_b, nth0) in [
        (0.8, 0.5, 0.5),
        (0.8, 0.0, 0.0),
        (0.3, 2.0, 0.1),
        (1.2, 0.0, 0.0),
        (0.0, 0.0, 0.0),
    ] {
        let p = params(n_b);
        let env = PumpEnvelope::constant(g0, p.theta).unwrap();
        let init = StsState::thermal(nth0).unwrap();
        let traj = integrate(&init, &p, &env, &grid, Tolerances::default()).unwrap();
        for r in &traj.records {
            let product = r.dx2 * r.dy2;
            assert!(
                product >= 1.0 - 1e-9,
                "product {product} below floor at t = {} (g0={g0}, n_b={n_b})",
                r.t
            );
            if r.n_th > 1e-6 {
                assert!(product > 1.0);
            }
        }
    }
}

/// The pump-free trajectory stays an unsqueezed thermal state, so both
/// quadratures track `2 n_th(t) + 1` exactly.
#[test]
fn unpumped_trajectory_keeps_symmetric_quadratures() {
    let p = params(0.5);
    let env = PumpEnvelope::constant(0.0, p.theta).unwrap();
    let init = StsState::thermal(2.0).unwrap();
    let traj = integrate(&init, &p, &env, &time_grid(6.0, 0.05), Tolerances::default()).unwrap();
    for r in &traj.records {
        assert_eq!(r.u, 0.0);
        assert!((r.dx2 - (2.0 * r.n_th + 1.0)).abs() < 1e-12);
        assert!((r.dx2 - r.dy2).abs() < 1e-12);
    }
}
