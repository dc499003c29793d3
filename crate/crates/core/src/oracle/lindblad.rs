//! The master-equation generator,
//!
//! ```text
//! drho/dt = -i [H, rho] + G (n_b + 1) D[b] rho + G n_b D[b^dag] rho,
//! H = w b^dag b + a(t)g b^dag^2 + conj(a(t)g) b^2,
//! a(t)g = (G g(G t)/4) e^{i theta} e^{-2 i w t},
//! ```
//!
//! applied through the band structure of `b`: every term is a diagonal
//! scaling or an index shift, so one evaluation is `O(dim^2)` with no matrix
//! products.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::FockDensityMatrix;
use crate::pump::PumpEnvelope;
use crate::sts::ModelParams;

/// Complex pump product `alpha(t) gamma` reconstructed from the envelope.
pub(crate) fn pump_product(params: &ModelParams, env: &PumpEnvelope, t: f64) -> Complex64 {
    let g = env.eval_g(params.gamma_decay * t);
    let magnitude = 0.25 * params.gamma_decay * g;
    Complex64::from_polar(magnitude, params.theta - 2.0 * params.omega * t)
}

/// Right-hand side of the master equation.
///
/// The result is Hermitian and traceless up to rounding for Hermitian input.
pub fn lindblad_rhs(
    rho: &FockDensityMatrix,
    t: f64,
    params: &ModelParams,
    env: &PumpEnvelope,
) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(rho.dim(), rho.dim());
    rhs_into(rho.matrix(), t, params, env, &mut out);
    out
}

pub(crate) fn rhs_into(
    rho: &DMatrix<Complex64>,
    t: f64,
    params: &ModelParams,
    env: &PumpEnvelope,
    out: &mut DMatrix<Complex64>,
) {
    let d = rho.nrows();
    let w = pump_product(params, env, t);
    let wc = w.conj();
    let i_unit = Complex64::I;
    let gamma = params.gamma_decay;
    let g_down = gamma * (params.n_b + 1.0);
    let g_up = gamma * params.n_b;
    let omega = params.omega;

    // (b b^dag)_kk in the truncated basis: k+1 below the top level, 0 there.
    let bbd = |k: usize| if k + 1 < d { (k + 1) as f64 } else { 0.0 };

    for j in 0..d {
        for i in 0..d {
            let r = rho[(i, j)];
            let mut acc = Complex64::ZERO;

            // -i w [N, rho]
            if omega != 0.0 {
                acc -= i_unit * omega * (i as f64 - j as f64) * r;
            }

            // -i ( w [b^dag^2, rho] + conj(w) [b^2, rho] )
            if w != Complex64::ZERO {
                let mut h = Complex64::ZERO;
                if i >= 2 {
                    h += w * (((i - 1) * i) as f64).sqrt() * rho[(i - 2, j)];
                }
                if j + 2 < d {
                    h -= w * (((j + 1) * (j + 2)) as f64).sqrt() * rho[(i, j + 2)];
                }
                if i + 2 < d {
                    h += wc * (((i + 1) * (i + 2)) as f64).sqrt() * rho[(i + 2, j)];
                }
                if j >= 2 {
                    h -= wc * ((j * (j - 1)) as f64).sqrt() * rho[(i, j - 2)];
                }
                acc -= i_unit * h;
            }

            // G (n_b + 1) ( b rho b^dag - {N, rho}/2 )
            let mut loss = -0.5 * ((i + j) as f64) * r;
            if i + 1 < d && j + 1 < d {
                loss += (((i + 1) * (j + 1)) as f64).sqrt() * rho[(i + 1, j + 1)];
            }
            acc += g_down * loss;

            // G n_b ( b^dag rho b - {b b^dag, rho}/2 )
            if g_up != 0.0 {
                let mut gain = -0.5 * (bbd(i) + bbd(j)) * r;
                if i >= 1 && j >= 1 {
                    gain += ((i * j) as f64).sqrt() * rho[(i - 1, j - 1)];
                }
                acc += g_up * gain;
            }

            out[(i, j)] = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ladder_ops;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(n_b: f64, omega: f64) -> ModelParams {
        ModelParams::new(1.0, n_b, omega, 0.4).unwrap()
    }

    /// Same generator via explicit matrix products, for cross-checking the
    /// banded evaluation.
    fn dense_rhs(
        rho: &DMatrix<Complex64>,
        t: f64,
        p: &ModelParams,
        env: &PumpEnvelope,
    ) -> DMatrix<Complex64> {
        let d = rho.nrows();
        let (b, bd) = ladder_ops(d);
        let n = &bd * &b;
        let bbd = &b * &bd;
        let w = pump_product(p, env, t);
        let h = n.map(|z| z * Complex64::new(p.omega, 0.0))
            + (&bd * &bd).map(|z| z * w)
            + (&b * &b).map(|z| z * w.conj());
        let comm = &h * rho - rho * &h;
        let half = Complex64::new(0.5, 0.0);
        let diss_down = &b * rho * &bd - (&n * rho + rho * &n).map(|z| z * half);
        let diss_up = &bd * rho * &b - (&bbd * rho + rho * &bbd).map(|z| z * half);
        comm.map(|z| z * Complex64::new(0.0, -1.0))
            + diss_down.map(|z| z * Complex64::new(p.gamma_decay * (p.n_b + 1.0), 0.0))
            + diss_up.map(|z| z * Complex64::new(p.gamma_decay * p.n_b, 0.0))
    }

    fn random_hermitian(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
        let a = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        (&a + a.adjoint()).map(|z| z * Complex64::new(0.5, 0.0))
    }

    #[test]
    fn banded_rhs_matches_matrix_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let env = PumpEnvelope::constant(0.7, 0.4).unwrap();
        for dim in [2, 5, 9] {
            for (n_b, omega) in [(0.0, 0.0), (0.5, 0.0), (1.3, 2.1)] {
                let p = params(n_b, omega);
                let rho = random_hermitian(dim, &mut rng);
                let fdm = FockDensityMatrix::from_matrix_unchecked(rho.clone());
                let fast = lindblad_rhs(&fdm, 0.37, &p, &env);
                let slow = dense_rhs(&rho, 0.37, &p, &env);
                for (a, b) in fast.iter().zip(slow.iter()) {
                    assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
                    assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn vacuum_is_stationary_for_cold_unpumped_cavity() {
        let p = params(0.0, 0.0);
        let env = PumpEnvelope::constant(0.0, p.theta).unwrap();
        let rho = FockDensityMatrix::vacuum(10);
        let rhs = lindblad_rhs(&rho, 0.0, &p, &env);
        assert!(rhs.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn equilibrium_thermal_state_is_stationary() {
        for n_b in [0.3, 1.0] {
            let p = params(n_b, 0.0);
            let env = PumpEnvelope::constant(0.0, p.theta).unwrap();
            let rho = FockDensityMatrix::thermal(n_b, 60).unwrap();
            let rhs = lindblad_rhs(&rho, 0.0, &p, &env);
            let worst = rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
            // stationary up to the truncation tail
            assert!(worst < 1e-8, "residual {worst} for n_b = {n_b}");
        }
    }

    #[test]
    fn generator_is_trace_free_and_hermiticity_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = params(0.8, 1.5);
        let env = PumpEnvelope::constant(0.9, p.theta).unwrap();
        for _ in 0..5 {
            let rho = random_hermitian(12, &mut rng);
            let fdm = FockDensityMatrix::from_matrix_unchecked(rho);
            let rhs = lindblad_rhs(&fdm, 0.9, &p, &env);
            let trace: Complex64 = (0..12).map(|k| rhs[(k, k)]).sum();
            assert!(trace.norm() <= 1e-12, "trace of generator output: {trace}");
            let defect = FockDensityMatrix::from_matrix_unchecked(rhs).hermiticity_defect();
            assert!(defect <= 1e-12, "hermiticity defect {defect}");
        }
    }
}
