//! Construction of squeezed thermal states on the truncated basis,
//! `rho = S(xi) rho_T(n_th) S^dag(xi)` with
//! `S(xi) = exp[(conj(xi) b^2 - xi b^dag^2)/2]`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{fock::ladder_ops, FockDensityMatrix, OracleError};

/// Maximum allowed unitarity defect of the constructed squeeze operator on
/// the lower 80% of the basis.
const UNITARITY_TOL: f64 = 1e-8;

/// Build the density matrix of a squeezed thermal state.
///
/// The squeeze operator is `exp(K)` with anti-Hermitian
/// `K = (conj(xi) b^2 - xi b^dag^2)/2`, obtained by unitary diagonalization
/// of the Hermitian matrix `iK`. Construction fails as truncation-inadequate
/// when the unitarity certificate or any density-matrix invariant (thermal
/// tail, squeezing leakage into the top levels) is violated; as a guideline,
/// `dim >= 8 (n_th + 1) e^{2u}` is comfortable.
pub fn construct_sts_density(
    n_th: f64,
    xi: Complex64,
    dim: usize,
    tail_tol: f64,
) -> Result<FockDensityMatrix, OracleError> {
    if dim < 2 {
        return Err(OracleError::InvalidDimension(dim));
    }
    if !n_th.is_finite() || n_th < 0.0 {
        return Err(OracleError::InvalidThermalPopulation(n_th));
    }

    let (b, bd) = ladder_ops(dim);
    let half = Complex64::new(0.5, 0.0);
    let k_op = (&b * &b).map(|z| z * xi.conj() * half) - (&bd * &bd).map(|z| z * xi * half);
    let hermitian = k_op.map(|z| z * Complex64::I);
    let eigen = SymmetricEigen::new(hermitian);
    let phases = DMatrix::from_diagonal(
        &eigen.eigenvalues.map(|lam| Complex64::from_polar(1.0, -lam)),
    );
    let squeeze = &eigen.eigenvectors * phases * eigen.eigenvectors.adjoint();

    // unitarity certificate on the lower 80% of the basis
    let check = dim * 4 / 5;
    let product = squeeze.adjoint() * &squeeze;
    let mut defect = 0.0_f64;
    for i in 0..check.max(1) {
        for j in 0..check.max(1) {
            let expected = if i == j { Complex64::ONE } else { Complex64::ZERO };
            defect = defect.max((product[(i, j)] - expected).norm());
        }
    }
    if defect > UNITARITY_TOL {
        return Err(OracleError::TruncationInadequate(format!(
            "squeeze-operator unitarity defect {defect:.3e} exceeds {UNITARITY_TOL:.0e} at dim {dim}"
        )));
    }

    let thermal = FockDensityMatrix::thermal(n_th, dim)?;
    let mut rho = &squeeze * thermal.matrix() * squeeze.adjoint();
    // remove the rounding-level asymmetry from the triple product
    let rho_adj = rho.adjoint();
    for (z, a) in rho.iter_mut().zip(rho_adj.iter()) {
        *z = (*z + a) * half;
    }

    let out = FockDensityMatrix::from_matrix_unchecked(rho);
    out.validate(tail_tol).map_err(|e| {
        OracleError::TruncationInadequate(format!(
            "constructed state violates invariants at dim {dim}: {e}"
        ))
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::trace_distance;
    use crate::sts::{self, StsState};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn zero_squeezing_zero_temperature_is_the_vacuum() {
        let rho = construct_sts_density(0.0, Complex64::ZERO, 20, 1e-8).unwrap();
        let vac = FockDensityMatrix::vacuum(20);
        assert!(trace_distance(&rho, &vac).unwrap() < 1e-12);
    }

    #[test]
    fn zero_squeezing_gives_geometric_weights() {
        let rho = construct_sts_density(0.5, Complex64::ZERO, 30, 1e-8).unwrap();
        for k in 0..5 {
            let expected = (1.0 / 1.5) * (0.5f64 / 1.5).powi(k as i32);
            assert_relative_eq!(rho.matrix()[(k, k)].re, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn squeezed_variance_matches_the_closed_form() {
        // xi real and positive squeezes X at beta = 0; the truncation floor
        // at dim 40 is 3.1e-8 and falls to 6e-10 at dim 48
        let rho = construct_sts_density(0.25, Complex64::new(0.5, 0.0), 40, 1e-8).unwrap();
        let obs = rho.observables(0.0);
        assert_abs_diff_eq!(obs.dx2, 1.5 * (-1.0f64).exp(), epsilon = 1e-7);
        assert_abs_diff_eq!(obs.dy2, 1.5 * 1.0f64.exp(), epsilon = 1e-7);
        assert_relative_eq!(obs.purity, 1.0 / 1.5, max_relative = 1e-6);

        let rho = construct_sts_density(0.25, Complex64::new(0.5, 0.0), 60, 1e-8).unwrap();
        let obs = rho.observables(0.0);
        assert_abs_diff_eq!(obs.dx2, 1.5 * (-1.0f64).exp(), epsilon = 1e-8);
        assert_abs_diff_eq!(obs.dy2, 1.5 * 1.0f64.exp(), epsilon = 1e-8);
    }

    #[test]
    fn observables_match_the_state_formulas() {
        let (u, n_th) = (0.8, 0.6);
        let state = StsState::new(u, 0.0, n_th).unwrap();
        let rho = construct_sts_density(n_th, Complex64::new(u, 0.0), 120, 1e-8).unwrap();
        let obs = rho.observables(0.0);
        assert_relative_eq!(obs.n, sts::total_population(&state), max_relative = 1e-8);
        let (dx2, dy2) = sts::quad_variances(&state);
        assert_relative_eq!(obs.dx2, dx2, max_relative = 1e-7);
        assert_relative_eq!(obs.dy2, dy2, max_relative = 1e-7);
        assert_relative_eq!(
            obs.g2.unwrap(),
            sts::g2_of_state(&state).unwrap(),
            max_relative = 1e-7
        );
    }

    #[test]
    fn squeezing_phase_rotates_the_squeezed_quadrature() {
        // X at beta is squeezed when phi + 2 beta = 0 (mod 2 pi)
        let phi = 1.1;
        let xi = Complex64::from_polar(0.5, phi);
        let rho = construct_sts_density(0.25, xi, 60, 1e-8).unwrap();
        let obs = rho.observables(-phi / 2.0);
        assert_abs_diff_eq!(obs.dx2, 1.5 * (-1.0f64).exp(), epsilon = 1e-8);
    }

    #[test]
    fn large_population_coherence_matches_formula() {
        // n ~ 55 here; the photon distribution tail dies off slowly, so this
        // needs a four-digit basis (and ~20 s)
        let (u, n_th) = (1.5, 5.0);
        let state = StsState::new(u, 0.0, n_th).unwrap();
        let rho = construct_sts_density(n_th, Complex64::new(u, 0.0), 1000, 1e-4).unwrap();
        let obs = rho.observables(0.0);
        let expected = sts::g2_of_state(&state).unwrap();
        assert!(
            (obs.g2.unwrap() - expected).abs() < 1e-2,
            "g2 {} vs formula {}",
            obs.g2.unwrap(),
            expected
        );
    }

    #[test]
    fn inadequate_truncation_is_reported() {
        let err = construct_sts_density(5.0, Complex64::new(1.5, 0.0), 30, 1e-8).unwrap_err();
        assert!(matches!(err, OracleError::TruncationInadequate(_)));
    }
}
