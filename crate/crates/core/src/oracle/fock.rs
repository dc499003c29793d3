//! Dense Fock-basis density matrices and their observables.

use std::io::{self, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::OracleError;

/// Annihilation and creation matrices on the truncated basis `|0> .. |dim-1>`:
/// `b|n> = sqrt(n) |n-1>`, `b^dag |n> = sqrt(n+1) |n+1>` with the top
/// row/column cut off. `[b, b^dag] = I` holds on all but the top level.
pub fn ladder_ops(dim: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    assert!(dim >= 2, "truncation dimension must be >= 2");
    let mut b = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        b[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let bd = b.adjoint();
    (b, bd)
}

/// Observables of a density matrix at a given local-oscillator phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    /// Mean photon number `<b^dag b>`.
    pub n: f64,
    /// Variance of `X = b^dag e^{-i beta} + b e^{i beta}`.
    pub dx2: f64,
    /// Variance of `Y = -i (b^dag e^{-i beta} - b e^{i beta})`.
    pub dy2: f64,
    /// `<b^dag b^dag b b> / n^2`; `None` for vanishing population.
    pub g2: Option<f64>,
    /// `Tr rho^2`.
    pub purity: f64,
}

/// Density matrix on a truncated Fock basis.
///
/// Valid instances are Hermitian, unit-trace, positive semidefinite and keep
/// the population of the top 10% of levels below a tail tolerance;
/// [`FockDensityMatrix::validate`] checks all four.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl FockDensityMatrix {
    /// Wrap a matrix without checking invariants.
    pub fn from_matrix_unchecked(matrix: DMatrix<Complex64>) -> Self {
        assert_eq!(matrix.nrows(), matrix.ncols(), "density matrix must be square");
        Self { matrix }
    }

    /// Vacuum projector `|0><0|`.
    pub fn vacuum(dim: usize) -> Self {
        Self::fock(0, dim)
    }

    /// Number-state projector `|k><k|`.
    pub fn fock(k: usize, dim: usize) -> Self {
        assert!(k < dim, "Fock level {k} outside truncation {dim}");
        let mut m = DMatrix::zeros(dim, dim);
        m[(k, k)] = Complex64::ONE;
        Self { matrix: m }
    }

    /// Thermal state with geometric weights `n_th^k / (1 + n_th)^{k+1}`,
    /// renormalized over the truncated basis so the trace is exactly one.
    pub fn thermal(n_th: f64, dim: usize) -> Result<Self, OracleError> {
        if dim < 2 {
            return Err(OracleError::InvalidDimension(dim));
        }
        if !n_th.is_finite() || n_th < 0.0 {
            return Err(OracleError::InvalidThermalPopulation(n_th));
        }
        let ratio = n_th / (1.0 + n_th);
        let weights: Vec<f64> = (0..dim).map(|k| ratio.powi(k as i32) / (1.0 + n_th)).collect();
        let norm: f64 = weights.iter().sum();
        let mut m = DMatrix::zeros(dim, dim);
        for (k, w) in weights.iter().enumerate() {
            m[(k, k)] = Complex64::new(w / norm, 0.0);
        }
        Ok(Self { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Real part of the trace.
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|k| self.matrix[(k, k)].re).sum()
    }

    /// `Tr rho^2`, assuming Hermiticity.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `max_ij |rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in i..d {
                let diff = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                worst = worst.max(diff);
            }
        }
        worst
    }

    /// Smallest eigenvalue (the matrix is treated as Hermitian).
    pub fn min_eigenvalue(&self) -> f64 {
        let eigen = SymmetricEigen::new(self.matrix.clone());
        eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Population of the top 10% of Fock levels.
    pub fn tail_mass(&self) -> f64 {
        let d = self.dim();
        let count = d.div_ceil(10);
        (d - count..d).map(|k| self.matrix[(k, k)].re).sum()
    }

    /// Check all validity invariants.
    pub fn validate(&self, tail_tol: f64) -> Result<(), OracleError> {
        let defect = self.hermiticity_defect();
        if defect > 1e-10 {
            return Err(OracleError::Hermiticity { defect });
        }
        let trace = self.trace();
        if (trace - 1.0).abs() > 1e-8 {
            return Err(OracleError::TraceDrift { trace });
        }
        let min_eigenvalue = self.min_eigenvalue();
        if min_eigenvalue < -1e-8 {
            return Err(OracleError::Positivity { min_eigenvalue });
        }
        let tail_mass = self.tail_mass();
        if tail_mass > tail_tol {
            return Err(OracleError::TruncationOverflow {
                tail_mass,
                tol: tail_tol,
                suggested_dim: super::next_ladder_dim(self.dim()),
            });
        }
        Ok(())
    }

    /// Expectation values at local-oscillator phase `beta`.
    ///
    /// Second moments use the operator identities
    /// `X^2 = b^2 e^{2 i beta} + h.c. + 2 b^dag b + 1` (and the sign-flipped
    /// form for `Y^2`), so truncation enters only through the state itself.
    pub fn observables(&self, beta: f64) -> Observables {
        let d = self.dim();
        let m = &self.matrix;
        let mut n = 0.0;
        let mut nn = 0.0; // <b^dag b^dag b b>
        for k in 0..d {
            let p = m[(k, k)].re;
            n += k as f64 * p;
            nn += (k * (k.saturating_sub(1))) as f64 * p;
        }
        let mut b_mean = Complex64::ZERO;
        for k in 1..d {
            b_mean += (k as f64).sqrt() * m[(k, k - 1)];
        }
        let mut b2_mean = Complex64::ZERO;
        for k in 2..d {
            b2_mean += ((k * (k - 1)) as f64).sqrt() * m[(k, k - 2)];
        }
        let phase = Complex64::from_polar(1.0, beta);
        let z = b_mean * phase;
        let e2 = b2_mean * phase * phase;
        let mean_x = 2.0 * z.re;
        let mean_y = -2.0 * z.im;
        let dx2 = 2.0 * e2.re + 2.0 * n + 1.0 - mean_x * mean_x;
        let dy2 = -2.0 * e2.re + 2.0 * n + 1.0 - mean_y * mean_y;
        let g2 = if n >= 1e-10 { Some(nn / (n * n)) } else { None };
        Observables { n, dx2, dy2, g2, purity: self.purity() }
    }

    /// Write the matrix as text: a `dim=N t=<value>` header, then one row per
    /// line with `re,im` pairs separated by spaces.
    pub fn write_text<W: Write>(&self, w: &mut W, t: f64) -> io::Result<()> {
        writeln!(w, "dim={} t={:.17e}", self.dim(), t)?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self.matrix[(i, j)];
                    format!("{:.17e},{:.17e}", z.re, z.im)
                })
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Trace distance `1/2 sum |eig(rho1 - rho2)|`.
pub fn trace_distance(
    rho1: &FockDensityMatrix,
    rho2: &FockDensityMatrix,
) -> Result<f64, OracleError> {
    if rho1.dim() != rho2.dim() {
        return Err(OracleError::DimensionMismatch { a: rho1.dim(), b: rho2.dim() });
    }
    let diff = rho1.matrix() - rho2.matrix();
    let eigen = SymmetricEigen::new(diff);
    Ok(0.5 * eigen.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn two_level_annihilation_matrix() {
        let (b, _) = ladder_ops(2);
        assert_eq!(b[(0, 1)], Complex64::ONE);
        assert_eq!(b[(0, 0)], Complex64::ZERO);
        assert_eq!(b[(1, 0)], Complex64::ZERO);
        assert_eq!(b[(1, 1)], Complex64::ZERO);
    }

    #[test]
    fn number_operator_diagonal() {
        let (b, bd) = ladder_ops(5);
        let n = &bd * &b;
        for k in 0..5 {
            assert_abs_diff_eq!(n[(k, k)].re, k as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn commutator_is_identity_below_the_top_level() {
        let dim = 8;
        let (b, bd) = ladder_ops(dim);
        let comm = &b * &bd - &bd * &b;
        for k in 0..dim - 1 {
            assert_abs_diff_eq!(comm[(k, k)].re, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn vacuum_observables() {
        let rho = FockDensityMatrix::vacuum(10);
        let obs = rho.observables(0.0);
        assert_eq!(obs.n, 0.0);
        assert_eq!(obs.dx2, 1.0);
        assert_eq!(obs.dy2, 1.0);
        assert_eq!(obs.g2, None);
        assert_eq!(obs.purity, 1.0);
        rho.validate(1e-8).unwrap();
    }

    #[test]
    fn thermal_observables() {
        let rho = FockDensityMatrix::thermal(0.5, 40).unwrap();
        let obs = rho.observables(0.3);
        assert_abs_diff_eq!(obs.n, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(obs.dx2, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(obs.dy2, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(obs.g2.unwrap(), 2.0, epsilon = 1e-8);
        assert_relative_eq!(obs.purity, 0.5, max_relative = 1e-9);
    }

    #[test]
    fn thermal_rejects_negative_population() {
        assert!(matches!(
            FockDensityMatrix::thermal(-0.1, 10),
            Err(OracleError::InvalidThermalPopulation(_))
        ));
    }

    #[test]
    fn trace_distance_basics() {
        let vac = FockDensityMatrix::vacuum(6);
        let one = FockDensityMatrix::fock(1, 6);
        assert_abs_diff_eq!(trace_distance(&vac, &vac).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_distance(&vac, &one).unwrap(), 1.0, epsilon = 1e-12);

        let a = FockDensityMatrix::thermal(0.5, 30).unwrap();
        let b = FockDensityMatrix::thermal(0.6, 30).unwrap();
        let d_ab = trace_distance(&a, &b).unwrap();
        let d_ba = trace_distance(&b, &a).unwrap();
        assert!(d_ab > 0.0 && d_ab < 1.0);
        assert_abs_diff_eq!(d_ab, d_ba, epsilon = 1e-14);
    }

    #[test]
    fn trace_distance_requires_matching_dims() {
        let a = FockDensityMatrix::vacuum(6);
        let b = FockDensityMatrix::vacuum(8);
        assert!(matches!(
            trace_distance(&a, &b),
            Err(OracleError::DimensionMismatch { a: 6, b: 8 })
        ));
    }

    #[test]
    fn tail_mass_counts_top_levels() {
        let rho = FockDensityMatrix::fock(39, 40);
        assert_abs_diff_eq!(rho.tail_mass(), 1.0, epsilon = 1e-15);
        let rho = FockDensityMatrix::fock(35, 40);
        assert_abs_diff_eq!(rho.tail_mass(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn text_dump_round_trips() {
        let rho = FockDensityMatrix::thermal(0.7, 4).unwrap();
        let mut buf = Vec::new();
        rho.write_text(&mut buf, 1.25).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("dim=4 t="));
        let row0: Vec<&str> = lines.next().unwrap().split(' ').collect();
        assert_eq!(row0.len(), 4);
        let (re, im) = row0[0].split_once(',').unwrap();
        let expected = (1.0 / 1.7) / (1.0 - (0.7f64 / 1.7).powi(4));
        assert_abs_diff_eq!(re.parse::<f64>().unwrap(), expected, epsilon = 1e-15);
        assert_eq!(im.parse::<f64>().unwrap(), 0.0);
    }
}
