//! Dense real matrix helpers: spectra, leading eigenpairs, norms.

use nalgebra::{Complex, DMatrix, DVector, Schur, SVD};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

const SCHUR_MAX_ITER: usize = 100_000;

/// Short content hash used to identify a matrix in diagnostics.
pub fn matrix_hash(a: &Matrix) -> String {
    let mut h = Sha256::new();
    h.update((a.nrows() as u64).to_le_bytes());
    h.update((a.ncols() as u64).to_le_bytes());
    for x in a.iter() {
        h.update(x.to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

fn check_square(a: &Matrix) -> Result<()> {
    if a.nrows() == 0 || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex<f64>>> {
    check_square(a)?;
    let n = a.nrows();
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| a[(i, j)]);
    if let Ok(ev) = fm.eigenvalues() {
        if ev.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Ok(ev.into_iter().map(|z| Complex::new(z.re, z.im)).collect());
        }
    }
    if let Some(schur) = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER) {
        return Ok(schur.complex_eigenvalues().iter().copied().collect());
    }
    Err(Error::NoConvergence { hash: matrix_hash(a) })
}

pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// Leading real eigenpair of a matrix.
#[derive(Debug, Clone)]
pub struct LeadingEigen {
    pub lambda: f64,
    pub rho: f64,
    /// Max-norm 1, largest entry positive.
    pub vector: Vector,
    /// No second eigenvalue lies within `tol * rho` of `lambda`.
    pub simple: bool,
    /// No other eigenvalue has modulus within `tol * rho` of `rho`.
    pub unique_modulus: bool,
}

pub fn leading_eigen(a: &Matrix, tol: f64) -> Result<LeadingEigen> {
    let eig = eigenvalues(a)?;
    let rho = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let cutoff = rho * (1.0 - tol);
    let leaders: Vec<Complex<f64>> = eig.iter().copied().filter(|z| z.norm() >= cutoff).collect();
    // Prefer a positive real leader, then a negative one.
    let real = leaders
        .iter()
        .filter(|z| z.im.abs() <= tol.max(1e-12) * rho.max(1.0))
        .max_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
    let lambda = match real {
        Some(z) => z.re,
        None => {
            return Err(Error::ComplexLeading {
                hash: matrix_hash(a),
            })
        }
    };
    let n = a.nrows();
    let shifted = a - Matrix::identity(n, n) * lambda;
    let vector = normalize_max(null_vector(&shifted));
    let near_lambda = eig
        .iter()
        .filter(|z| (**z - Complex::new(lambda, 0.0)).norm() <= tol * rho)
        .count();
    Ok(LeadingEigen {
        lambda,
        rho,
        vector,
        simple: near_lambda == 1,
        unique_modulus: leaders.len() == 1,
    })
}

/// Eigenvector of `a^T` for `lambda`, scaled so that `<v*, v> = 1`.
pub fn adjoint_vector(a: &Matrix, lambda: f64, v: &Vector) -> Result<Vector> {
    let n = a.nrows();
    let shifted = a.transpose() - Matrix::identity(n, n) * lambda;
    let w = null_vector(&shifted);
    let ip = w.dot(v);
    if ip.abs() <= 1e-12 * w.norm() * v.norm() {
        return Err(Error::DegeneratePairing {
            hash: matrix_hash(a),
        });
    }
    Ok(w / ip)
}

/// Right singular vector for the smallest singular value.
pub fn null_vector(m: &Matrix) -> Vector {
    let svd = SVD::new(m.clone(), false, true);
    let vt = svd.v_t.expect("requested v_t");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
    vt.row(k).transpose()
}

/// Scales to max-norm 1 with the first largest-magnitude entry positive.
pub fn normalize_max(v: Vector) -> Vector {
    let mut idx = 0;
    let mut best = 0.0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            idx = i;
        }
    }
    if best == 0.0 {
        return v;
    }
    let s = if v[idx] < 0.0 { -1.0 } else { 1.0 };
    v * (s / best)
}

pub fn singular_value_range(a: &Matrix) -> (f64, f64) {
    let s = SVD::new(a.clone(), false, false).singular_values;
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(0.0, f64::max);
    (lo, hi)
}

/// Extreme singular values of the matrix whose columns are `points`.
pub fn point_set_singular_range(points: &[Vector]) -> (f64, f64) {
    let Some(first) = points.first() else {
        return (0.0, 0.0);
    };
    let mut m = Matrix::zeros(first.len(), points.len());
    for (j, p) in points.iter().enumerate() {
        m.set_column(j, p);
    }
    singular_value_range(&m)
}

pub fn norm_2(a: &Matrix) -> f64 {
    singular_value_range(a).1
}

pub fn norm_1(a: &Matrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm_inf(a: &Matrix) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vec_norm_inf(v: &Vector) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, data: &[f64]) -> Matrix {
        Matrix::from_row_slice(rows, data.len() / rows, data)
    }

    #[test]
    fn diagonal_spectral_radius() {
        assert!((spectral_radius(&m(2, &[2.0, 0.0, 0.0, -3.0])).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_has_unit_radius_and_complex_leader() {
        let r = m(2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((spectral_radius(&r).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(leading_eigen(&r, 1e-9), Err(Error::ComplexLeading { .. })));
    }

    #[test]
    fn nilpotent_radius_zero() {
        let n = m(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(spectral_radius(&n).unwrap() < 1e-12);
    }

    #[test]
    fn empty_matrix_rejected() {
        assert!(matches!(
            spectral_radius(&Matrix::zeros(0, 0)),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(spectral_radius(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn triangular_leading_pair() {
        let a = m(2, &[1.0, -0.125, 0.0, 0.5]);
        let e = leading_eigen(&a, 1e-9).unwrap();
        assert!((e.lambda - 1.0).abs() < 1e-12);
        assert!(e.simple);
        assert!((e.vector[0] - 1.0).abs() < 1e-12 && e.vector[1].abs() < 1e-12);
        let w = adjoint_vector(&a, e.lambda, &e.vector).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] + 0.25).abs() < 1e-12);
    }

    #[test]
    fn negative_leader_detected() {
        let a = m(2, &[-2.0, 0.0, 0.0, 1.0]);
        let e = leading_eigen(&a, 1e-9).unwrap();
        assert!((e.lambda + 2.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_leader_not_simple() {
        let a = m(2, &[1.0, 0.0, 0.0, -1.0]);
        let e = leading_eigen(&a, 1e-9).unwrap();
        assert!(e.simple && !e.unique_modulus);
        assert!((e.lambda - 1.0).abs() < 1e-12);
        let i = leading_eigen(&Matrix::identity(2, 2), 1e-9).unwrap();
        assert!(!i.simple);
    }

    #[test]
    fn singular_values_of_diag() {
        let (lo, hi) = singular_value_range(&m(2, &[3.0, 0.0, 0.0, -0.5]));
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 3.0).abs() < 1e-12);
        assert!((norm_1(&m(2, &[1.0, -2.0, 3.0, 4.0])) - 6.0).abs() < 1e-15);
        assert!((norm_inf(&m(2, &[1.0, -2.0, 3.0, 4.0])) - 7.0).abs() < 1e-15);
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let a = m(2, &[1.0, 2.0, 3.0, 4.0]);
        let b = m(2, &[1.0, 2.0, 3.0, 4.5]);
        assert_eq!(matrix_hash(&a), matrix_hash(&a.clone()));
        assert_ne!(matrix_hash(&a), matrix_hash(&b));
    }
}
