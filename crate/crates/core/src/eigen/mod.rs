//! Dense eigensolver for general complex matrices.
//!
//! The pipeline is the classical one: diagonal balancing, unitary reduction
//! to upper Hessenberg form, implicitly shifted QR with deflation for the
//! eigenvalues, and inverse iteration on the Hessenberg matrix for the
//! eigenvectors, which are then mapped back through the reflectors and the
//! balancing scale. Every returned pair carries its residual
//! `||H v - lambda v||` measured against the caller's matrix.

mod inverse;
mod qr;
mod reduce;

use std::cmp::Ordering;

use num_complex::Complex64;
use thiserror::Error;

use crate::CMatrix;
use reduce::Dense;

/// Default residual tolerance, relative to the Frobenius norm of the matrix.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

/// Eigenvalues closer than this (relative to the Frobenius norm) form a
/// degenerate cluster whose vectors are orthogonalized against each other.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("QR iteration did not converge for eigenvalue index {index}")]
    NoConvergence { index: usize },
}

/// Eigenvalues, optionally with unit eigenvectors and their residuals.
///
/// Values are kept in canonical order: ascending real part, ties broken by
/// ascending imaginary part. Vectors and residuals follow the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSet {
    values: Vec<Complex64>,
    vectors: Option<Vec<Vec<Complex64>>>,
    residuals: Option<Vec<f64>>,
    matrix_norm: f64,
}

/// Canonical ordering of eigenvalues.
pub fn canonical_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl EigenSet {
    /// Wraps a bare list of eigenvalues, sorting it canonically.
    pub fn from_values(mut values: Vec<Complex64>) -> Self {
        values.sort_by(canonical_cmp);
        EigenSet {
            values,
            vectors: None,
            residuals: None,
            matrix_norm: f64::NAN,
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn vectors(&self) -> Option<&[Vec<Complex64>]> {
        self.vectors.as_deref()
    }

    pub fn residuals(&self) -> Option<&[f64]> {
        self.residuals.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Frobenius norm of the matrix the set was computed from (NaN for sets
    /// built with [`EigenSet::from_values`]).
    pub fn matrix_norm(&self) -> f64 {
        self.matrix_norm
    }

    /// Largest residual divided by the Frobenius norm of the matrix.
    pub fn max_relative_residual(&self) -> Option<f64> {
        let r = self.residuals.as_ref()?;
        let max = r.iter().copied().fold(0.0, f64::max);
        Some(if self.matrix_norm > 0.0 {
            max / self.matrix_norm
        } else {
            max
        })
    }

    /// Whether every residual is within `tol * ||H||_F`. Sets without
    /// vectors are never certified.
    ///
    /// Defective eigenvalues (exceptional points) have no complete set of
    /// eigenvectors; there the certificate fails and the returned vectors are
    /// only the best inverse-iteration approximations.
    pub fn is_certified(&self, tol: f64) -> bool {
        self.max_relative_residual().is_some_and(|r| r <= tol)
    }
}

fn validate(m: &CMatrix) -> Result<(), EigenError> {
    if m.nrows() != m.ncols() {
        return Err(EigenError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(EigenError::Empty);
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(EigenError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

struct Reduced {
    hessenberg: Dense,
    reflectors: Vec<reduce::Reflector>,
    scale: Vec<f64>,
    values: Vec<Complex64>,
}

fn reduce_and_solve(m: &CMatrix) -> Result<Reduced, EigenError> {
    validate(m)?;
    let mut work = Dense::from_matrix(m);
    let scale = reduce::balance(&mut work);
    let reflectors = reduce::hessenberg(&mut work);
    let hessenberg = work.clone();
    let mut values = qr::hessenberg_eigenvalues(&mut work)
        .map_err(|index| EigenError::NoConvergence { index })?;
    values.sort_by(canonical_cmp);
    Ok(Reduced {
        hessenberg,
        reflectors,
        scale,
        values,
    })
}

/// All eigenvalues of `m`, with multiplicity, in canonical order.
pub fn eigenvalues(m: &CMatrix) -> Result<EigenSet, EigenError> {
    let reduced = reduce_and_solve(m)?;
    Ok(EigenSet {
        values: reduced.values,
        vectors: None,
        residuals: None,
        matrix_norm: m.norm(),
    })
}

/// Eigenvalues together with unit eigenvectors and residuals.
pub fn eigenpairs(m: &CMatrix) -> Result<EigenSet, EigenError> {
    let Reduced {
        hessenberg,
        reflectors,
        scale,
        values,
    } = reduce_and_solve(m)?;
    let fro = m.norm();
    let raw = inverse::hessenberg_eigenvectors(&hessenberg, &values, CLUSTER_TOL * fro);

    let n = m.nrows();
    let mut vectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for (mut y, lambda) in raw.into_iter().zip(&values) {
        for r in reflectors.iter().rev() {
            r.apply(&mut y);
        }
        for (z, d) in y.iter_mut().zip(&scale) {
            *z *= *d;
        }
        let nrm = y.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        y.iter_mut().for_each(|z| *z /= nrm);
        residuals.push(residual(m, *lambda, &y));
        vectors.push(y);
    }
    Ok(EigenSet {
        values,
        vectors: Some(vectors),
        residuals: Some(residuals),
        matrix_norm: fro,
    })
}

/// `||m v - lambda v||_2`.
pub fn residual(m: &CMatrix, lambda: Complex64, v: &[Complex64]) -> f64 {
    let n = m.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (j, vj) in v.iter().enumerate() {
        if *vj == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, a) in out.iter_mut().zip(m.column(j).iter()) {
            *o += a * vj;
        }
    }
    out.iter()
        .zip(v)
        .map(|(o, x)| (o - lambda * x).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_is_sorted_canonically() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]));
        let es = eigenvalues(&m).unwrap();
        assert_eq!(es.values(), &[c(0.0, -1.0), c(0.0, 1.0), c(2.0, 0.0)]);
    }

    #[test]
    fn exchange_matrix() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let es = eigenvalues(&m).unwrap();
        assert!((es.values()[0] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((es.values()[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn broken_pt_dimer() {
        // lambda = +-sqrt(v^2 - rho^2) with v = 1, rho = 2
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 2.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, -2.0)]);
        let es = eigenpairs(&m).unwrap();
        let s3 = 3f64.sqrt();
        let v = es.values();
        assert!((v[0] - c(0.0, -s3)).norm() < 1e-14 || (v[1] - c(0.0, -s3)).norm() < 1e-14);
        assert!(v.iter().any(|z| (z - c(0.0, s3)).norm() < 1e-14));
        assert!(es.is_certified(1e-12));
    }

    #[test]
    fn identity_pairs() {
        let es = eigenpairs(&CMatrix::identity(5, 5)).unwrap();
        assert!(es.values().iter().all(|z| *z == c(1.0, 0.0)));
        let vs = es.vectors().unwrap();
        for (i, a) in vs.iter().enumerate() {
            for (j, b) in vs.iter().enumerate() {
                let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - c(expected, 0.0)).norm() < 1e-12);
            }
        }
        assert!(es.residuals().unwrap().iter().all(|r| *r < 1e-15));
    }

    #[test]
    fn one_by_one() {
        let m = CMatrix::from_element(1, 1, c(2.5, -1.0));
        let es = eigenpairs(&m).unwrap();
        assert_eq!(es.values(), &[c(2.5, -1.0)]);
        assert!(es.residuals().unwrap()[0] < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            eigenvalues(&CMatrix::zeros(2, 3)).unwrap_err(),
            EigenError::NotSquare { rows: 2, cols: 3 }
        );
        assert_eq!(eigenvalues(&CMatrix::zeros(0, 0)).unwrap_err(), EigenError::Empty);
        let mut m = CMatrix::zeros(3, 3);
        m[(1, 2)] = c(f64::NAN, 0.0);
        assert_eq!(eigenvalues(&m).unwrap_err(), EigenError::NonFinite { row: 1, col: 2 });
    }

    #[test]
    fn zero_matrix() {
        let es = eigenpairs(&CMatrix::zeros(4, 4)).unwrap();
        assert!(es.values().iter().all(|z| *z == c(0.0, 0.0)));
    }
}
