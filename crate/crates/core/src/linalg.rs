//! Dense eigenvalue helpers backed by faer's multishift QR.

use faer::Mat;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

pub fn eigenvalues_real(m: &DMatrix<f64>) -> Result<Vec<C>> {
    let fm = Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    fm.eigenvalues()
        .map_err(|e| Error::EigSolverFailure(format!("{e:?} (N = {})", m.nrows())))
}

pub fn eigenvalues_complex(m: &DMatrix<C>) -> Result<Vec<C>> {
    let fm = Mat::<C>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    fm.eigenvalues()
        .map_err(|e| Error::EigSolverFailure(format!("{e:?} (N = {})", m.nrows())))
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let fm = Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    fm.singular_values()
        .map_err(|e| Error::EigSolverFailure(format!("SVD: {e:?}")))
}

pub fn singular_values_complex(m: &DMatrix<C>) -> Result<Vec<f64>> {
    let fm = Mat::<C>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    fm.singular_values()
        .map_err(|e| Error::EigSolverFailure(format!("SVD: {e:?}")))
}
