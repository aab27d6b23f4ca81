//! Dense eigensolvers on nalgebra storage, computed with faer.

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, C64};

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    Ok(())
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_square(m)?;
    if m.nrows() == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let herm = to_faer(&((m + m.adjoint()) * C64::new(0.5, 0.0)));
    let eig = herm
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Decomposition(format!("Hermitian eigendecomposition: {e:?}")))?;
    let values: Vec<f64> = (0..m.nrows()).map(|k| eig.S()[k].re).collect();
    let u = eig.U();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| u[(i, j)]);
    check_finite(&values)?;
    Ok((values, vectors))
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    check_square(m)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let herm = to_faer(&((m + m.adjoint()) * C64::new(0.5, 0.0)));
    let mut values = herm
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Decomposition(format!("Hermitian eigenvalues: {e:?}")))?;
    check_finite(&values)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenvalues of a general complex matrix, in no particular order.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    check_square(m)?;
    let values = to_faer(m)
        .eigenvalues()
        .map_err(|e| Error::Decomposition(format!("eigenvalues: {e:?}")))?;
    if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Decomposition("non-finite eigenvalue".into()));
    }
    Ok(values)
}

/// Singular values of `m`, in decreasing order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut values = to_faer(m)
        .singular_values()
        .map_err(|e| Error::Decomposition(format!("singular values: {e:?}")))?;
    check_finite(&values)?;
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Decomposition("non-finite eigenvalue".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hermitian_pair() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let (values, vectors) = hermitian_eigh(&m).unwrap();
        assert!((values[0] - 1.0).abs() < 1e-14 && (values[1] - 3.0).abs() < 1e-14);
        let recon = &vectors * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(2, values.iter().map(|&v| c(v, 0.0)))) * vectors.adjoint();
        assert!((recon - m).norm() < 1e-13);
    }

    #[test]
    fn general_eigenvalues_of_a_rotation() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let mut values = eigenvalues(&m).unwrap();
        values.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((values[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((values[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn sparse_block_matrix_stays_finite() {
        // many exact zeros and tiny entries, the pattern of a difference of
        // nearly equal density matrices
        let n = 300;
        let m = CMatrix::from_fn(n, n, |i, j| {
            if (i + j) % 7 == 0 || i == j {
                c(1e-9 * ((i * 31 + j * 17) % 11) as f64, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let values = hermitian_eigenvalues(&m).unwrap();
        assert!(values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn singular_values_of_a_scaled_unitary() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 3.0), c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0)]);
        let values = singular_values(&m).unwrap();
        assert!((values[0] - 3.0).abs() < 1e-14 && (values[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rectangular_input_is_rejected() {
        assert!(hermitian_eigenvalues(&CMatrix::zeros(2, 3)).is_err());
        assert!(eigenvalues(&CMatrix::zeros(2, 3)).is_err());
    }
}
