//! Small dense linear algebra: LU solves and symmetric eigenvalues.

use nalgebra::{DMatrix, DVector, Dyn, OMatrix};

use crate::error::{Error, Result};

/// Relative symmetry tolerance accepted by [`symmetric_eigenvalues`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Off-diagonal Frobenius norm, relative to the full norm, at which Jacobi stops.
pub const JACOBI_TOLERANCE: f64 = 1e-14;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Solves `a x = b` (b may have several columns) by LU with partial pivoting.
pub fn lu_solve(a: &DMatrix<f64>, b: &OMatrix<f64, Dyn, Dyn>) -> Result<DMatrix<f64>> {
    if !a.is_square() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "cannot solve {}x{} system with {}x{} right-hand side",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let x = a.clone().lu().solve(b).ok_or(Error::SingularMatrix)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    Ok(x)
}

/// Vector form of [`lu_solve`].
pub fn lu_solve_vector(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let rhs = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let x = lu_solve(a, &rhs)?;
    Ok(DVector::from_column_slice(x.as_slice()))
}

/// Eigenvalues of a real symmetric matrix in ascending order.
///
/// Sizes 1 and 2 use closed forms; larger matrices use cyclic Jacobi
/// rotations until the off-diagonal part is below [`JACOBI_TOLERANCE`]
/// relative to the Frobenius norm.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.norm();
    let asym = (m - m.transpose()).norm();
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::NotSymmetric(asym / scale));
    }
    let n = m.nrows();
    let mut eig = match n {
        0 => Vec::new(),
        1 => vec![m[(0, 0)]],
        2 => {
            let (a, b, d) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
            let mean = 0.5 * (a + d);
            let radius = (0.5 * (a - d)).hypot(b);
            vec![mean - radius, mean + radius]
        }
        _ => jacobi(m, scale),
    };
    eig.sort_by(|a, b| a.total_cmp(b));
    Ok(eig)
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

fn jacobi(m: &DMatrix<f64>, scale: f64) -> Vec<f64> {
    let n = m.nrows();
    // symmetrize exactly
    let mut a = (m + m.transpose()) * 0.5;
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < JACOBI_TOLERANCE * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}
