//! Singular values and condition numbers for real64 matrices at desk scale
//! (n <= 64), via one-sided Jacobi orthogonalization of the columns.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Below this, a singular value is treated as numerically zero and the
/// condition number reported as infinite.
const SIGMA_FLOOR: f64 = 1e-300;

/// Singular values in descending order. Real64 only.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    if m.spec().is_exact() {
        return Err(Error::UnsupportedCarrier(
            "singular values are only defined on real64",
        ));
    }
    let rows = m.rows();
    let cols = m.cols();
    // Column-major copy; rotations act on column pairs.
    let mut a: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..rows).map(|i| m.get(i, j).as_f64().unwrap()).collect())
        .collect();

    let eps = f64::EPSILON * (rows.max(cols) as f64);
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let mut aii = 0.0;
                let mut ajj = 0.0;
                let mut aij = 0.0;
                for r in 0..rows {
                    aii += a[i][r] * a[i][r];
                    ajj += a[j][r] * a[j][r];
                    aij += a[i][r] * a[j][r];
                }
                if aij.abs() <= eps * (aii * ajj).sqrt() {
                    continue;
                }
                rotated = true;
                // Jacobi rotation zeroing the (i, j) entry of A^T A.
                let tau = (ajj - aii) / (2.0 * aij);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let vi = a[i][r];
                    let vj = a[j][r];
                    a[i][r] = c * vi - s * vj;
                    a[j][r] = s * vi + c * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigmas: Vec<f64> = a
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sigmas.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(sigmas)
}

/// sigma_max / sigma_min; +infinity once sigma_min underflows the floor.
pub fn condition_number(m: &DenseMatrix) -> Result<f64> {
    let sigmas = singular_values(m)?;
    let (max, min) = match (sigmas.first(), sigmas.last()) {
        (Some(&max), Some(&min)) => (max, min),
        _ => return Err(Error::ShapeMismatch("empty matrix".into())),
    };
    if min < SIGMA_FLOOR {
        return Ok(f64::INFINITY);
    }
    Ok(max / min)
}
