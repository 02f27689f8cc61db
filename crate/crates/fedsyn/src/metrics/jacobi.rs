//! Cyclic Jacobi eigendecomposition for small symmetric matrices.

use ndarray::Array2;

use crate::error::{Error, Result};

const OFF_DIAG_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Check symmetry within `tol` (absolute, relative to the largest entry).
pub fn check_symmetric(m: &Array2<f64>, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Alignment(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.iter().fold(1.0f64, |a, &v| a.max(v.abs()));
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[[i, j]] - m[[j, i]]).abs() > tol * scale {
                return Err(Error::NumericDomain(format!(
                    "matrix asymmetric at ({i}, {j}): {} vs {}",
                    m[[i, j]],
                    m[[j, i]]
                )));
            }
        }
    }
    Ok(())
}

/// Eigenvalues and eigenvectors (as columns) of a symmetric matrix.
///
/// Sweeps Jacobi rotations cyclically over the upper triangle until the
/// off-diagonal Frobenius norm drops below 1e-12 relative to the matrix norm.
pub fn eigh(m: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    check_symmetric(m, 1e-8)?;
    let n = m.nrows();
    let mut a = m.clone();
    // Symmetrize exactly so rotations stay consistent.
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = avg;
            a[[j, i]] = avg;
        }
    }
    let mut v: Array2<f64> = Array2::eye(n);
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * a[[i, j]] * a[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off <= OFF_DIAG_TOL * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= OFF_DIAG_TOL * norm / (n as f64) {
                    continue;
                }
                // Rotation angle that annihilates a[p][q].
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues = (0..n).map(|i| a[[i, i]]).collect();
    Ok((eigenvalues, v))
}

/// Principal square root of a symmetric PSD matrix; negative eigenvalues from
/// round-off are clamped to zero.
pub fn matrix_sqrt_psd(m: &Array2<f64>) -> Result<Array2<f64>> {
    let (eigenvalues, v) = eigh(m)?;
    let n = m.nrows();
    let mut result = Array2::zeros((n, n));
    for (idx, &lambda) in eigenvalues.iter().enumerate() {
        let root = lambda.max(0.0).sqrt();
        if root == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                result[[i, j]] += root * v[[i, idx]] * v[[j, idx]];
            }
        }
    }
    Ok(result)
}
