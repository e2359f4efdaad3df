//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first strips the phase of the targeted off-diagonal element
//! and then applies the classical real Jacobi rotation; sweeps repeat until
//! the off-diagonal Frobenius norm falls below 1e-12 of the matrix norm.
//! Dimensions here never exceed a few tens, so no tridiagonalization stage
//! is needed.

use ndarray::Array2;
use num_complex::Complex64;

use super::LinalgError;

const SWEEP_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 60;

/// Eigenvalues (ascending) and, optionally, the matching unitary of column
/// eigenvectors of a Hermitian matrix. Hermiticity is the caller's contract;
/// only the lower triangle is read implicitly through symmetrization.
pub fn hermitian_eigen(
    a: &Array2<Complex64>,
    with_vectors: bool,
) -> Result<(Vec<f64>, Option<Array2<Complex64>>), LinalgError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix required");
    if n == 0 {
        return Ok((Vec::new(), with_vectors.then(|| Array2::zeros((0, 0)))));
    }

    // Work on an explicitly Hermitized copy so tiny asymmetries cannot drift.
    let mut w: Vec<Complex64> = vec![Complex64::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = 0.5 * (a[(i, j)] + a[(j, i)].conj());
        }
    }
    let mut v: Vec<Complex64> = vec![Complex64::ZERO; if with_vectors { n * n } else { 0 }];
    if with_vectors {
        for i in 0..n {
            v[i * n + i] = Complex64::ONE;
        }
    }

    let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        let vals = vec![0.0; n];
        let vecs = with_vectors.then(|| Array2::eye(n));
        return Ok((vals, vecs));
    }

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let off: f64 = {
            let mut s = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    s += 2.0 * w[p * n + q].norm_sqr();
                }
            }
            s.sqrt()
        };
        if off <= SWEEP_TOL * norm {
            converged = true;
            break;
        }

        for p in 0..n {
            for q in p + 1..n {
                let apq = w[p * n + q];
                let mag = apq.norm();
                if mag <= SWEEP_TOL * norm / (n as f64) {
                    continue;
                }
                // Phase factor u with apq = |apq|·u, then a real rotation.
                let u = apq / mag;
                let app = w[p * n + p].re;
                let aqq = w[q * n + q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Columns: (A·G) with G[p][p]=c, G[p][q]=s, G[q][p]=-s·ū, G[q][q]=c·ū.
                let ubar = u.conj();
                for k in 0..n {
                    let akp = w[k * n + p];
                    let akq = w[k * n + q];
                    w[k * n + p] = c * akp - s * (ubar * akq);
                    w[k * n + q] = s * akp + c * (ubar * akq);
                }
                // Rows: G†·(A·G).
                for k in 0..n {
                    let apk = w[p * n + k];
                    let aqk = w[q * n + k];
                    w[p * n + k] = c * apk - s * (u * aqk);
                    w[q * n + k] = s * apk + c * (u * aqk);
                }
                // Clean the rotated pair to exact symmetry.
                w[p * n + q] = Complex64::ZERO;
                w[q * n + p] = Complex64::ZERO;
                w[p * n + p] = Complex64::new(w[p * n + p].re, 0.0);
                w[q * n + q] = Complex64::new(w[q * n + q].re, 0.0);

                if with_vectors {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * (ubar * vkq);
                        v[k * n + q] = s * vkp + c * (ubar * vkq);
                    }
                }
            }
        }
    }
    if !converged {
        // One final check: the last sweep may have finished the job.
        let off: f64 = {
            let mut s = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    s += 2.0 * w[p * n + q].norm_sqr();
                }
            }
            s.sqrt()
        };
        if off > SWEEP_TOL * norm {
            return Err(LinalgError::NoConvergence(MAX_SWEEPS));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[i * n + i].re.total_cmp(&w[j * n + j].re));
    let vals: Vec<f64> = order.iter().map(|&i| w[i * n + i].re).collect();
    let vecs = with_vectors.then(|| {
        Array2::from_shape_fn((n, n), |(r, c)| v[r * n + order[c]])
    });
    Ok((vals, vecs))
}

/// Convenience wrapper returning only the ascending eigenvalues.
pub fn hermitian_eigenvalues_ascending(a: &Array2<Complex64>) -> Result<Vec<f64>, LinalgError> {
    hermitian_eigen(a, false).map(|(vals, _)| vals)
}
