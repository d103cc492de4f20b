//! Eigendecomposition of real symmetric tridiagonal matrices.
//!
//! Implicit QL iteration with Wilkinson shifts, accumulating the Givens
//! rotations into the eigenvector matrix. Cost is `O(n³)` with eigenvectors,
//! memory `O(n²)` for the vectors and `O(n)` otherwise.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenpairs of a symmetric tridiagonal matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

impl TridiagonalEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(λ) Vᵀ`, for checking.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues));
        v * lambda * v.transpose()
    }
}

/// Diagonalizes the matrix with main diagonal `diag` and first off-diagonal
/// `offdiag` (`offdiag.len() == diag.len() - 1`, or both empty).
pub fn eigh_tridiagonal(diag: &[f64], offdiag: &[f64]) -> Result<TridiagonalEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagonalEigen { eigenvalues: vec![], eigenvectors: DMatrix::zeros(0, 0) });
    }
    if offdiag.len() + 1 != n {
        return Err(Error::Contract(format!(
            "off-diagonal has length {}, expected {}",
            offdiag.len(),
            n - 1
        )));
    }

    let mut d = diag.to_vec();
    // e[i] couples d[i] and d[i+1]; e[n-1] is scratch.
    let mut e = offdiag.to_vec();
    e.push(0.0);
    let mut z = DMatrix::<f64>::identity(n, n);

    let anorm = d
        .iter()
        .zip(&e)
        .map(|(a, b)| a.abs() + 2.0 * b.abs())
        .fold(0.0, f64::max);
    let floor = f64::EPSILON * f64::EPSILON * anorm.max(f64::MIN_POSITIVE);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd + floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence { dim: n, index: l });
            }

            // Wilkinson shift from the leading 2x2 of the unreduced part.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (mut left, mut right) = z.columns_range_pair_mut(i, i + 1);
                for (zi, zj) in left.iter_mut().zip(right.iter_mut()) {
                    let f = *zj;
                    *zj = s * *zi + c * f;
                    *zi = c * *zi - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let eigenvalues = order.iter().map(|&k| d[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, k| z[(i, order[k])]);
    Ok(TridiagonalEigen { eigenvalues, eigenvectors })
}
