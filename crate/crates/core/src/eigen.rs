//! Dense symmetric eigensolver (cyclic Jacobi) and the Gram-matrix SVD
//! built on top of it.
//!
//! Jacobi is slower than tridiagonalization-based methods for large matrices
//! but is unconditionally robust for the desk-scale symmetric problems this
//! crate solves, and it has no trouble with the degenerate spectra that show
//! up when iterates start at the zero matrix.

use crate::error::{Error, Result};

/// Eigendecomposition of a symmetric matrix.
///
/// `values` are sorted in non-increasing order; column `j` of `vectors`
/// (stored row-major n×n) is the unit eigenvector for `values[j]`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub n: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymEigen {
    /// Entry `i` of eigenvector `j`.
    pub fn vector_entry(&self, i: usize, j: usize) -> f64 {
        self.vectors[i * self.n + j]
    }

    /// Copy of eigenvector `j`.
    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vector_entry(i, j)).collect()
    }
}

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a dense symmetric matrix via cyclic Jacobi sweeps.
///
/// Rotations are applied until the off-diagonal Frobenius norm falls below
/// `n·ε·‖A‖_F`; the quadratic convergence of the sweep makes this a handful
/// of passes in practice.
pub fn sym_eigen(a: &[f64], n: usize) -> Result<SymEigen> {
    assert_eq!(a.len(), n * n, "matrix buffer has wrong length");
    let mut m = a.to_vec();
    let mut v = identity(n);
    if n <= 1 {
        return Ok(sorted(n, vec![m.first().copied().unwrap_or(0.0)], v));
    }

    let norm = frobenius(&m);
    let tol = (n as f64) * f64::EPSILON * norm.max(f64::MIN_POSITIVE);

    for _sweep in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&m, n);
        if off <= tol {
            let values = (0..n).map(|i| m[i * n + i]).collect();
            return Ok(sorted(n, values, v));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                // Classical 2x2 rotation annihilating the (p,q) entry.
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut m, n, p, q, c, s);
                rotate_columns(&mut v, n, p, q, c, s);
            }
        }
    }

    Err(Error::EigenNonConvergence {
        sweeps: MAX_SWEEPS,
        off_norm: off_diagonal_norm(&m, n),
    })
}

/// Singular values of a rectangular row-major `m×n` matrix, non-increasing.
///
/// Computed as square roots of the eigenvalues of the smaller Gram matrix.
pub fn singular_values(a: &[f64], m: usize, n: usize) -> Result<Vec<f64>> {
    let eig = gram_eigen(a, m, n)?;
    Ok(eig
        .values
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect())
}

/// Eigendecomposition of the smaller Gram matrix (`AᵀA` or `AAᵀ`).
pub(crate) fn gram_eigen(a: &[f64], m: usize, n: usize) -> Result<SymEigen> {
    assert_eq!(a.len(), m * n);
    if m >= n {
        // AᵀA, n×n
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..m {
                    s += a[k * n + i] * a[k * n + j];
                }
                g[i * n + j] = s;
                g[j * n + i] = s;
            }
        }
        sym_eigen(&g, n)
    } else {
        // AAᵀ, m×m
        let mut g = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let mut s = 0.0;
                for k in 0..n {
                    s += a[i * n + k] * a[j * n + k];
                }
                g[i * m + j] = s;
                g[j * m + i] = s;
            }
        }
        sym_eigen(&g, m)
    }
}

/// Count of spectrum entries whose magnitude exceeds
/// `10⁻⁸ · max(largest magnitude, 1)`.
pub fn numerical_rank_from_values(values: &[f64]) -> usize {
    let largest = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = 1e-8 * largest.max(1.0);
    values.iter().filter(|v| v.abs() > threshold).count()
}

fn identity(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    v
}

fn frobenius(m: &[f64]) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn off_diagonal_norm(m: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[i * n + j] * m[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Apply the symmetric Jacobi rotation J(p,q,θ)ᵀ · M · J(p,q,θ) in place.
fn rotate(m: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        let mkp = m[k * n + p];
        let mkq = m[k * n + q];
        m[k * n + p] = c * mkp - s * mkq;
        m[k * n + q] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[p * n + k];
        let mqk = m[q * n + k];
        m[p * n + k] = c * mpk - s * mqk;
        m[q * n + k] = s * mpk + c * mqk;
    }
}

/// Postmultiply V by the rotation (updates eigenvector columns p and q).
fn rotate_columns(v: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}

fn sorted(n: usize, values: Vec<f64>, vectors: Vec<f64>) -> SymEigen {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    let sorted_values = order.iter().map(|&j| values[j]).collect();
    let mut sorted_vectors = vec![0.0; n * n];
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            sorted_vectors[i * n + new_j] = vectors[i * n + old_j];
        }
    }
    SymEigen {
        n,
        values: sorted_values,
        vectors: sorted_vectors,
    }
}
