//! Exact projections onto the structured nonconvex set `D`.
//!
//! Every variant admits a closed-form (or eigenvalue-based) projection:
//!
//! * plain boxes,
//! * products of "box-switching" pairs `(y_i, z_i)` lying on the union of a
//!   horizontal and a vertical segment through the origin (complementarity,
//!   switching and relaxed-cardinality pairs are special cases),
//! * cardinality-constrained boxes `S_κ ∩ [ℓ,u]`,
//! * low-rank matrices and PSD matrices of bounded rank,
//! * unions of convex branches, and Cartesian products of all of the above.
//!
//! Ties are broken deterministically everywhere: the first branch (or lowest
//! index) wins, so runs are reproducible under a fixed seed.

use crate::convex::{clamp_bound, ConvexSet};
use crate::eigen::{self, numerical_rank_from_values};
use crate::error::{Error, Result};
use crate::space::{Point, Shape};

/// A closed set with a fast exact projection, kept explicitly in the
/// constraints by the solvers.
#[derive(Clone, Debug, PartialEq)]
pub enum StructuredSet {
    /// Componentwise box `[lo, hi]`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `pairs` box-switching pairs. A point has layout
    /// `(y_1..y_m, z_1..z_m)` and each `(y_i, z_i)` must lie on
    /// `[s_lo, s_hi]×{0} ∪ {0}×[t_lo, t_hi]`.
    BoxSwitchingProduct {
        pairs: usize,
        s_lo: f64,
        s_hi: f64,
        t_lo: f64,
        t_hi: f64,
    },
    /// Vectors with at most `kappa` nonzeros inside `[lo, hi]`.
    SparseBox {
        n: usize,
        kappa: usize,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// `rows×cols` matrices (row-major flat storage) of rank at most `kappa`.
    LowRank {
        rows: usize,
        cols: usize,
        kappa: usize,
    },
    /// Symmetric PSD `n×n` matrices of rank at most `kappa`
    /// (`kappa = n` is the plain PSD cone).
    PsdLowRank { n: usize, kappa: usize },
    /// Union of convex branches over the same coordinates.
    Union(Vec<ConvexSet>),
    /// Cartesian product over a partition of the coordinates, in order.
    Product(Vec<StructuredSet>),
}

impl StructuredSet {
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        let lo: Vec<f64> = lo.into_iter().map(clamp_bound).collect();
        let hi: Vec<f64> = hi.into_iter().map(clamp_bound).collect();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidSet("box has lo > hi".into()));
        }
        Ok(StructuredSet::Box { lo, hi })
    }

    /// Product of `pairs` identical box-switching pairs with segment bounds
    /// `s_lo ≤ 0 < s_hi` and `t_lo ≤ 0 < t_hi` (infinite bounds allowed).
    pub fn box_switching(pairs: usize, s_lo: f64, s_hi: f64, t_lo: f64, t_hi: f64) -> Result<Self> {
        if pairs == 0 {
            return Err(Error::InvalidSet("box-switching needs at least one pair".into()));
        }
        if !(s_lo <= 0.0 && t_lo <= 0.0 && s_hi > 0.0 && t_hi > 0.0) {
            return Err(Error::InvalidSet(
                "box-switching bounds must satisfy lo ≤ 0 < hi on both segments".into(),
            ));
        }
        Ok(StructuredSet::BoxSwitchingProduct {
            pairs,
            s_lo: clamp_bound(s_lo),
            s_hi: clamp_bound(s_hi),
            t_lo: clamp_bound(t_lo),
            t_hi: clamp_bound(t_hi),
        })
    }

    /// Complementarity pairs: `y_i, z_i ≥ 0`, `y_i z_i = 0`.
    pub fn complementarity(pairs: usize) -> Self {
        StructuredSet::box_switching(pairs, 0.0, f64::INFINITY, 0.0, f64::INFINITY).unwrap()
    }

    pub fn sparse_box(n: usize, kappa: usize, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if kappa == 0 || kappa >= n {
            return Err(Error::InvalidSet(format!(
                "sparse box needs 1 ≤ kappa ≤ n−1, got kappa={kappa}, n={n}"
            )));
        }
        if lo.len() != n || hi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: lo.len().max(hi.len()) });
        }
        let lo: Vec<f64> = lo.into_iter().map(clamp_bound).collect();
        let hi: Vec<f64> = hi.into_iter().map(clamp_bound).collect();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::InvalidSet("sparse box has lo > hi".into()));
        }
        let forced = forced_nonzero_count(&lo, &hi);
        if forced > kappa {
            return Err(Error::InfeasibleSparseBox { forced, kappa });
        }
        Ok(StructuredSet::SparseBox { n, kappa, lo, hi })
    }

    /// Unbounded sparsity set `S_κ ⊂ ℝⁿ`.
    pub fn sparse(n: usize, kappa: usize) -> Result<Self> {
        StructuredSet::sparse_box(n, kappa, vec![f64::NEG_INFINITY; n], vec![f64::INFINITY; n])
    }

    pub fn low_rank(rows: usize, cols: usize, kappa: usize) -> Result<Self> {
        if kappa == 0 || kappa > rows.min(cols) {
            return Err(Error::InvalidSet(format!(
                "low rank needs 1 ≤ kappa ≤ min(rows, cols), got kappa={kappa}"
            )));
        }
        Ok(StructuredSet::LowRank { rows, cols, kappa })
    }

    pub fn psd_low_rank(n: usize, kappa: usize) -> Result<Self> {
        if kappa == 0 || kappa > n {
            return Err(Error::InvalidSet(format!(
                "PSD low rank needs 1 ≤ kappa ≤ n, got kappa={kappa}, n={n}"
            )));
        }
        Ok(StructuredSet::PsdLowRank { n, kappa })
    }

    pub fn union(branches: Vec<ConvexSet>) -> Result<Self> {
        let first = branches
            .first()
            .ok_or_else(|| Error::InvalidSet("union needs at least one branch".into()))?;
        let dim = first.dim();
        if branches.iter().any(|b| b.dim() != dim) {
            return Err(Error::InvalidSet("union branches differ in dimension".into()));
        }
        Ok(StructuredSet::Union(branches))
    }

    pub fn product(blocks: Vec<StructuredSet>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidSet("product needs at least one block".into()));
        }
        Ok(StructuredSet::Product(blocks))
    }

    /// Number of stored coordinates of points in this set.
    pub fn dim(&self) -> usize {
        match self {
            StructuredSet::Box { lo, .. } => lo.len(),
            StructuredSet::BoxSwitchingProduct { pairs, .. } => 2 * pairs,
            StructuredSet::SparseBox { n, .. } => *n,
            StructuredSet::LowRank { rows, cols, .. } => rows * cols,
            StructuredSet::PsdLowRank { n, .. } => n * n,
            StructuredSet::Union(branches) => branches[0].dim(),
            StructuredSet::Product(blocks) => blocks.iter().map(|b| b.dim()).sum(),
        }
    }

    /// Exact Euclidean projection onto the set.
    ///
    /// Ties (pair branches, sparse supports, union branches, degenerate
    /// spectra) go to the lowest index. Panics if `w` has the wrong
    /// dimension; eigensolver failures are reported as errors.
    pub fn project(&self, w: &Point) -> Result<Point> {
        assert_eq!(w.dim(), self.dim(), "projection dimension mismatch");
        let mut out = w.data().to_vec();
        self.project_slice(w.data(), &mut out)?;
        Ok(Point::from_parts(w.shape(), out))
    }

    /// Euclidean distance from `w` to the set.
    pub fn dist(&self, w: &Point) -> Result<f64> {
        Ok((&self.project(w)? - w).norm())
    }

    /// Membership test up to `tol` (absolute, on the defining quantities).
    pub fn contains(&self, w: &Point, tol: f64) -> bool {
        assert_eq!(w.dim(), self.dim());
        self.contains_slice(w.data(), tol)
    }

    fn project_slice(&self, w: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            StructuredSet::Box { lo, hi } => {
                for i in 0..w.len() {
                    out[i] = w[i].clamp(lo[i], hi[i]);
                }
                Ok(())
            }
            StructuredSet::BoxSwitchingProduct { pairs, s_lo, s_hi, t_lo, t_hi } => {
                let m = *pairs;
                for i in 0..m {
                    let (y, z) = (w[i], w[m + i]);
                    let (py, pz) = project_pair(y, z, *s_lo, *s_hi, *t_lo, *t_hi);
                    out[i] = py;
                    out[m + i] = pz;
                }
                Ok(())
            }
            StructuredSet::SparseBox { n, kappa, lo, hi } => {
                project_sparse_box(w, *n, *kappa, lo, hi, out);
                Ok(())
            }
            StructuredSet::LowRank { rows, cols, kappa } => {
                project_low_rank(w, *rows, *cols, *kappa, out)
            }
            StructuredSet::PsdLowRank { n, kappa } => project_psd_low_rank(w, *n, *kappa, out),
            StructuredSet::Union(branches) => {
                project_union(branches, w, out);
                Ok(())
            }
            StructuredSet::Product(blocks) => {
                let mut offset = 0;
                for block in blocks {
                    let len = block.dim();
                    block.project_slice(&w[offset..offset + len], &mut out[offset..offset + len])?;
                    offset += len;
                }
                Ok(())
            }
        }
    }

    fn contains_slice(&self, w: &[f64], tol: f64) -> bool {
        match self {
            StructuredSet::Box { lo, hi } => w
                .iter()
                .enumerate()
                .all(|(i, &v)| v >= lo[i] - tol && v <= hi[i] + tol),
            StructuredSet::BoxSwitchingProduct { pairs, s_lo, s_hi, t_lo, t_hi } => {
                let m = *pairs;
                (0..m).all(|i| {
                    let (y, z) = (w[i], w[m + i]);
                    let on_s = z.abs() <= tol && y >= s_lo - tol && y <= s_hi + tol;
                    let on_t = y.abs() <= tol && z >= t_lo - tol && z <= t_hi + tol;
                    on_s || on_t
                })
            }
            StructuredSet::SparseBox { kappa, lo, hi, .. } => {
                let nonzeros = w.iter().filter(|v| v.abs() > tol).count();
                nonzeros <= *kappa
                    && w.iter()
                        .enumerate()
                        .all(|(i, &v)| v >= lo[i] - tol && v <= hi[i] + tol)
            }
            StructuredSet::LowRank { rows, cols, kappa } => {
                match eigen::singular_values(w, *rows, *cols) {
                    Ok(s) => numerical_rank_from_values(&s) <= *kappa,
                    Err(_) => false,
                }
            }
            StructuredSet::PsdLowRank { n, kappa } => {
                let m = symmetrized(w, *n);
                match eigen::sym_eigen(&m, *n) {
                    Ok(e) => {
                        let scale = e.values.first().map(|v| v.abs()).unwrap_or(0.0).max(1.0);
                        e.values.iter().all(|&l| l >= -tol * scale)
                            && numerical_rank_from_values(&e.values) <= *kappa
                    }
                    Err(_) => false,
                }
            }
            StructuredSet::Union(branches) => branches.iter().any(|b| {
                let p = Point::from_parts(Shape::Vector(w.len()), w.to_vec());
                b.dist(&p) <= tol
            }),
            StructuredSet::Product(blocks) => {
                let mut offset = 0;
                blocks.iter().all(|block| {
                    let len = block.dim();
                    let ok = block.contains_slice(&w[offset..offset + len], tol);
                    offset += len;
                    ok
                })
            }
        }
    }
}

/// Auxiliary vector `d_i(w) = w_i² − (P_{[lo_i,hi_i]}(w_i) − w_i)²`.
///
/// When `0 ∈ [lo_i, hi_i]` this is nonnegative and vanishes exactly when the
/// box projection of `w_i` is zero; it orders the components by how much
/// keeping them reduces the squared projection distance.
pub fn d_vector(w: &Point, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    assert_eq!(w.dim(), lo.len());
    assert_eq!(w.dim(), hi.len());
    w.data()
        .iter()
        .enumerate()
        .map(|(i, &v)| d_entry(v, lo[i], hi[i]))
        .collect()
}

fn d_entry(w: f64, lo: f64, hi: f64) -> f64 {
    let p = w.clamp(lo, hi);
    w * w - (p - w) * (p - w)
}

fn forced_nonzero_count(lo: &[f64], hi: &[f64]) -> usize {
    lo.iter().zip(hi).filter(|(&l, &h)| l > 0.0 || h < 0.0).count()
}

/// Projection of a single pair onto `[s_lo,s_hi]×{0} ∪ {0}×[t_lo,t_hi]`,
/// choosing the branch with smaller squared distance; the s-branch wins ties.
fn project_pair(y: f64, z: f64, s_lo: f64, s_hi: f64, t_lo: f64, t_hi: f64) -> (f64, f64) {
    let ps = y.clamp(s_lo, s_hi);
    let pt = z.clamp(t_lo, t_hi);
    let phi_s = (ps - y) * (ps - y) + z * z;
    let phi_t = y * y + (pt - z) * (pt - z);
    if phi_s <= phi_t {
        (ps, 0.0)
    } else {
        (0.0, pt)
    }
}

fn project_sparse_box(w: &[f64], n: usize, kappa: usize, lo: &[f64], hi: &[f64], out: &mut [f64]) {
    // Components whose box excludes zero are necessarily nonzero in any
    // feasible point; they are kept and reduce the remaining budget.
    let mut budget = kappa;
    let mut free: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        if lo[i] > 0.0 || hi[i] < 0.0 {
            out[i] = w[i].clamp(lo[i], hi[i]);
            budget -= 1;
        } else {
            out[i] = 0.0;
            free.push(i);
        }
    }
    // Keep the `budget` free components with the largest d-value,
    // lowest index first on ties.
    free.sort_by(|&a, &b| {
        let da = d_entry(w[a], lo[a], hi[a]);
        let db = d_entry(w[b], lo[b], hi[b]);
        db.partial_cmp(&da).unwrap().then(a.cmp(&b))
    });
    for &i in free.iter().take(budget) {
        out[i] = w[i].clamp(lo[i], hi[i]);
    }
}

fn project_low_rank(w: &[f64], rows: usize, cols: usize, kappa: usize, out: &mut [f64]) -> Result<()> {
    if kappa >= rows.min(cols) {
        out.copy_from_slice(w);
        return Ok(());
    }
    let eig = eigen::gram_eigen(w, rows, cols)?;
    if rows >= cols {
        // out = W · Σ_{j<κ} v_j v_jᵀ  (v_j right singular vectors)
        let p = spectral_projector(&eig, kappa);
        for r in 0..rows {
            for c in 0..cols {
                let mut s = 0.0;
                for k in 0..cols {
                    s += w[r * cols + k] * p[k * cols + c];
                }
                out[r * cols + c] = s;
            }
        }
    } else {
        // out = (Σ_{j<κ} u_j u_jᵀ) · W  (u_j left singular vectors)
        let p = spectral_projector(&eig, kappa);
        for r in 0..rows {
            for c in 0..cols {
                let mut s = 0.0;
                for k in 0..rows {
                    s += p[r * rows + k] * w[k * cols + c];
                }
                out[r * cols + c] = s;
            }
        }
    }
    Ok(())
}

/// Orthogonal projector onto the span of the first `kappa` eigenvectors.
fn spectral_projector(eig: &eigen::SymEigen, kappa: usize) -> Vec<f64> {
    let n = eig.n;
    let mut p = vec![0.0; n * n];
    for j in 0..kappa.min(n) {
        for r in 0..n {
            let vr = eig.vector_entry(r, j);
            for c in 0..n {
                p[r * n + c] += vr * eig.vector_entry(c, j);
            }
        }
    }
    p
}

fn project_psd_low_rank(w: &[f64], n: usize, kappa: usize, out: &mut [f64]) -> Result<()> {
    let m = symmetrized(w, n);
    let eig = eigen::sym_eigen(&m, n)?;
    out.fill(0.0);
    for j in 0..kappa {
        let l = eig.values[j].max(0.0);
        if l == 0.0 {
            // eigenvalues are sorted, nothing positive remains
            break;
        }
        for r in 0..n {
            let vr = eig.vector_entry(r, j);
            for c in 0..n {
                out[r * n + c] += l * vr * eig.vector_entry(c, j);
            }
        }
    }
    Ok(())
}

fn project_union(branches: &[ConvexSet], w: &[f64], out: &mut [f64]) {
    let point = Point::from_parts(Shape::Vector(w.len()), w.to_vec());
    let mut best: Option<(f64, Point)> = None;
    for branch in branches {
        let p = branch.project(&point);
        let d = (&p - &point).norm();
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, p));
        }
    }
    out.copy_from_slice(best.expect("union is nonempty").1.data());
}

fn symmetrized(w: &[f64], n: usize) -> Vec<f64> {
    let mut m = w.to_vec();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
    m
}
