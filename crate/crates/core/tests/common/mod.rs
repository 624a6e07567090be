//! Shared helpers and independent oracles for the integration tests.
//!
//! The oracles deliberately avoid the library's projection code paths:
//! sparse-box projections are checked against enumeration over supports,
//! pair projections against the two-branch distance formula, and PSD
//! rank-one projections against a refined grid search over unit vectors.

#![allow(dead_code)]

use geoalm::instances::Graph;
use geoalm::Point;

/// The five-vertex example graph with maximum cut {1, 3} of weight 12.
pub fn five_vertex_graph() -> Graph {
    Graph::new(
        5,
        vec![
            (1, 2, 2.0),
            (2, 3, 3.0),
            (3, 4, 1.0),
            (5, 1, 1.0),
            (2, 5, 1.0),
            (1, 4, 2.0),
            (3, 5, 3.0),
        ],
    )
    .unwrap()
}

fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.min(hi).max(lo)
}

/// Minimal squared distance from `w` to `S_κ ∩ [lo, hi]` by enumerating all
/// supports of size κ that contain every component whose box excludes zero.
pub fn sparse_box_bruteforce_dist2(w: &[f64], kappa: usize, lo: &[f64], hi: &[f64]) -> f64 {
    let n = w.len();
    let forced: Vec<usize> = (0..n).filter(|&i| lo[i] > 0.0 || hi[i] < 0.0).collect();
    assert!(forced.len() <= kappa, "infeasible oracle instance");
    let free: Vec<usize> = (0..n).filter(|i| !forced.contains(i)).collect();
    let extra = kappa - forced.len();

    let mut best = f64::INFINITY;
    for mask in subsets(free.len(), extra) {
        let mut support = forced.clone();
        for (pos, &idx) in free.iter().enumerate() {
            if mask & (1 << pos) != 0 {
                support.push(idx);
            }
        }
        let mut d2 = 0.0;
        for i in 0..n {
            let target = if support.contains(&i) {
                clamp(w[i], lo[i], hi[i])
            } else {
                0.0
            };
            d2 += (w[i] - target) * (w[i] - target);
        }
        best = best.min(d2);
    }
    best
}

/// All bitmasks over `n` elements with exactly `k` bits set.
fn subsets(n: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            out.push(mask);
        }
    }
    out
}

/// Squared distance from `(y, z)` to the union of the two segments
/// `[s_lo, s_hi]×{0}` and `{0}×[t_lo, t_hi]`.
pub fn pair_branch_min_dist2(y: f64, z: f64, s_lo: f64, s_hi: f64, t_lo: f64, t_hi: f64) -> f64 {
    let ps = clamp(y, s_lo, s_hi);
    let pt = clamp(z, t_lo, t_hi);
    let phi_s = (ps - y) * (ps - y) + z * z;
    let phi_t = y * y + (pt - z) * (pt - z);
    phi_s.min(phi_t)
}

/// Distance from a symmetric 2×2 or 3×3 matrix to the PSD rank-one cone,
/// by maximizing the Rayleigh quotient over a refined angle grid.
///
/// With `t ≥ 0` and a unit vector `v`, `‖W − t·vvᵀ‖²` is minimized at
/// `t = max(vᵀWv, 0)`, so the distance is
/// `sqrt(‖W‖² − max(max_v vᵀWv, 0)²)`.
pub fn psd_rank1_grid_distance(w: &[f64], n: usize) -> f64 {
    assert!(n == 2 || n == 3);
    let norm2: f64 = w.iter().map(|x| x * x).sum();
    let best_q = match n {
        2 => grid_max_2(w),
        _ => grid_max_3(w),
    };
    let t = best_q.max(0.0);
    (norm2 - t * t).max(0.0).sqrt()
}

fn rayleigh(w: &[f64], n: usize, v: &[f64]) -> f64 {
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += v[i] * w[i * n + j] * v[j];
        }
    }
    q
}

fn grid_max_2(w: &[f64]) -> f64 {
    let mut lo = 0.0;
    let mut hi = std::f64::consts::PI;
    let mut best_q = f64::NEG_INFINITY;
    let mut best_t = 0.0;
    for _level in 0..5 {
        let steps = 400;
        let h = (hi - lo) / steps as f64;
        for s in 0..=steps {
            let theta: f64 = lo + s as f64 * h;
            let v = [theta.cos(), theta.sin()];
            let q = rayleigh(w, 2, &v);
            if q > best_q {
                best_q = q;
                best_t = theta;
            }
        }
        lo = best_t - 2.0 * h;
        hi = best_t + 2.0 * h;
    }
    best_q
}

fn grid_max_3(w: &[f64]) -> f64 {
    let pi = std::f64::consts::PI;
    let (mut t_lo, mut t_hi) = (0.0, pi);
    let (mut p_lo, mut p_hi) = (0.0, 2.0 * pi);
    let mut best_q = f64::NEG_INFINITY;
    let (mut best_t, mut best_p) = (0.0, 0.0);
    for level in 0..6 {
        let steps = if level == 0 { 180 } else { 40 };
        let ht = (t_hi - t_lo) / steps as f64;
        let hp = (p_hi - p_lo) / steps as f64;
        for a in 0..=steps {
            let theta: f64 = t_lo + a as f64 * ht;
            for b in 0..=steps {
                let phi: f64 = p_lo + b as f64 * hp;
                let v = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
                let q = rayleigh(w, 3, &v);
                if q > best_q {
                    best_q = q;
                    best_t = theta;
                    best_p = phi;
                }
            }
        }
        t_lo = best_t - 2.0 * ht;
        t_hi = best_t + 2.0 * ht;
        p_lo = best_p - 2.0 * hp;
        p_hi = best_p + 2.0 * hp;
    }
    best_q
}

/// Max-norm distance between a point and a reference slice.
pub fn max_norm_to(w: &Point, reference: &[f64]) -> f64 {
    w.data()
        .iter()
        .zip(reference)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}
