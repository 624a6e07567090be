//! Benchmark problem builders: an MPCC with two minimizers, a
//! cardinality-constrained quadratic with ten known stationary points, the
//! optimal control of a discretized obstacle problem, cardinality-constrained
//! portfolio selection (with a boosted cardinality-homotopy driver), and the
//! rank-one SDP reformulation of MAXCUT together with its convex relaxation.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::alm::{alm_solve, AlmConfig, ProblemSpec, SolveResult};
use crate::convex::ConvexSet;
use crate::eigen;
use crate::error::{Error, Result};
use crate::nonconvex::StructuredSet;
use crate::space::{Point, Shape};

/// Undirected weighted graph with 1-based vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    pub n: usize,
    /// Edges `(i, j, weight)` with `i < j`. Weights may be negative.
    pub edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    /// Validates vertex indices, rejects self-loops and duplicate edges,
    /// and normalizes each edge to `i < j`.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        let mut seen = std::collections::HashSet::new();
        for (i, j, w) in edges {
            if i == j {
                return Err(Error::InvalidSet(format!("self-loop at vertex {i}")));
            }
            if i == 0 || j == 0 || i > n || j > n {
                return Err(Error::InvalidSet(format!(
                    "edge ({i},{j}) out of range for {n} vertices"
                )));
            }
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                return Err(Error::InvalidSet(format!("duplicate edge ({},{})", key.0, key.1)));
            }
            normalized.push((key.0, key.1, w));
        }
        Ok(Graph { n, edges: normalized })
    }

    /// Graph Laplacian `L = diag(Ae) − A` as a dense row-major matrix.
    pub fn laplacian(&self) -> Vec<f64> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for &(i, j, w) in &self.edges {
            let (a, b) = (i - 1, j - 1);
            l[a * n + b] -= w;
            l[b * n + a] -= w;
            l[a * n + a] += w;
            l[b * n + b] += w;
        }
        l
    }

    /// Total weight of the edges crossing the cut defined by `s`
    /// (1-based vertex ids).
    pub fn cut_weight(&self, s: &[usize]) -> f64 {
        let in_s: std::collections::HashSet<usize> = s.iter().copied().collect();
        self.edges
            .iter()
            .filter(|(i, j, _)| in_s.contains(i) != in_s.contains(j))
            .map(|&(_, _, w)| w)
            .sum()
    }
}

/// Data of a cardinality-constrained portfolio problem.
#[derive(Clone, Debug)]
pub struct PortfolioData {
    pub n: usize,
    /// Covariance matrix, dense row-major (symmetrized on construction).
    pub q: Vec<f64>,
    /// Mean returns.
    pub mu: Vec<f64>,
    /// Lower bound on the expected return.
    pub return_bound: f64,
    /// Per-asset upper bounds.
    pub u: Vec<f64>,
    pub kappa: usize,
}

impl PortfolioData {
    pub fn new(
        n: usize,
        q: Vec<f64>,
        mu: Vec<f64>,
        return_bound: f64,
        u: Vec<f64>,
        kappa: usize,
    ) -> Result<Self> {
        if q.len() != n * n || mu.len() != n || u.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: mu.len() });
        }
        if kappa == 0 || kappa >= n {
            return Err(Error::InvalidSet(format!(
                "portfolio needs 1 ≤ kappa ≤ n−1, got kappa={kappa}, n={n}"
            )));
        }
        if u.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidSet("portfolio upper bounds must be nonnegative".into()));
        }
        let mut q = q;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (q[i * n + j] + q[j * n + i]);
                q[i * n + j] = avg;
                q[j * n + i] = avg;
            }
        }
        Ok(PortfolioData { n, q, mu, return_bound, u, kappa })
    }

    /// Smallest eigenvalue of `Q`; callers may warn when it drops below
    /// `−10⁻⁸`.
    pub fn psd_defect(&self) -> Result<f64> {
        let eig = eigen::sym_eigen(&self.q, self.n)?;
        Ok(*eig.values.last().unwrap())
    }
}

/// Seeded random portfolio instance: `Q = MᵀM/n + 10⁻³ I` with standard
/// normal `M`, means uniform in `[0, 0.1]`, return bound half the average
/// mean, unit upper bounds.
pub fn synthetic_portfolio(n: usize, kappa: usize, seed: u64) -> PortfolioData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for k in 0..n {
                s += m[k * n + i] * m[k * n + j];
            }
            s /= n as f64;
            if i == j {
                s += 1e-3;
            }
            q[i * n + j] = s;
            q[j * n + i] = s;
        }
    }
    let mu: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.1)).collect();
    let return_bound = 0.5 * mu.iter().sum::<f64>() / n as f64;
    PortfolioData::new(n, q, mu, return_bound, vec![1.0; n], kappa).unwrap()
}

/// Two-dimensional MPCC with minimizers `(1,0)` and `(0,1)`:
/// `min ½(y−1)² + ½(z−1)²  s.t.  y+z ≤ 2,  (y,z) complementary`.
pub fn build_scholtes() -> ProblemSpec {
    ProblemSpec {
        name: "scholtes".into(),
        w_shape: Shape::Vector(2),
        dim_y: 1,
        f: Box::new(|w| {
            let (y, z) = (w.data()[0], w.data()[1]);
            0.5 * (y - 1.0).powi(2) + 0.5 * (z - 1.0).powi(2)
        }),
        grad_f: Box::new(|w| {
            Point::from_parts(w.shape(), vec![w.data()[0] - 1.0, w.data()[1] - 1.0])
        }),
        g: Box::new(|w| Point::from_parts(Shape::Vector(1), vec![w.data()[0] + w.data()[1] - 2.0])),
        g_adjoint: Box::new(|w, l| {
            let lam = l.data()[0];
            Point::from_parts(w.shape(), vec![lam, lam])
        }),
        c: ConvexSet::orthant_product(1, 0).unwrap(),
        d: StructuredSet::complementarity(1),
        references: vec![
            (Point::vector(vec![1.0, 0.0]).unwrap(), 0.5, "right minimizer".into()),
            (Point::vector(vec![0.0, 1.0]).unwrap(), 0.5, "upper minimizer".into()),
        ],
    }
}

/// The ten stationary points of the five-dimensional cardinality example,
/// with their objective values.
pub fn cardinality_stationary_points() -> Vec<(Point, f64, String)> {
    let pts: [(usize, [f64; 5]); 10] = [
        (1, [4.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0]),
        (2, [1.0, 0.0, 1.0, 0.0, 0.0]),
        (3, [-2.0, 0.0, 0.0, 7.0, 0.0]),
        (4, [1.0 / 3.0, 0.0, 0.0, 0.0, 7.0 / 3.0]),
        (5, [0.0, 1.0 / 3.0, 4.0 / 3.0, 0.0, 0.0]),
        (6, [0.0, -8.0 / 3.0, 0.0, 22.0 / 3.0, 0.0]),
        (7, [0.0, -1.0 / 3.0, 0.0, 0.0, 8.0 / 3.0]),
        (8, [0.0, 0.0, -2.0, 7.0, 0.0]),
        (9, [0.0, 0.0, 1.0 / 3.0, 0.0, 7.0 / 3.0]),
        (10, [0.0, 0.0, 0.0, 19.0 / 3.0, -2.0 / 3.0]),
    ];
    pts.iter()
        .map(|(idx, data)| {
            let w = Point::vector(data.to_vec()).unwrap();
            let f = cardinality_objective(&w);
            (w, f, format!("w{idx}"))
        })
        .collect()
}

fn cardinality_objective(w: &Point) -> f64 {
    // Q = E + I, c = −(3,2,3,12,5)
    let c = [-3.0, -2.0, -3.0, -12.0, -5.0];
    let sum: f64 = w.data().iter().sum();
    let quad = 0.5 * (sum * sum + w.inner(w));
    quad + w.data().iter().zip(&c).map(|(x, ci)| x * ci).sum::<f64>()
}

/// Five-dimensional quadratic over `S₂` with a known list of ten stationary
/// points: `min ½wᵀ(E+I)w − (3,2,3,12,5)w  s.t.  eᵀw ≤ 8, ‖w‖₀ ≤ 2`.
///
/// With `with_upper_bound` the fourth component is additionally constrained
/// to `w₄ ≤ 0`, which cuts the reference list down to the points feasible
/// for the tightened set.
pub fn build_cardinality_example(with_upper_bound: bool) -> ProblemSpec {
    let n = 5;
    let mut hi = vec![f64::INFINITY; n];
    if with_upper_bound {
        hi[3] = 0.0;
    }
    let d = StructuredSet::sparse_box(n, 2, vec![f64::NEG_INFINITY; n], hi).unwrap();
    let references = cardinality_stationary_points()
        .into_iter()
        .filter(|(w, _, _)| !with_upper_bound || w.data()[3] <= 0.0)
        .collect();
    ProblemSpec {
        name: if with_upper_bound { "cardinality-box".into() } else { "cardinality".into() },
        w_shape: Shape::Vector(n),
        dim_y: 1,
        f: Box::new(cardinality_objective),
        grad_f: Box::new(|w| {
            let c = [-3.0, -2.0, -3.0, -12.0, -5.0];
            let sum: f64 = w.data().iter().sum();
            let data = w
                .data()
                .iter()
                .zip(&c)
                .map(|(x, ci)| sum + x + ci)
                .collect();
            Point::from_parts(w.shape(), data)
        }),
        g: Box::new(|w| {
            Point::from_parts(Shape::Vector(1), vec![w.data().iter().sum::<f64>() - 8.0])
        }),
        g_adjoint: Box::new(|w, l| {
            Point::from_parts(w.shape(), vec![l.data()[0]; 5])
        }),
        c: ConvexSet::orthant_product(1, 0).unwrap(),
        d,
        references,
    }
}

/// Optimal control of a discretized obstacle problem on `n` grid points:
/// `w = (x, y, z) ∈ ℝ^{3n}`,
/// `min ½‖x‖² − eᵀy + ½‖y‖²  s.t.  −Ay − x + z = 0, x ≥ 0, (y,z) complementary`,
/// with `A` the tridiagonal second-difference matrix. The global minimizer
/// is `w = 0`.
pub fn build_obstacle(n: usize) -> ProblemSpec {
    assert!(n >= 2, "obstacle problem needs n >= 2");
    let d = StructuredSet::product(vec![
        StructuredSet::boxed(vec![0.0; n], vec![f64::INFINITY; n]).unwrap(),
        StructuredSet::complementarity(n),
    ])
    .unwrap();
    ProblemSpec {
        name: format!("obstacle:{n}"),
        w_shape: Shape::Vector(3 * n),
        dim_y: n,
        f: Box::new(move |w| {
            let x = &w.data()[..n];
            let y = &w.data()[n..2 * n];
            let xx: f64 = x.iter().map(|v| v * v).sum();
            let yy: f64 = y.iter().map(|v| v * v).sum();
            let ye: f64 = y.iter().sum();
            0.5 * xx - ye + 0.5 * yy
        }),
        grad_f: Box::new(move |w| {
            let mut data = vec![0.0; 3 * n];
            for i in 0..n {
                data[i] = w.data()[i];
                data[n + i] = w.data()[n + i] - 1.0;
            }
            Point::from_parts(w.shape(), data)
        }),
        g: Box::new(move |w| {
            let x = &w.data()[..n];
            let y = &w.data()[n..2 * n];
            let z = &w.data()[2 * n..];
            let mut data = vec![0.0; n];
            for i in 0..n {
                let mut ay = 2.0 * y[i];
                if i > 0 {
                    ay -= y[i - 1];
                }
                if i + 1 < n {
                    ay -= y[i + 1];
                }
                data[i] = -ay - x[i] + z[i];
            }
            Point::from_parts(Shape::Vector(n), data)
        }),
        g_adjoint: Box::new(move |w, l| {
            // G'(w) = [−I, −A, I] ⇒ G'(w)*λ = (−λ, −Aλ, λ)
            let lam = l.data();
            let mut data = vec![0.0; 3 * n];
            for i in 0..n {
                data[i] = -lam[i];
                let mut al = 2.0 * lam[i];
                if i > 0 {
                    al -= lam[i - 1];
                }
                if i + 1 < n {
                    al -= lam[i + 1];
                }
                data[n + i] = -al;
                data[2 * n + i] = lam[i];
            }
            Point::from_parts(w.shape(), data)
        }),
        c: ConvexSet::orthant_product(0, n).unwrap(),
        d,
        references: vec![(
            Point::zeros(Shape::Vector(3 * n)),
            0.0,
            "global minimizer".into(),
        )],
    }
}

/// Portfolio selection with a cardinality bound:
/// `min ½wᵀQw  s.t.  μᵀw ≥ ϱ, eᵀw = 1, w ∈ S_κ ∩ [0,u]`.
pub fn build_portfolio(data: &PortfolioData) -> ProblemSpec {
    let n = data.n;
    let q = Arc::new(data.q.clone());
    let q_grad = Arc::clone(&q);
    let mu = data.mu.clone();
    let mu_adj = data.mu.clone();
    let bound = data.return_bound;
    let d = StructuredSet::sparse_box(n, data.kappa, vec![0.0; n], data.u.clone()).unwrap();
    ProblemSpec {
        name: format!("portfolio:n={n},kappa={}", data.kappa),
        w_shape: Shape::Vector(n),
        dim_y: 2,
        f: Box::new(move |w| 0.5 * quadratic_form(&q, w.data())),
        grad_f: Box::new(move |w| Point::from_parts(w.shape(), mat_vec(&q_grad, w.data()))),
        g: Box::new(move |w| {
            let ret: f64 = mu.iter().zip(w.data()).map(|(m, x)| m * x).sum();
            let total: f64 = w.data().iter().sum();
            Point::from_parts(Shape::Vector(2), vec![bound - ret, total - 1.0])
        }),
        g_adjoint: Box::new(move |w, l| {
            let (l1, l2) = (l.data()[0], l.data()[1]);
            let data = mu_adj.iter().map(|m| -l1 * m + l2).collect();
            Point::from_parts(w.shape(), data)
        }),
        c: ConvexSet::orthant_product(1, 1).unwrap(),
        d,
        references: vec![],
    }
}

/// Same portfolio objective and constraints but without the cardinality
/// bound (`D = [0, u]`); the first stage of the boosted pipeline.
pub fn build_portfolio_convex(data: &PortfolioData) -> ProblemSpec {
    let mut p = build_portfolio(data);
    p.name = format!("portfolio-convex:n={}", data.n);
    p.d = StructuredSet::boxed(vec![0.0; data.n], data.u.clone()).unwrap();
    p
}

/// Cardinality levels visited by the boosted portfolio solve after the
/// convex stage: `n−10, n−20, …` while not undercutting `kappa`, then
/// `kappa` itself when not hit exactly.
pub fn boost_schedule(n: usize, kappa: usize) -> Vec<usize> {
    let mut levels = Vec::new();
    let mut level = n as i64 - 10;
    while level >= kappa as i64 && level >= 1 {
        levels.push(level as usize);
        level -= 10;
    }
    if levels.last() != Some(&kappa) {
        levels.push(kappa);
    }
    levels
}

/// Boosted portfolio solve: a convex run without the cardinality bound,
/// then a homotopy over decreasing cardinality levels, each stage warm
/// started from the projection of the previous solution.
pub fn boosted_portfolio_solve(data: &PortfolioData, cfg: &AlmConfig) -> Result<SolveResult> {
    let convex = build_portfolio_convex(data);
    let start = Point::zeros(Shape::Vector(data.n));
    let mut result = alm_solve(&convex, &start, cfg)?;

    for level in boost_schedule(data.n, data.kappa) {
        let mut stage_data = data.clone();
        stage_data.kappa = level;
        let stage = build_portfolio(&stage_data);
        let warm = result.w.clone();
        result = alm_solve(&stage, &warm, cfg)?;
    }
    Ok(result)
}

/// Rank-one SDP reformulation of MAXCUT on `g`, as a minimization:
/// `min −¼⟨L, W⟩  s.t.  diag W = e,  W ⪰ 0,  rank W ≤ 1`.
pub fn build_maxcut(g: &Graph) -> ProblemSpec {
    maxcut_spec(g, 1)
}

/// Convex SDP relaxation (the rank constraint dropped): `D` is the full PSD
/// cone.
pub fn build_maxcut_relaxation(g: &Graph) -> ProblemSpec {
    maxcut_spec(g, g.n)
}

fn maxcut_spec(g: &Graph, kappa: usize) -> ProblemSpec {
    let n = g.n;
    let l = Arc::new(g.laplacian());
    let l_grad = Arc::clone(&l);
    let neg_quarter_l = Point::from_parts(
        Shape::SymMatrix(n),
        l_grad.iter().map(|x| -0.25 * x).collect(),
    );
    ProblemSpec {
        name: if kappa == 1 { format!("maxcut:n={n}") } else { format!("maxcut-sdp:n={n}") },
        w_shape: Shape::SymMatrix(n),
        dim_y: n,
        f: Box::new(move |w| {
            -0.25 * l.iter().zip(w.data()).map(|(a, b)| a * b).sum::<f64>()
        }),
        grad_f: Box::new(move |_| neg_quarter_l.clone()),
        g: Box::new(move |w| {
            let data = (0..n).map(|i| w.data()[i * n + i]).collect();
            Point::from_parts(Shape::Vector(n), data)
        }),
        g_adjoint: Box::new(move |_, l| {
            let mut data = vec![0.0; n * n];
            for i in 0..n {
                data[i * n + i] = l.data()[i];
            }
            Point::from_parts(Shape::SymMatrix(n), data)
        }),
        c: ConvexSet::fixed_point(Point::vector(vec![1.0; n]).unwrap()),
        d: StructuredSet::psd_low_rank(n, kappa).unwrap(),
        references: vec![],
    }
}

/// Cut weight ¼⟨L, W⟩ of a MAXCUT iterate, i.e. the maximization objective.
pub fn maxcut_objective(g: &Graph, w: &Point) -> f64 {
    let l = g.laplacian();
    0.25 * l.iter().zip(w.data()).map(|(a, b)| a * b).sum::<f64>()
}

/// Extracts the cut encoded by a (numerically) rank-one PSD matrix.
///
/// The leading eigenvector `v` is sign-normalized so that its first nonzero
/// component is positive; the cut is `S = {i : v_i > 0}` and the returned
/// weight is recomputed combinatorially from the graph.
pub fn cut_from_rank1(g: &Graph, w: &Point) -> Result<(Vec<usize>, f64)> {
    let n = g.n;
    assert_eq!(w.dim(), n * n, "matrix size does not match the graph");
    let eig = eigen::sym_eigen(w.data(), n)?;
    let rank = eigen::numerical_rank_from_values(&eig.values);
    if rank != 1 {
        return Err(Error::NotRankOne { rank });
    }
    let mut v = eig.vector(0);
    if let Some(first) = v.iter().find(|x| **x != 0.0) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let s: Vec<usize> = (0..n).filter(|&i| v[i] > 0.0).map(|i| i + 1).collect();
    let weight = g.cut_weight(&s);
    Ok((s, weight))
}

/// Numerical rank of a symmetric matrix: eigenvalues above
/// `10⁻⁸·max(|λ|_max, 1)` in magnitude.
pub fn numerical_rank(w: &Point) -> Result<usize> {
    let (n, data) = w
        .as_sym()
        .expect("numerical_rank needs a symmetric matrix point");
    let eig = eigen::sym_eigen(data, n)?;
    Ok(eigen::numerical_rank_from_values(&eig.values))
}

fn quadratic_form(q: &[f64], w: &[f64]) -> f64 {
    let n = w.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += q[i * n + j] * w[j];
        }
        s += w[i] * row;
    }
    s
}

fn mat_vec(q: &[f64], w: &[f64]) -> Vec<f64> {
    let n = w.len();
    (0..n)
        .map(|i| (0..n).map(|j| q[i * n + j] * w[j]).sum())
        .collect()
}
