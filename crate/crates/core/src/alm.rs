//! Safeguarded augmented Lagrangian outer loop.
//!
//! For `min f(w) s.t. G(w) ∈ C, w ∈ D` the method penalizes only `G(w) ∈ C`
//! through
//!
//! ```text
//!     L_ρ(w, λ) = f(w) + (ρ/2)·d_C²(G(w) + λ/ρ)
//! ```
//!
//! and keeps `w ∈ D` in the subproblems, which are handed to the spectral
//! gradient method. The multiplier estimate fed into the subproblem is the
//! clamp of the previous multiplier onto a bounded safeguard box, and the
//! penalty grows by a factor `β` whenever the infeasibility-plus-
//! complementarity measure `V` fails to shrink by the factor `η`.

use crate::convex::{clamp_to_box, safeguard_box_for, ConvexSet};
use crate::error::Result;
use crate::nonconvex::StructuredSet;
use crate::space::{Point, Shape};
use crate::spg::{spg_minimize, SpgConfig, SpgResult, SpgSink};

/// A problem instance `min f(w) s.t. G(w) ∈ C, w ∈ D`.
///
/// `g_adjoint` applies the adjoint of the constraint Jacobian:
/// `(w, λ) ↦ G′(w)*λ`.
pub struct ProblemSpec {
    pub name: String,
    pub w_shape: Shape,
    pub dim_y: usize,
    pub f: Box<dyn Fn(&Point) -> f64 + Send + Sync>,
    pub grad_f: Box<dyn Fn(&Point) -> Point + Send + Sync>,
    pub g: Box<dyn Fn(&Point) -> Point + Send + Sync>,
    pub g_adjoint: Box<dyn Fn(&Point, &Point) -> Point + Send + Sync>,
    pub c: ConvexSet,
    pub d: StructuredSet,
    /// Known stationary points `(w, f(w), label)`, when available.
    pub references: Vec<(Point, f64, String)>,
}

impl ProblemSpec {
    pub fn f(&self, w: &Point) -> f64 {
        (self.f)(w)
    }
    pub fn grad_f(&self, w: &Point) -> Point {
        (self.grad_f)(w)
    }
    pub fn g(&self, w: &Point) -> Point {
        (self.g)(w)
    }
    pub fn g_adjoint(&self, w: &Point, lambda: &Point) -> Point {
        (self.g_adjoint)(w, lambda)
    }
}

/// Parameters of the outer loop. Defaults are the standard experimental
/// values (β = 10, η = 0.8, tolerance 10⁻⁴ with the inner tolerance shrinking
/// as 10⁻⁴/√(k+1)).
#[derive(Clone, Debug)]
pub struct AlmConfig {
    pub beta: f64,
    pub eta: f64,
    /// Outer stopping tolerance on `V` (max-norm).
    pub outer_tol: f64,
    /// Base of the inner tolerance schedule `inner_tol_base / √(k+1)`.
    pub inner_tol_base: f64,
    pub max_outer: usize,
    /// Penalty override; computed from the start point when absent.
    pub rho0_override: Option<f64>,
    /// Multiplier safeguard box override; derived from `C` when absent.
    pub safeguard_box: Option<(Vec<f64>, Vec<f64>)>,
    /// Subproblem solver parameters (`inner_tol` is overwritten per
    /// iteration by the schedule).
    pub spg: SpgConfig,
    /// Recorded for reproducibility of callers that draw start points.
    pub seed: u64,
}

impl Default for AlmConfig {
    fn default() -> Self {
        AlmConfig {
            beta: 10.0,
            eta: 0.8,
            outer_tol: 1e-4,
            inner_tol_base: 1e-4,
            max_outer: 100,
            rho0_override: None,
            safeguard_box: None,
            spg: SpgConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    /// `V_{ρ_{k−1}}(w^k, u^{k−1}) ≤ outer_tol`: the iterate, multiplier and
    /// perturbation pair certify approximate AM-stationarity.
    AmStationary,
    /// The penalty diverged while `V` stagnated; the returned point is
    /// (approximately) M-stationary for the feasibility problem
    /// `min ½ d_C²(G(w)) s.t. w ∈ D`.
    InfeasibleStationary,
    IterCap,
}

/// One row of the iteration log (the classic k / j / j_cum / f-ev table).
#[derive(Clone, Debug, PartialEq)]
pub struct AlmIterRecord {
    /// Outer iteration (1-based; row `k` describes `w^k`).
    pub k: usize,
    /// Subproblem iterations taken for this row.
    pub j: usize,
    /// Cumulative subproblem iterations.
    pub j_cum: usize,
    /// Cumulative objective evaluations.
    pub f_evals: usize,
    pub f_value: f64,
    /// `V_{ρ_{k−1}}(w^k, u^{k−1})` in the max-norm.
    pub v: f64,
    /// Final stepsize `t_j = 1/γ_j` of the subproblem.
    pub t_j: f64,
    /// Penalty parameter used in the subproblem that produced `w^k`.
    pub rho: f64,
}

/// Full state after an outer iteration; kept for diagnostics and invariant
/// checks (iterates are desk-scale, so storing them is cheap).
#[derive(Clone, Debug)]
pub struct AlmStep {
    pub k: usize,
    pub w: Point,
    pub u: Point,
    pub lambda: Point,
    pub rho: f64,
    pub v: f64,
    /// Realized subproblem residual (max-norm bound on the inexactness ε).
    pub epsilon: f64,
}

/// Result of [`alm_solve`].
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub w: Point,
    pub lambda: Point,
    /// Safeguarded multiplier used in the final subproblem.
    pub u: Point,
    /// Penalty parameter used in the final subproblem.
    pub rho: f64,
    /// Final `V` value (max-norm); `‖z‖_∞` of the certificate.
    pub v: f64,
    /// Constraint perturbation `z = G(w) − P_C(G(w) + u/ρ)`.
    pub z: Point,
    /// Realized inexactness bound: the final subproblem residual.
    pub epsilon: f64,
    pub outer_iters: usize,
    pub records: Vec<AlmIterRecord>,
    pub steps: Vec<AlmStep>,
    /// Projected-gradient residual of the feasibility problem, filled in for
    /// [`SolveStatus::InfeasibleStationary`].
    pub feasibility_residual: Option<f64>,
}

impl SolveResult {
    pub fn f_value(&self, p: &ProblemSpec) -> f64 {
        p.f(&self.w)
    }
}

/// Augmented Lagrangian value `L_ρ(w, λ) = f(w) + (ρ/2)·d_C²(G(w) + λ/ρ)`.
pub fn aug_lag_value(p: &ProblemSpec, w: &Point, lambda: &Point, rho: f64) -> f64 {
    assert!(rho > 0.0);
    let shifted = p.g(w).add_scaled(1.0 / rho, lambda);
    let dist = p.c.dist(&shifted);
    p.f(w) + 0.5 * rho * dist * dist
}

/// Shifted constraint residual `G(w) + λ/ρ − P_C(G(w) + λ/ρ)`.
fn shifted_residual(p: &ProblemSpec, w: &Point, lambda: &Point, rho: f64) -> Point {
    let shifted = p.g(w).add_scaled(1.0 / rho, lambda);
    &shifted - &p.c.project(&shifted)
}

/// Gradient `∇_w L_ρ(w, λ) = ∇f(w) + G′(w)*(ρ·[G(w)+λ/ρ − P_C(…)])`.
///
/// The bracket times ρ is exactly the multiplier update, so the identity
/// `∇_w L_ρ(w, u) = ∇f(w) + G′(w)*λ⁺` holds by construction.
pub fn aug_lag_grad(p: &ProblemSpec, w: &Point, lambda: &Point, rho: f64) -> Point {
    assert!(rho > 0.0);
    let lam_next = shifted_residual(p, w, lambda, rho).scale(rho);
    &p.grad_f(w) + &p.g_adjoint(w, &lam_next)
}

/// Infeasibility-plus-complementarity measure
/// `V_ρ(w, u) = ‖G(w) − P_C(G(w) + u/ρ)‖_∞`.
pub fn v_measure(p: &ProblemSpec, w: &Point, u: &Point, rho: f64) -> f64 {
    assert!(rho > 0.0);
    infeasibility_perturbation(p, w, u, rho).norm_inf()
}

/// The perturbation `z = G(w) − P_C(G(w) + u/ρ)` of the stationarity
/// certificate.
pub fn infeasibility_perturbation(p: &ProblemSpec, w: &Point, u: &Point, rho: f64) -> Point {
    let gw = p.g(w);
    let shifted = gw.add_scaled(1.0 / rho, u);
    &gw - &p.c.project(&shifted)
}

/// Multiplier update `λ⁺ = ρ·[G(w) + u/ρ − P_C(G(w) + u/ρ)]`.
///
/// By construction `λ⁺` lies in the normal cone to `C` at the projected
/// point; on inequality rows its components are nonnegative.
pub fn multiplier_update(p: &ProblemSpec, w: &Point, u: &Point, rho: f64) -> Point {
    assert!(rho > 0.0);
    shifted_residual(p, w, u, rho).scale(rho)
}

/// Penalty start value
/// `ρ₀ = P_{[10⁻³,10³]}( 10·max(1, f(w⁰)) / max(1, ½·d_C²(G(w⁰))) )`.
pub fn initial_penalty(p: &ProblemSpec, w0: &Point) -> f64 {
    let fval = p.f(w0);
    let dist = p.c.dist(&p.g(w0));
    let denom = (0.5 * dist * dist).max(1.0);
    (10.0 * fval.max(1.0) / denom).clamp(1e-3, 1e3)
}

/// Clamp of a multiplier onto the safeguard box.
pub fn safeguard(lambda: &Point, lo: &[f64], hi: &[f64]) -> Point {
    clamp_to_box(lambda, lo, hi)
}

/// Runs the safeguarded augmented Lagrangian method from `w_start`
/// (projected onto `D` first).
pub fn alm_solve(p: &ProblemSpec, w_start: &Point, cfg: &AlmConfig) -> Result<SolveResult> {
    alm_solve_with(p, w_start, cfg, &mut ())
}

/// [`alm_solve`] with a subproblem sink receiving every spectral gradient
/// trial point.
pub fn alm_solve_with<S: SpgSink>(
    p: &ProblemSpec,
    w_start: &Point,
    cfg: &AlmConfig,
    sink: &mut S,
) -> Result<SolveResult> {
    let mut w = p.d.project(w_start)?;
    let (sg_lo, sg_hi) = cfg
        .safeguard_box
        .clone()
        .unwrap_or_else(|| safeguard_box_for(&p.c));
    let mut rho = cfg.rho0_override.unwrap_or_else(|| initial_penalty(p, &w));
    let mut u = Point::zeros(Shape::Vector(p.dim_y));
    let mut lambda = Point::zeros(Shape::Vector(p.dim_y));

    let mut records: Vec<AlmIterRecord> = Vec::new();
    let mut steps: Vec<AlmStep> = Vec::new();
    let mut j_cum = 0usize;
    let mut fev_cum = 0usize;
    let mut v_prev: Option<f64> = None;
    let mut epsilon = f64::INFINITY;
    let mut z = Point::zeros(Shape::Vector(p.dim_y));
    // streak of consecutive penalty increases, for the divergence detector
    let mut streak: Vec<f64> = Vec::new();

    for k in 0..cfg.max_outer {
        if let Some(v) = v_prev {
            if v <= cfg.outer_tol {
                return Ok(finish(SolveStatus::AmStationary, w, lambda, u, rho, v, z, epsilon, k, records, steps, None));
            }
        }

        // u^k: clamp of λ^k onto the safeguard box (λ⁰ = 0 gives u⁰ = 0)
        u = safeguard(&lambda, &sg_lo, &sg_hi);

        let mut spg_cfg = cfg.spg.clone();
        spg_cfg.inner_tol = cfg.inner_tol_base / ((k + 1) as f64).sqrt();
        let objective = |x: &Point| {
            (
                aug_lag_value(p, x, &u, rho),
                aug_lag_grad(p, x, &u, rho),
            )
        };
        let sub: SpgResult = spg_minimize(&objective, &p.d, w.clone(), &spg_cfg, sink)?;
        j_cum += sub.outer_iters;
        fev_cum += sub.function_evals;

        let w_next = sub.w;
        epsilon = sub.residual;
        lambda = multiplier_update(p, &w_next, &u, rho);
        z = infeasibility_perturbation(p, &w_next, &u, rho);
        let v_k = z.norm_inf();

        records.push(AlmIterRecord {
            k: k + 1,
            j: sub.outer_iters,
            j_cum,
            f_evals: fev_cum,
            f_value: p.f(&w_next),
            v: v_k,
            t_j: 1.0 / sub.last_gamma,
            rho,
        });
        steps.push(AlmStep {
            k: k + 1,
            w: w_next.clone(),
            u: u.clone(),
            lambda: lambda.clone(),
            rho,
            v: v_k,
            epsilon,
        });

        let keep = k == 0 || v_k <= cfg.eta * v_prev.unwrap();
        let rho_used = rho;
        if keep {
            streak.clear();
        } else {
            rho *= cfg.beta;
            streak.push(v_k);
        }
        w = w_next;
        v_prev = Some(v_k);

        // Divergence: penalty beyond 1e12 while three consecutive increases
        // shaved less than 1% off V.
        if rho > 1e12 && streak.len() >= 3 {
            let v_then = streak[streak.len() - 3];
            if v_k > 0.99 * v_then {
                let feas = feasibility_residual(p, &w)?;
                return Ok(finish(
                    SolveStatus::InfeasibleStationary,
                    w, lambda, u, rho_used, v_k, z, epsilon, k + 1, records, steps, Some(feas),
                ));
            }
        }
    }

    let v = v_prev.unwrap_or(f64::INFINITY);
    Ok(finish(SolveStatus::IterCap, w, lambda, u, rho, v, z, epsilon, cfg.max_outer, records, steps, None))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    status: SolveStatus,
    w: Point,
    lambda: Point,
    u: Point,
    rho: f64,
    v: f64,
    z: Point,
    epsilon: f64,
    outer_iters: usize,
    records: Vec<AlmIterRecord>,
    steps: Vec<AlmStep>,
    feasibility_residual: Option<f64>,
) -> SolveResult {
    SolveResult {
        status,
        w,
        lambda,
        u,
        rho,
        v,
        z,
        epsilon,
        outer_iters,
        records,
        steps,
        feasibility_residual,
    }
}

/// One-step projected-gradient residual of the feasibility problem
/// `min ½ d_C²(G(w)) s.t. w ∈ D` at `w` (γ = 1).
fn feasibility_residual(p: &ProblemSpec, w: &Point) -> Result<f64> {
    let grad = |x: &Point| {
        let gx = p.g(x);
        let resid = &gx - &p.c.project(&gx);
        p.g_adjoint(x, &resid)
    };
    let g_w = grad(w);
    let trial = p.d.project(&w.add_scaled(-1.0, &g_w))?;
    let g_trial = grad(&trial);
    let mut r = 0.0f64;
    for i in 0..w.dim() {
        let v = (w.data()[i] - trial.data()[i]) + g_trial.data()[i] - g_w.data()[i];
        r = r.max(v.abs());
    }
    Ok(r)
}

/// Summary of the stationarity certificate carried by a [`SolveResult`].
#[derive(Clone, Debug)]
pub struct StationarityReport {
    pub status: SolveStatus,
    /// `‖z‖_∞`, recomputed from the stored `(w, u, ρ)`.
    pub z_norm_inf: f64,
    /// Final subproblem residual (inexactness bound `ε`).
    pub epsilon: f64,
    pub lambda_norm_inf: f64,
    /// Euclidean distance of `G(w)` to `C`.
    pub dist_c: f64,
    pub rho: f64,
    pub f_value: f64,
    pub feasibility_residual: Option<f64>,
}

/// Recomputes the certificate quantities of a finished solve.
pub fn stationarity_report(p: &ProblemSpec, result: &SolveResult) -> StationarityReport {
    let z = infeasibility_perturbation(p, &result.w, &result.u, result.rho);
    StationarityReport {
        status: result.status,
        z_norm_inf: z.norm_inf(),
        epsilon: result.epsilon,
        lambda_norm_inf: result.lambda.norm_inf(),
        dist_c: p.c.dist(&p.g(&result.w)),
        rho: result.rho,
        f_value: p.f(&result.w),
        feasibility_residual: result.feasibility_residual,
    }
}

impl std::fmt::Display for StationarityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "status:        {:?}", self.status)?;
        writeln!(f, "f(w):          {:.10e}", self.f_value)?;
        writeln!(f, "|z|_inf:       {:.4e}", self.z_norm_inf)?;
        writeln!(f, "epsilon:       {:.4e}", self.epsilon)?;
        writeln!(f, "|lambda|_inf:  {:.4e}", self.lambda_norm_inf)?;
        writeln!(f, "dist_C(G(w)):  {:.4e}", self.dist_c)?;
        write!(f, "rho:           {:.4e}", self.rho)?;
        if let Some(r) = self.feasibility_residual {
            write!(f, "\nfeasibility residual: {:.4e}", r)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(v: &[f64]) -> Point {
        Point::vector(v.to_vec()).unwrap()
    }

    /// 1-D test problem: min f(w) = 0 s.t. w ∈ C = {0}, D = ℝ (wide box),
    /// G(w) = w.
    fn scalar_problem() -> ProblemSpec {
        ProblemSpec {
            name: "scalar".into(),
            w_shape: Shape::Vector(1),
            dim_y: 1,
            f: Box::new(|_| 0.0),
            grad_f: Box::new(|w| Point::zeros(w.shape())),
            g: Box::new(|w| w.clone()),
            g_adjoint: Box::new(|_, l| l.clone()),
            c: ConvexSet::orthant_product(0, 1).unwrap(),
            d: StructuredSet::boxed(vec![f64::NEG_INFINITY], vec![f64::INFINITY]).unwrap(),
            references: vec![],
        }
    }

    #[test]
    fn aug_lag_value_examples() {
        let p = scalar_problem();
        // feasible point, λ = 0: L = f
        assert_eq!(aug_lag_value(&p, &pt(&[0.0]), &pt(&[0.0]), 2.0), 0.0);
        // w = 1, λ = 0, ρ = 2: (2/2)·1² = 1
        assert_eq!(aug_lag_value(&p, &pt(&[1.0]), &pt(&[0.0]), 2.0), 1.0);
        // λ = 2 shifts by λ/ρ: (2/2)·(1+1)² = 4
        assert_eq!(aug_lag_value(&p, &pt(&[1.0]), &pt(&[2.0]), 2.0), 4.0);
    }

    #[test]
    fn v_measure_examples() {
        let p = scalar_problem();
        // C = {0}: P_C(0.6) = 0 → V = 0.5
        assert_eq!(v_measure(&p, &pt(&[0.5]), &pt(&[1.0]), 10.0), 0.5);
        // feasible point with u = 0
        assert_eq!(v_measure(&p, &pt(&[0.0]), &pt(&[0.0]), 10.0), 0.0);

        let mut q = scalar_problem();
        q.c = ConvexSet::orthant_product(1, 0).unwrap();
        // C = ℝ₋: P_C(−0.5) = −0.5 → V = ‖−1 − (−0.5)‖ = 0.5
        assert_eq!(v_measure(&q, &pt(&[-1.0]), &pt(&[0.5]), 1.0), 0.5);
    }

    #[test]
    fn multiplier_update_examples() {
        let p = scalar_problem();
        assert_eq!(multiplier_update(&p, &pt(&[0.5]), &pt(&[1.0]), 10.0).data(), &[6.0]);

        let mut q = scalar_problem();
        q.c = ConvexSet::orthant_product(1, 0).unwrap();
        // strictly feasible inequality, u = 0 → λ⁺ = 0
        assert_eq!(multiplier_update(&q, &pt(&[-1.0]), &pt(&[0.0]), 10.0).data(), &[0.0]);
        // violated inequality: λ⁺ = ρ·G = 10
        assert_eq!(multiplier_update(&q, &pt(&[1.0]), &pt(&[0.0]), 10.0).data(), &[10.0]);
    }

    #[test]
    fn initial_penalty_examples() {
        // feasible start with f = 0 → 10
        let p = scalar_problem();
        assert_eq!(initial_penalty(&p, &pt(&[0.0])), 10.0);

        // large f clamps at 10³
        let mut q = scalar_problem();
        q.f = Box::new(|_| 1e4);
        q.g = Box::new(|w| w.add_scaled(0.0, w)); // still w
        assert_eq!(initial_penalty(&q, &pt(&[2.0_f64.sqrt()])), 1e3);

        // f = −5, ½d² = 50 → 10·1/50 = 0.2
        let mut r = scalar_problem();
        r.f = Box::new(|_| -5.0);
        assert_eq!(initial_penalty(&r, &pt(&[10.0])), 0.2);
    }

    #[test]
    fn safeguard_examples() {
        let lo = vec![-1e20, -1e20];
        let hi = vec![1e20, 1e20];
        assert_eq!(safeguard(&pt(&[5.0, -3.0]), &lo, &hi).data(), &[5.0, -3.0]);
        let ineq_lo = vec![0.0];
        let ineq_hi = vec![1e20];
        assert_eq!(safeguard(&pt(&[-2.0]), &ineq_lo, &ineq_hi).data(), &[0.0]);
        assert_eq!(safeguard(&pt(&[1e25]), &ineq_lo, &ineq_hi).data(), &[1e20]);
    }

    #[test]
    fn gradient_matches_multiplier_identity() {
        let p = scalar_problem();
        for &(w, u, rho) in &[(0.7, 0.3, 2.0), (-1.4, 1.0, 10.0), (3.0, -2.0, 0.5)] {
            let w = pt(&[w]);
            let u = pt(&[u]);
            let grad = aug_lag_grad(&p, &w, &u, rho);
            let lam = multiplier_update(&p, &w, &u, rho);
            let rhs = &p.grad_f(&w) + &p.g_adjoint(&w, &lam);
            assert_eq!(grad, rhs);
        }
    }

    #[test]
    fn solves_trivial_equality_problem() {
        // min ½(w−2)² s.t. w = 1 (D = ℝ): KKT point w = 1
        let p = ProblemSpec {
            name: "eq".into(),
            w_shape: Shape::Vector(1),
            dim_y: 1,
            f: Box::new(|w| 0.5 * (w.data()[0] - 2.0).powi(2)),
            grad_f: Box::new(|w| pt(&[w.data()[0] - 2.0])),
            g: Box::new(|w| pt(&[w.data()[0] - 1.0])),
            g_adjoint: Box::new(|_, l| l.clone()),
            c: ConvexSet::orthant_product(0, 1).unwrap(),
            d: StructuredSet::boxed(vec![f64::NEG_INFINITY], vec![f64::INFINITY]).unwrap(),
            references: vec![],
        };
        let res = alm_solve(&p, &pt(&[0.0]), &AlmConfig::default()).unwrap();
        assert_eq!(res.status, SolveStatus::AmStationary);
        assert!((res.w.data()[0] - 1.0).abs() < 1e-3);
        assert!(res.v <= 1e-4);
        // multiplier approaches the exact value 1
        assert!((res.lambda.data()[0] - 1.0).abs() < 0.1);
        // penalty ladder: log_β(ρ/ρ₀) is an integer
        let rho0 = res.records[0].rho;
        for r in &res.records {
            let steps = (r.rho / rho0).log10();
            assert!((steps - steps.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn report_matches_stored_certificate() {
        let p = scalar_problem();
        let res = alm_solve(&p, &pt(&[0.7]), &AlmConfig::default()).unwrap();
        let rep = stationarity_report(&p, &res);
        assert_eq!(rep.z_norm_inf, res.z.norm_inf());
        assert_eq!(rep.epsilon, res.epsilon);
        assert!(rep.z_norm_inf <= 1e-4);
    }
}
