//! Nonmonotone spectral projected gradient method over a structured set.
//!
//! Minimizes a smooth `φ` over `D` by projecting Barzilai–Borwein trial steps
//! onto `D` and accepting them against the maximum of the last `m+1` function
//! values (the nonmonotone Armijo rule). The stationarity residual
//!
//! ```text
//!     ‖γ_{j,i}(wʲ − w^{j,i}) + ∇φ(w^{j,i}) − ∇φ(wʲ)‖_∞
//! ```
//!
//! is evaluated for every trial point inside the backtracking loop and stops
//! the method as soon as it falls below the tolerance; at that moment the
//! trial point itself is approximately M-stationary and is returned even if
//! it has not passed the Armijo test.

use crate::error::{Error, Result};
use crate::nonconvex::StructuredSet;
use crate::space::Point;

/// Smooth objective evaluated jointly with its gradient.
pub trait Objective {
    fn value_and_grad(&self, w: &Point) -> (f64, Point);
}

impl<F: Fn(&Point) -> (f64, Point)> Objective for F {
    fn value_and_grad(&self, w: &Point) -> (f64, Point) {
        self(w)
    }
}

/// Parameters of the spectral gradient method.
#[derive(Clone, Debug)]
pub struct SpgConfig {
    /// Backtracking factor for the stepsize ladder `γ_{j,i} = τ^{i−1} γ_j⁰`.
    pub tau: f64,
    /// Armijo constant.
    pub sigma: f64,
    /// Lower safeguard for the BB stepsize.
    pub gamma_min: f64,
    /// Upper safeguard for the BB stepsize.
    pub gamma_max: f64,
    /// Nonmonotonicity window: the Armijo test compares against the maximum
    /// of the last `min(j, m) + 1` function values.
    pub m: usize,
    /// γ₀⁰ used in the very first iteration (overwritten by BB afterwards).
    pub gamma0_init: f64,
    /// Stationarity tolerance (max-norm residual).
    pub inner_tol: f64,
    /// Cap on the number of accepted iterations.
    pub max_outer_iters: usize,
    /// Cap on trial points within one iteration before declaring a stall.
    pub max_backtracks: usize,
}

impl Default for SpgConfig {
    fn default() -> Self {
        SpgConfig {
            tau: 2.0,
            sigma: 1e-4,
            gamma_min: 1e-10,
            gamma_max: 1e10,
            m: 10,
            gamma0_init: 1.0,
            inner_tol: 1e-4,
            max_outer_iters: 50_000,
            max_backtracks: 60,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpgStatus {
    /// Residual dropped below `inner_tol`; the returned point is the
    /// accepting trial point.
    Converged,
    /// Iteration cap reached.
    IterCap,
    /// `max_backtracks` trial points were rejected in one iteration. The
    /// current iterate is returned; a non-terminating inner loop certifies
    /// its stationarity.
    Stalled,
}

/// Outcome of a spectral gradient run.
#[derive(Clone, Debug)]
pub struct SpgResult {
    pub w: Point,
    /// Max-norm stationarity residual at the returned point (the last trial
    /// point evaluated, for non-converged statuses).
    pub residual: f64,
    /// Accepted (outer) iterations performed.
    pub outer_iters: usize,
    /// Total trial points across all iterations.
    pub total_inner_iters: usize,
    /// Objective evaluations (one per trial point plus the initial one).
    pub function_evals: usize,
    /// γ of the last trial point (the accepted ladder value).
    pub last_gamma: f64,
    pub status: SpgStatus,
}

/// One trial point, reported to a [`SpgSink`].
pub struct SpgIteration<'a> {
    /// Outer iteration index.
    pub j: usize,
    /// Trial index within the iteration (starts at 1).
    pub i: usize,
    pub gamma: f64,
    /// φ at the trial point.
    pub phi: f64,
    /// φ at the current iterate `wʲ`.
    pub phi_prev: f64,
    /// Stationarity residual at the trial point.
    pub residual: f64,
    /// Cumulative objective evaluations.
    pub fevals: usize,
    pub w_prev: &'a Point,
    pub w_trial: &'a Point,
    pub grad_prev: &'a Point,
    /// Whether the trial passed the Armijo test and became `w^{j+1}`.
    pub accepted: bool,
    /// Whether the trial met the stationarity tolerance.
    pub terminated: bool,
}

/// Receiver for per-trial records.
pub trait SpgSink {
    fn record(&mut self, it: &SpgIteration);
}

/// No-op sink.
impl SpgSink for () {
    fn record(&mut self, _: &SpgIteration) {}
}

impl<F: FnMut(&SpgIteration)> SpgSink for F {
    fn record(&mut self, it: &SpgIteration) {
        self(it)
    }
}

/// Minimizer of the local quadratic model over `D`: the projection
/// `Π_D(wj − γ⁻¹ grad)`.
pub fn solve_q(wj: &Point, grad: &Point, gamma: f64, d: &StructuredSet) -> Result<Point> {
    assert!(gamma > 0.0, "solve_q needs a positive gamma");
    d.project(&wj.add_scaled(-1.0 / gamma, grad))
}

/// Nonmonotone Armijo test: accepts iff
/// `φ_candidate ≤ max(history) + σ·⟨grad, step⟩` (non-strict).
pub fn armijo_accept(phi_candidate: f64, history: &[f64], grad: &Point, step: &Point, sigma: f64) -> bool {
    assert!(!history.is_empty(), "armijo_accept needs at least one history value");
    let max = history.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    phi_candidate <= max + sigma * grad.inner(step)
}

/// Safeguarded Barzilai–Borwein stepsize `sᵀy / sᵀs`, clamped to
/// `[gamma_min, gamma_max]`; falls back to `fallback` (clamped) when
/// `s = 0` or `sᵀy ≤ 0`.
pub fn bb_step(s: &Point, y: &Point, gamma_min: f64, gamma_max: f64, fallback: f64) -> f64 {
    let ss = s.inner(s);
    let sy = s.inner(y);
    let raw = if ss > 0.0 && sy > 0.0 { sy / ss } else { fallback };
    raw.clamp(gamma_min, gamma_max)
}

/// Runs the spectral gradient method on `φ` over `D` from `w0 ∈ D`.
///
/// The caller is responsible for projecting the start point onto `D` first.
/// Per-trial records are delivered to `sink`.
pub fn spg_minimize<O: Objective, S: SpgSink>(
    phi: &O,
    d: &StructuredSet,
    w0: Point,
    cfg: &SpgConfig,
    sink: &mut S,
) -> Result<SpgResult> {
    let mut w_j = w0;
    let (mut phi_j, mut grad_j) = phi.value_and_grad(&w_j);
    let mut fevals = 1usize;
    check_finite(phi_j, &grad_j, 0)?;

    // ring buffer of the last m+1 accepted function values
    let mut history: Vec<f64> = Vec::with_capacity(cfg.m + 1);
    history.push(phi_j);

    let mut gamma0_next = cfg.gamma0_init.clamp(cfg.gamma_min, cfg.gamma_max);
    let mut total_inner = 0usize;
    let mut last_residual = f64::INFINITY;
    let mut last_gamma = gamma0_next;

    for j in 0..cfg.max_outer_iters {
        let gamma0_j = gamma0_next;
        let phi_max = history.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));

        let mut i = 0usize;
        let accepted = loop {
            i += 1;
            let gamma = cfg.tau.powi(i as i32 - 1) * gamma0_j;
            let w_trial = solve_q(&w_j, &grad_j, gamma, d)?;
            let (phi_trial, grad_trial) = phi.value_and_grad(&w_trial);
            fevals += 1;
            total_inner += 1;
            check_finite(phi_trial, &grad_trial, j)?;

            // residual of eq. (termination): γ(wʲ − w^{j,i}) + ∇φ(w^{j,i}) − ∇φ(wʲ)
            let mut residual = 0.0f64;
            for k in 0..w_j.dim() {
                let r = gamma * (w_j.data()[k] - w_trial.data()[k]) + grad_trial.data()[k]
                    - grad_j.data()[k];
                residual = residual.max(r.abs());
            }
            last_residual = residual;
            last_gamma = gamma;

            let step = &w_trial - &w_j;
            let armijo = phi_trial <= phi_max + cfg.sigma * grad_j.inner(&step);
            let terminated = residual <= cfg.inner_tol;

            sink.record(&SpgIteration {
                j,
                i,
                gamma,
                phi: phi_trial,
                phi_prev: phi_j,
                residual,
                fevals,
                w_prev: &w_j,
                w_trial: &w_trial,
                grad_prev: &grad_j,
                accepted: armijo && !terminated,
                terminated,
            });

            if terminated {
                return Ok(SpgResult {
                    w: w_trial,
                    residual,
                    outer_iters: j,
                    total_inner_iters: total_inner,
                    function_evals: fevals,
                    last_gamma: gamma,
                    status: SpgStatus::Converged,
                });
            }
            if armijo {
                break (w_trial, phi_trial, grad_trial, gamma);
            }
            if i >= cfg.max_backtracks {
                return Ok(SpgResult {
                    w: w_j,
                    residual,
                    outer_iters: j,
                    total_inner_iters: total_inner,
                    function_evals: fevals,
                    last_gamma: gamma,
                    status: SpgStatus::Stalled,
                });
            }
        };

        let (w_next, phi_next, grad_next, gamma_j) = accepted;
        let s = &w_next - &w_j;
        let y = &grad_next - &grad_j;
        gamma0_next = bb_step(&s, &y, cfg.gamma_min, cfg.gamma_max, gamma_j);

        w_j = w_next;
        phi_j = phi_next;
        grad_j = grad_next;
        history.push(phi_next);
        if history.len() > cfg.m + 1 {
            history.remove(0);
        }
    }

    Ok(SpgResult {
        w: w_j,
        residual: last_residual,
        outer_iters: cfg.max_outer_iters,
        total_inner_iters: total_inner,
        function_evals: fevals,
        last_gamma,
        status: SpgStatus::IterCap,
    })
}

fn check_finite(value: f64, grad: &Point, j: usize) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective { what: "value", j });
    }
    if !grad.is_finite() {
        return Err(Error::NonFiniteObjective { what: "gradient", j });
    }
    Ok(())
}
