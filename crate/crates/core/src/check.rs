//! Finite-difference verification helpers for user-defined problems.

use crate::alm::ProblemSpec;
use crate::space::Point;

/// Central finite-difference gradient of a scalar function.
pub fn fd_gradient<F: Fn(&Point) -> f64>(f: F, w: &Point, h: f64) -> Point {
    let mut data = Vec::with_capacity(w.dim());
    for i in 0..w.dim() {
        let step = h * (1.0 + w.data()[i].abs());
        let mut plus = w.data().to_vec();
        let mut minus = w.data().to_vec();
        plus[i] += step;
        minus[i] -= step;
        let fp = f(&Point::from_parts(w.shape(), plus));
        let fm = f(&Point::from_parts(w.shape(), minus));
        data.push((fp - fm) / (2.0 * step));
    }
    Point::from_parts(w.shape(), data)
}

/// Relative max-norm deviation between an analytic gradient and its central
/// finite-difference estimate.
pub fn gradient_deviation<F, G>(f: F, grad: G, w: &Point, h: f64) -> f64
where
    F: Fn(&Point) -> f64,
    G: Fn(&Point) -> Point,
{
    let analytic = grad(w);
    let numeric = fd_gradient(f, w, h);
    let diff = (&analytic - &numeric).norm_inf();
    diff / analytic.norm_inf().max(1.0)
}

/// Checks `⟨G′(w)*λ, v⟩ = ⟨λ, (G(w + t v) − G(w − t v))/(2t)⟩` and returns
/// the relative deviation.
pub fn adjoint_deviation(p: &ProblemSpec, w: &Point, lambda: &Point, v: &Point, h: f64) -> f64 {
    let lhs = p.g_adjoint(w, lambda).inner(v);
    let step = h * (1.0 + w.norm_inf());
    let g_plus = p.g(&w.add_scaled(step, v));
    let g_minus = p.g(&w.add_scaled(-step, v));
    let directional = (&g_plus - &g_minus).scale(1.0 / (2.0 * step));
    let rhs = lambda.inner(&directional);
    (lhs - rhs).abs() / lhs.abs().max(1.0)
}
