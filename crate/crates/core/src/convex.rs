//! Projections and distances for the convex penalized set `C`.

use crate::error::{Error, Result};
use crate::space::Point;

/// Multiplier safeguard bound used for the boxes returned by
/// [`safeguard_box_for`].
pub const SAFEGUARD_BOUND: f64 = 1e20;

/// The convex set whose constraint `G(w) ∈ C` gets penalized.
///
/// Only the variants needed by the solver's problem classes are provided:
/// products of inequality/equality rows, a single fixed point, and a box.
#[derive(Clone, Debug, PartialEq)]
pub enum ConvexSet {
    /// `ℝ^{neg}₋ × {0}^{zero}`: `neg` nonpositive rows followed by `zero`
    /// equality rows.
    OrthantProduct { neg: usize, zero: usize },
    /// The singleton `{e}`.
    FixedPoint(Point),
    /// Componentwise box `[lo, hi]`. Infinite bounds are stored as the
    /// largest finite magnitude, which clamps identically.
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl ConvexSet {
    pub fn orthant_product(neg: usize, zero: usize) -> Result<Self> {
        if neg + zero == 0 {
            return Err(Error::InvalidSet(
                "orthant product needs at least one row".into(),
            ));
        }
        Ok(ConvexSet::OrthantProduct { neg, zero })
    }

    pub fn fixed_point(e: Point) -> Self {
        ConvexSet::FixedPoint(e)
    }

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
        Ok(ConvexSet::Box { lo, hi })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::OrthantProduct { neg, zero } => neg + zero,
            ConvexSet::FixedPoint(e) => e.dim(),
            ConvexSet::Box { lo, .. } => lo.len(),
        }
    }

    /// Euclidean projection `P_C(y)`.
    ///
    /// Panics if `y` has the wrong dimension.
    pub fn project(&self, y: &Point) -> Point {
        assert_eq!(y.dim(), self.dim(), "projection dimension mismatch");
        match self {
            ConvexSet::OrthantProduct { neg, .. } => {
                let data = y
                    .data()
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if i < *neg { v.min(0.0) } else { 0.0 })
                    .collect();
                Point::from_parts(y.shape(), data)
            }
            ConvexSet::FixedPoint(e) => e.clone(),
            ConvexSet::Box { lo, hi } => {
                let data = y
                    .data()
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(&v, (&l, &h))| v.clamp(l, h))
                    .collect();
                Point::from_parts(y.shape(), data)
            }
        }
    }

    /// Euclidean distance `d_C(y) = ‖P_C(y) − y‖`.
    pub fn dist(&self, y: &Point) -> f64 {
        (&self.project(y) - y).norm()
    }
}

/// Componentwise multiplier safeguard box for a penalized set:
/// `[0, 10²⁰]` on inequality rows and `[−10²⁰, 10²⁰]` on equality rows.
///
/// Box rows are treated like equality rows (two-sided constraints carry
/// multipliers of either sign).
pub fn safeguard_box_for(c: &ConvexSet) -> (Vec<f64>, Vec<f64>) {
    let b = SAFEGUARD_BOUND;
    match c {
        ConvexSet::OrthantProduct { neg, zero } => {
            let mut lo = vec![0.0; *neg];
            lo.extend(std::iter::repeat(-b).take(*zero));
            (lo, vec![b; neg + zero])
        }
        ConvexSet::FixedPoint(e) => (vec![-b; e.dim()], vec![b; e.dim()]),
        ConvexSet::Box { lo, .. } => (vec![-b; lo.len()], vec![b; lo.len()]),
    }
}

/// Componentwise clamp of a point onto a box given as bound slices.
pub fn clamp_to_box(p: &Point, lo: &[f64], hi: &[f64]) -> Point {
    assert_eq!(p.dim(), lo.len());
    let data = p
        .data()
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(&v, (&l, &h))| v.clamp(l, h))
        .collect();
    Point::from_parts(p.shape(), data)
}

pub(crate) fn clamp_bound(b: f64) -> f64 {
    if b.is_nan() {
        panic!("box bound is NaN");
    }
    b.clamp(-f64::MAX, f64::MAX)
}
