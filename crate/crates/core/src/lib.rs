//! Solver library for problems of the form
//!
//! ```text
//!     min f(w)   s.t.   G(w) ∈ C,  w ∈ D,
//! ```
//!
//! where `C` is a closed convex set that gets penalized by a safeguarded
//! augmented Lagrangian, and `D` is a structured nonconvex set (complementarity
//! or switching pairs, cardinality-plus-box, low-rank, PSD-rank-k, unions and
//! products of these) that is kept explicitly in the constraints because exact
//! projections onto it are cheap.
//!
//! The outer loop lives in [`alm`], the subproblem solver (a nonmonotone
//! spectral projected gradient method) in [`spg`], and the projection kernels
//! in [`convex`] and [`nonconvex`]. Ready-made benchmark problems are in
//! [`instances`], file formats in [`io`], and a parallel multi-start driver in
//! [`multistart`].

pub mod alm;
pub mod check;
pub mod convex;
pub mod eigen;
mod error;
pub mod instances;
pub mod io;
pub mod multistart;
pub mod nonconvex;
pub mod space;
pub mod spg;

pub use alm::{alm_solve, AlmConfig, ProblemSpec, SolveResult, SolveStatus};
pub use convex::ConvexSet;
pub use error::{Error, Result};
pub use nonconvex::StructuredSet;
pub use space::{Point, Shape};
pub use spg::{spg_minimize, SpgConfig, SpgResult, SpgStatus};
