//! Parallel multi-start driver with limit-point clustering.
//!
//! Each start draws its coordinates from an independent ChaCha stream keyed
//! by `(seed, start index)`, so results are reproducible regardless of the
//! number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alm::{alm_solve, AlmConfig, ProblemSpec, SolveResult, SolveStatus};
use crate::error::Result;
use crate::space::Point;

/// Tolerance under which two limit points belong to the same cluster
/// (max-norm).
pub const CLUSTER_TOL: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct StartOutcome {
    pub index: usize,
    pub start: Point,
    pub result: SolveResult,
}

/// A group of runs whose limit points agree within [`CLUSTER_TOL`].
#[derive(Clone, Debug)]
pub struct Cluster {
    /// Limit point of the first run that opened the cluster.
    pub representative: Point,
    pub f_value: f64,
    pub count: usize,
    /// Indices of the member runs.
    pub members: Vec<usize>,
}

#[derive(Debug)]
pub struct MultistartReport {
    pub outcomes: Vec<StartOutcome>,
    pub clusters: Vec<Cluster>,
}

/// Uniform start point for run `index`, drawn coordinatewise from
/// `[lo, hi]`.
pub fn start_point(p: &ProblemSpec, lo: f64, hi: f64, seed: u64, index: u64) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let data = (0..p.w_shape.len())
        .map(|_| rng.random_range(lo..=hi))
        .collect();
    Point::from_parts(p.w_shape, data)
}

/// Runs `starts` solves from uniform random points in `[lo, hi]^dim`
/// (each projected onto `D` by the solver) and clusters the limit points.
pub fn multistart(
    p: &ProblemSpec,
    starts: usize,
    lo: f64,
    hi: f64,
    cfg: &AlmConfig,
) -> Result<MultistartReport> {
    let mut outcomes: Vec<StartOutcome> = (0..starts)
        .into_par_iter()
        .map(|index| {
            let start = start_point(p, lo, hi, cfg.seed, index as u64);
            let result = alm_solve(p, &start, cfg)?;
            Ok(StartOutcome { index, start, result })
        })
        .collect::<Result<Vec<_>>>()?;
    outcomes.sort_by_key(|o| o.index);
    let clusters = cluster(p, &outcomes);
    Ok(MultistartReport { outcomes, clusters })
}

fn cluster(p: &ProblemSpec, outcomes: &[StartOutcome]) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = Vec::new();
    for o in outcomes {
        let w = &o.result.w;
        match clusters
            .iter_mut()
            .find(|c| (&c.representative - w).norm_inf() <= CLUSTER_TOL)
        {
            Some(c) => {
                c.count += 1;
                c.members.push(o.index);
            }
            None => clusters.push(Cluster {
                representative: w.clone(),
                f_value: p.f(w),
                count: 1,
                members: vec![o.index],
            }),
        }
    }
    clusters.sort_by(|a, b| b.count.cmp(&a.count));
    clusters
}

impl MultistartReport {
    pub fn all_succeeded(&self) -> bool {
        self.outcomes
            .iter()
            .all(|o| o.result.status == SolveStatus::AmStationary)
    }

    /// Worst status across runs, for exit-code reporting.
    pub fn worst_status(&self) -> SolveStatus {
        let mut worst = SolveStatus::AmStationary;
        for o in &self.outcomes {
            match o.result.status {
                SolveStatus::InfeasibleStationary => return SolveStatus::InfeasibleStationary,
                SolveStatus::IterCap => worst = SolveStatus::IterCap,
                SolveStatus::AmStationary => {}
            }
        }
        worst
    }

    /// Per-start CSV: start index, status, outer iterations, f, V, then the
    /// limit-point coordinates.
    pub fn to_csv(&self) -> String {
        let dim = self
            .outcomes
            .first()
            .map(|o| o.result.w.dim())
            .unwrap_or(0);
        let mut out = String::from("start,status,outer_iters,f,V");
        for i in 0..dim {
            out.push_str(&format!(",w{i}"));
        }
        out.push('\n');
        for o in &self.outcomes {
            let status = match o.result.status {
                SolveStatus::AmStationary => "am-stationary",
                SolveStatus::InfeasibleStationary => "infeasible-stationary",
                SolveStatus::IterCap => "iter-cap",
            };
            out.push_str(&format!(
                "{},{},{},{},{}",
                o.index,
                status,
                o.result.outer_iters,
                o.result.records.last().map(|r| r.f_value).unwrap_or(f64::NAN),
                o.result.v,
            ));
            for x in o.result.w.data() {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        out
    }
}
