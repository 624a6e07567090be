//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use geoalm::alm::{alm_solve_with, aug_lag_grad, aug_lag_value, multiplier_update};
use geoalm::instances::*;
use geoalm::io::write_csv;
use geoalm::multistart::multistart;
use geoalm::spg::SpgIteration;
use geoalm::*;

use common::*;

fn report(number: usize, name: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("criterion {number} ({name}): PASS");
    } else {
        let detail = failures.join("; ");
        println!("criterion {number} ({name}): FAIL — {detail}");
        panic!("criterion {number} ({name}) failed: {detail}");
    }
}

fn push_if(failures: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        failures.push(msg());
    }
}

fn random_point(shape: Shape, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Point {
    match shape {
        Shape::Vector(n) => {
            Point::vector((0..n).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
        }
        Shape::SymMatrix(n) => {
            Point::sym_matrix(n, (0..n * n).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
        }
    }
}

#[test]
fn criterion_01_scholtes_multistart() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let p = build_scholtes();
    let cfg = AlmConfig { seed: 20260810, ..AlmConfig::default() };
    let report_ms = multistart(&p, 1000, -10.0, 10.0, &cfg).unwrap();

    let minimizers = [[1.0, 0.0], [0.0, 1.0]];
    let mut bad_limits = 0usize;
    let mut at_origin = 0usize;
    let mut not_converged = 0usize;
    for o in &report_ms.outcomes {
        if o.result.status != SolveStatus::AmStationary || o.result.v > 1e-4 {
            not_converged += 1;
        }
        let near_min = minimizers.iter().any(|m| max_norm_to(&o.result.w, m) <= 1e-3);
        if !near_min {
            bad_limits += 1;
        }
        if max_norm_to(&o.result.w, &[0.0, 0.0]) <= 1e-3 {
            at_origin += 1;
        }
    }
    push_if(&mut failures, not_converged == 0, || {
        format!("{not_converged}/1000 runs missed V ≤ 1e-4")
    });
    push_if(&mut failures, bad_limits == 0, || {
        format!("{bad_limits}/1000 limits away from the minimizers")
    });
    push_if(&mut failures, at_origin == 0, || {
        format!("{at_origin} runs terminated at the origin")
    });

    // the origin start also reaches a minimizer
    let origin = Point::vector(vec![0.0, 0.0]).unwrap();
    let res = alm_solve(&p, &origin, &cfg).unwrap();
    let near = minimizers.iter().any(|m| max_norm_to(&res.w, m) <= 1e-3);
    push_if(&mut failures, near && res.v <= 1e-4, || {
        format!("origin start ended at {:?}", res.w.data())
    });

    let elapsed = t0.elapsed();
    push_if(&mut failures, elapsed.as_secs_f64() < 10.0, || {
        format!("took {elapsed:?}, expected < 10 s")
    });
    report(1, "Scholtes MPCC, 1000 starts", failures);
}

#[test]
fn criterion_02_cardinality_multistart() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let cfg = AlmConfig { seed: 20260810, ..AlmConfig::default() };

    let p = build_cardinality_example(false);
    let refs = cardinality_stationary_points();
    let report_ms = multistart(&p, 1000, -10.0, 10.0, &cfg).unwrap();
    let mut off_reference = 0usize;
    let mut bad_w6_value = 0usize;
    for o in &report_ms.outcomes {
        let hit = refs
            .iter()
            .find(|(w, _, _)| (&o.result.w - w).norm_inf() <= 1e-3);
        match hit {
            None => off_reference += 1,
            Some((_, _, label)) if label == "w6" => {
                if (p.f(&o.result.w) - (-41.33)).abs() > 1e-2 {
                    bad_w6_value += 1;
                }
            }
            Some(_) => {}
        }
    }
    push_if(&mut failures, off_reference == 0, || {
        format!("{off_reference}/1000 limits match no stationary point")
    });
    push_if(&mut failures, bad_w6_value == 0, || {
        format!("{bad_w6_value} w6 limits off the value −41.33")
    });

    // variant with the upper bound w₄ ≤ 0: limits must be w2, w4 or w7
    let pb = build_cardinality_example(true);
    let allowed: Vec<&str> = vec!["w2", "w4", "w7"];
    let report_b = multistart(&pb, 1000, -10.0, 10.0, &cfg).unwrap();
    let mut off_allowed = 0usize;
    for o in &report_b.outcomes {
        let hit = refs
            .iter()
            .find(|(w, _, _)| (&o.result.w - w).norm_inf() <= 1e-3)
            .map(|(_, _, l)| l.as_str());
        if !matches!(hit, Some(l) if allowed.contains(&l)) {
            off_allowed += 1;
        }
    }
    push_if(&mut failures, off_allowed == 0, || {
        format!("{off_allowed}/1000 bounded-variant limits outside {{w2, w4, w7}}")
    });

    let elapsed = t0.elapsed();
    push_if(&mut failures, elapsed.as_secs_f64() < 30.0, || {
        format!("took {elapsed:?}, expected < 30 s")
    });
    report(2, "cardinality example, 1000 starts", failures);
}

#[test]
fn criterion_03_maxcut_five_vertex() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let g = five_vertex_graph();
    let p = build_maxcut(&g);
    let res = alm_solve(&p, &Point::zeros(Shape::SymMatrix(5)), &AlmConfig::default()).unwrap();

    let objective = maxcut_objective(&g, &res.w);
    push_if(&mut failures, (11.9..=12.0).contains(&objective), || {
        format!("final objective {objective:.6} outside [11.9, 12.0]")
    });
    push_if(&mut failures, res.status == SolveStatus::AmStationary && res.v <= 1e-4, || {
        format!("status {:?}, V = {:.2e}", res.status, res.v)
    });
    match cut_from_rank1(&g, &res.w) {
        Ok((s, weight)) => push_if(&mut failures, weight == 12.0, || {
            format!("recovered cut {s:?} has weight {weight}, expected exactly 12")
        }),
        Err(e) => failures.push(format!("cut extraction failed: {e}")),
    }
    match numerical_rank(&res.w) {
        Ok(r) => push_if(&mut failures, r == 1, || format!("final rank {r} ≠ 1")),
        Err(e) => failures.push(format!("rank computation failed: {e}")),
    }
    let elapsed = t0.elapsed();
    push_if(&mut failures, elapsed.as_secs_f64() < 1.0, || {
        format!("took {elapsed:?}, expected < 1 s")
    });
    report(3, "MAXCUT five-vertex graph", failures);
}

#[test]
fn criterion_04_maxcut_relaxation_ordering() {
    let mut failures = Vec::new();
    let g = five_vertex_graph();
    let w0 = Point::zeros(Shape::SymMatrix(5));
    let alm = alm_solve(&build_maxcut(&g), &w0, &AlmConfig::default()).unwrap();
    let sdp = alm_solve(&build_maxcut_relaxation(&g), &w0, &AlmConfig::default()).unwrap();
    let f_alm = maxcut_objective(&g, &alm.w);
    let f_sdp = maxcut_objective(&g, &sdp.w);
    push_if(&mut failures, f_alm <= f_sdp + 1e-3, || {
        format!("f_ALM = {f_alm:.6} exceeds f_SDP + 1e-3 = {:.6}", f_sdp + 1e-3)
    });
    report(4, "MAXCUT relaxation ordering", failures);
}

#[test]
fn criterion_05_projection_oracles() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(501);

    // 500 sparse-box instances, n ≤ 8, κ ≤ 3, mixed boxes including
    // components whose box excludes zero
    let mut worst_sparse = 0.0f64;
    for _ in 0..500 {
        let n = rng.random_range(2..=8usize);
        let kappa = rng.random_range(1..=3usize.min(n - 1));
        let mut lo = vec![f64::NEG_INFINITY; n];
        let mut hi = vec![f64::INFINITY; n];
        let mut forced = 0usize;
        for i in 0..n {
            match rng.random_range(0..4u32) {
                0 => {} // free component
                1 => {
                    lo[i] = 0.0;
                    hi[i] = rng.random_range(0.5..3.0);
                }
                2 => {
                    lo[i] = rng.random_range(-3.0..-0.5);
                    hi[i] = 0.0;
                }
                _ => {
                    if forced < kappa {
                        // box excluding zero
                        if rng.random_bool(0.5) {
                            lo[i] = rng.random_range(0.2..1.0);
                            hi[i] = lo[i] + rng.random_range(0.5..2.0);
                        } else {
                            hi[i] = rng.random_range(-1.0..-0.2);
                            lo[i] = hi[i] - rng.random_range(0.5..2.0);
                        }
                        forced += 1;
                    }
                }
            }
        }
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let set = StructuredSet::sparse_box(n, kappa, lo.clone(), hi.clone()).unwrap();
        let point = Point::vector(w.clone()).unwrap();
        let achieved = set.dist(&point).unwrap().powi(2);
        let oracle = sparse_box_bruteforce_dist2(&w, kappa, &lo, &hi);
        worst_sparse = worst_sparse.max((achieved - oracle).abs());
    }
    push_if(&mut failures, worst_sparse <= 1e-12, || {
        format!("sparse-box distance off brute force by {worst_sparse:.3e}")
    });

    // 500 box-switching pairs across the named parameterizations
    let inf = f64::INFINITY;
    let mut exact_misses = 0usize;
    for trial in 0..500 {
        let (s_lo, s_hi, t_lo, t_hi) = match trial % 4 {
            0 => (0.0, inf, 0.0, inf),   // complementarity
            1 => (-inf, inf, -inf, inf), // switching
            2 => (-inf, inf, 0.0, 1.0),  // relaxed cardinality
            _ => (
                rng.random_range(-3.0..0.0),
                rng.random_range(0.1..3.0),
                rng.random_range(-3.0..0.0),
                rng.random_range(0.1..3.0),
            ),
        };
        let y = rng.random_range(-5.0..5.0);
        let z = rng.random_range(-5.0..5.0);
        let set = StructuredSet::box_switching(1, s_lo, s_hi, t_lo, t_hi).unwrap();
        let proj = set.project(&Point::vector(vec![y, z]).unwrap()).unwrap();
        let d2 = (proj.data()[0] - y) * (proj.data()[0] - y)
            + (proj.data()[1] - z) * (proj.data()[1] - z);
        let oracle = pair_branch_min_dist2(y, z, s_lo, s_hi, t_lo, t_hi);
        if d2 != oracle {
            exact_misses += 1;
        }
    }
    push_if(&mut failures, exact_misses == 0, || {
        format!("{exact_misses}/500 pair projections missed the branch minimum")
    });

    // 200 PSD rank-one projections against the angle-grid oracle
    let mut worst_psd = 0.0f64;
    for trial in 0..200 {
        let n = if trial % 2 == 0 { 2 } else { 3 };
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-2.0..2.0);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        let w = Point::sym_matrix(n, data.clone()).unwrap();
        let set = StructuredSet::psd_low_rank(n, 1).unwrap();
        let achieved = set.dist(&w).unwrap();
        let oracle = psd_rank1_grid_distance(w.data(), n);
        worst_psd = worst_psd.max((achieved - oracle).abs());
    }
    push_if(&mut failures, worst_psd <= 1e-6, || {
        format!("PSD rank-one distance off the grid oracle by {worst_psd:.3e}")
    });

    report(5, "projection oracle suite", failures);
}

#[test]
fn criterion_06_gradient_checks() {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(601);

    let problems = vec![
        build_scholtes(),
        build_portfolio(&synthetic_portfolio(20, 5, 42)),
        build_maxcut(&five_vertex_graph()),
    ];
    for p in &problems {
        let rho = 10.0;
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let w = random_point(p.w_shape, &mut rng, -2.0, 2.0);
            let u = Point::vector(
                (0..p.dim_y).map(|_| rng.random_range(-1.0..1.0)).collect(),
            )
            .unwrap();
            let dev = geoalm::check::gradient_deviation(
                |x| aug_lag_value(p, x, &u, rho),
                |x| aug_lag_grad(p, x, &u, rho),
                &w,
                1e-6,
            );
            worst = worst.max(dev);
        }
        push_if(&mut failures, worst <= 1e-6, || {
            format!("{}: finite-difference deviation {worst:.3e}", p.name)
        });
    }

    // multiplier identity at every recorded iteration of full solves
    let runs: Vec<(ProblemSpec, Point)> = vec![
        (build_scholtes(), Point::vector(vec![3.0, -2.0]).unwrap()),
        (
            build_portfolio(&synthetic_portfolio(20, 5, 42)),
            Point::zeros(Shape::Vector(20)),
        ),
        (build_maxcut(&five_vertex_graph()), Point::zeros(Shape::SymMatrix(5))),
    ];
    for (p, start) in &runs {
        let res = alm_solve(p, start, &AlmConfig::default()).unwrap();
        for step in &res.steps {
            let lhs = aug_lag_grad(p, &step.w, &step.u, step.rho);
            let lam = multiplier_update(p, &step.w, &step.u, step.rho);
            let rhs = &p.grad_f(&step.w) + &p.g_adjoint(&step.w, &lam);
            let diff = (&lhs - &rhs).norm_inf();
            let scale = 1.0 + lhs.norm_inf();
            push_if(&mut failures, diff <= 1e-12 * scale, || {
                format!("{}: identity violated by {diff:.3e} at k={}", p.name, step.k)
            });
        }
    }
    report(6, "augmented Lagrangian gradient checks", failures);
}

/// Per-run data collected from the SPG sink for the invariant suite.
#[derive(Default)]
struct RunTrace {
    phi_start: f64,
    accepted_phis: Vec<f64>,
    csi_violation: f64,
    membership_failures: usize,
}

fn instrumented_runs(p: &ProblemSpec, starts: &[Point], m: usize) -> Vec<RunTrace> {
    let mut runs: Vec<RunTrace> = Vec::new();
    for start in starts {
        let begin = runs.len();
        {
            let d = p.d.clone();
            let mut sink = |it: &SpgIteration| {
                if it.j == 0 && it.i == 1 {
                    runs.push(RunTrace { phi_start: it.phi_prev, ..Default::default() });
                }
                let run = runs.last_mut().expect("sink saw no run start");
                if it.accepted || it.terminated {
                    if !d.contains(it.w_trial, 1e-8) {
                        run.membership_failures += 1;
                    }
                }
                if it.accepted {
                    run.accepted_phis.push(it.phi);
                    let step = it.w_trial - it.w_prev;
                    let csi = it.grad_prev.inner(&step) + 0.5 * it.gamma * step.inner(&step);
                    let scale = 1.0 + it.grad_prev.norm_inf() * step.norm() + it.gamma * step.inner(&step);
                    run.csi_violation = run.csi_violation.max(csi / scale);
                }
            };
            alm_solve_with(p, start, &AlmConfig::default(), &mut sink).unwrap();
        }
        assert!(runs.len() > begin, "solve produced no subproblem runs");
    }
    let _ = m;
    runs
}

#[test]
fn criterion_07_spg_invariants() {
    let mut failures = Vec::new();
    let m = SpgConfig::default().m;

    let cases: Vec<(ProblemSpec, Vec<Point>)> = vec![
        (
            build_scholtes(),
            vec![
                Point::vector(vec![0.0, 0.0]).unwrap(),
                Point::vector(vec![-7.0, 4.0]).unwrap(),
                Point::vector(vec![9.0, 9.0]).unwrap(),
            ],
        ),
        (
            build_cardinality_example(false),
            vec![
                Point::vector(vec![1.0, -2.0, 3.0, -4.0, 5.0]).unwrap(),
                Point::vector(vec![-8.0, 0.5, 0.0, 2.0, -1.0]).unwrap(),
            ],
        ),
        (build_maxcut(&five_vertex_graph()), vec![Point::zeros(Shape::SymMatrix(5))]),
        (build_obstacle(4), vec![Point::vector(vec![1.0; 12]).unwrap()]),
    ];

    for (p, starts) in &cases {
        let runs = instrumented_runs(p, starts, m);
        for (idx, run) in runs.iter().enumerate() {
            // envelope of the last m+1 accepted values is nonincreasing
            let mut seq = vec![run.phi_start];
            seq.extend(&run.accepted_phis);
            let mut prev_env = f64::INFINITY;
            for j in 0..seq.len() {
                let lo = j.saturating_sub(m);
                let env = seq[lo..=j].iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                let tol = 1e-12 * (1.0 + env.abs());
                push_if(&mut failures, env <= prev_env + tol, || {
                    format!("{}: envelope rose at accepted step {j} of run {idx}", p.name)
                });
                prev_env = prev_env.min(env);
            }
            push_if(&mut failures, run.csi_violation <= 1e-10, || {
                format!("{}: quadratic-model optimality violated by {:.3e} in run {idx}", p.name, run.csi_violation)
            });
            push_if(&mut failures, run.membership_failures == 0, || {
                format!("{}: {} iterates left D in run {idx}", p.name, run.membership_failures)
            });
        }
    }
    report(7, "spectral gradient invariants", failures);
}

#[test]
fn criterion_08_obstacle_ill_conditioning() {
    let mut failures = Vec::new();
    let p = build_obstacle(8);
    let start = Point::vector(vec![1.0; 24]).unwrap();
    let cfg = AlmConfig::default();
    assert_eq!(cfg.spg.max_outer_iters, 50_000);
    let res = alm_solve(&p, &start, &cfg).unwrap();

    push_if(&mut failures, res.status == SolveStatus::AmStationary && res.v <= 1e-4, || {
        format!("status {:?}, V = {:.2e}", res.status, res.v)
    });
    push_if(&mut failures, res.w.norm_inf() <= 1e-2, || {
        format!("‖w‖∞ = {:.3e}, expected ≤ 1e-2", res.w.norm_inf())
    });
    // ill-conditioning signature: inner-iteration counts grow over the run
    let js: Vec<usize> = res.records.iter().map(|r| r.j).collect();
    let half = js.len() / 2;
    let early = *js[..half].iter().max().unwrap_or(&0);
    let late = *js[half..].iter().max().unwrap_or(&0);
    push_if(&mut failures, late > early, || {
        format!("inner iterations did not grow: early max {early}, late max {late} (j = {js:?})")
    });
    report(8, "obstacle problem, n = 8", failures);
}

#[test]
fn criterion_09_boosted_portfolio() {
    let mut failures = Vec::new();
    let cfg = AlmConfig::default();
    let mut wins = 0usize;
    let instances = 20u64;
    for seed in 0..instances {
        let data = synthetic_portfolio(30, 5, seed);
        let p = build_portfolio(&data);
        let plain = alm_solve(&p, &Point::zeros(Shape::Vector(30)), &cfg).unwrap();
        let boosted = boosted_portfolio_solve(&data, &cfg).unwrap();

        for (label, res) in [("plain", &plain), ("boosted", &boosted)] {
            let nnz = res.w.data().iter().filter(|x| **x != 0.0).count();
            push_if(&mut failures, nnz <= data.kappa, || {
                format!("seed {seed}: {label} support {nnz} > {}", data.kappa)
            });
            let g = p.g(&res.w);
            let residual = g.data()[0].max(0.0).max(g.data()[1].abs());
            push_if(&mut failures, residual <= 1e-4, || {
                format!("seed {seed}: {label} constraint residual {residual:.3e}")
            });
            let in_box = res
                .w
                .data()
                .iter()
                .zip(&data.u)
                .all(|(x, u)| *x >= -1e-12 && *x <= u + 1e-12);
            push_if(&mut failures, in_box, || format!("seed {seed}: {label} leaves [0, u]"));
        }
        if p.f(&boosted.w) <= p.f(&plain.w) + 1e-6 {
            wins += 1;
        }
    }
    let needed = (instances as f64 * 0.8).ceil() as usize;
    push_if(&mut failures, wins >= needed, || {
        format!("boosted at least as good on {wins}/{instances} instances, needed {needed}")
    });
    report(9, "boosted portfolio", failures);
}

#[test]
fn criterion_10_determinism() {
    let mut failures = Vec::new();

    // identical solve twice ⇒ byte-identical iteration CSV
    let g = five_vertex_graph();
    let p = build_maxcut(&g);
    let w0 = Point::zeros(Shape::SymMatrix(5));
    let a = alm_solve(&p, &w0, &AlmConfig::default()).unwrap();
    let b = alm_solve(&p, &w0, &AlmConfig::default()).unwrap();
    push_if(&mut failures, write_csv(&a.records) == write_csv(&b.records), || {
        "maxcut iteration CSVs differ between runs".into()
    });

    // identical seeded multistart twice ⇒ byte-identical per-start CSV
    let ps = build_scholtes();
    let cfg = AlmConfig { seed: 99, ..AlmConfig::default() };
    let r1 = multistart(&ps, 100, -10.0, 10.0, &cfg).unwrap();
    let r2 = multistart(&ps, 100, -10.0, 10.0, &cfg).unwrap();
    push_if(&mut failures, r1.to_csv() == r2.to_csv(), || {
        "multistart CSVs differ between runs".into()
    });
    report(10, "determinism", failures);
}
