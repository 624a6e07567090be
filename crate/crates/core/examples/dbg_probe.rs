use geoalm::instances::*;
use geoalm::multistart::multistart;
use geoalm::*;
use std::time::Instant;

fn five_vertex_graph() -> Graph {
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

fn main() {
    // --- cardinality multistart ---
    let t0 = Instant::now();
    let p = build_cardinality_example(false);
    let cfg = AlmConfig { seed: 11, ..AlmConfig::default() };
    let report = multistart(&p, 1000, -10.0, 10.0, &cfg).unwrap();
    println!("cardinality: {} clusters in {:?}", report.clusters.len(), t0.elapsed());
    for c in report.clusters.iter().take(12) {
        let label = p
            .references
            .iter()
            .find(|(w, _, _)| (&c.representative - w).norm_inf() <= 1e-3)
            .map(|(_, _, l)| l.as_str())
            .unwrap_or("???");
        println!("  count={:4} f={:+.4} {} w={:?}", c.count, c.f_value, label, c.representative.data());
    }
    println!("  all am_stationary: {}", report.all_succeeded());

    // variant with w4 <= 0
    let pb = build_cardinality_example(true);
    let report = multistart(&pb, 1000, -10.0, 10.0, &cfg).unwrap();
    println!("cardinality-box: {} clusters", report.clusters.len());
    for c in report.clusters.iter().take(12) {
        let label = pb
            .references
            .iter()
            .find(|(w, _, _)| (&c.representative - w).norm_inf() <= 1e-3)
            .map(|(_, _, l)| l.as_str())
            .unwrap_or("???");
        println!("  count={:4} f={:+.4} {} w={:?}", c.count, c.f_value, label, c.representative.data());
    }

    // --- MAXCUT ---
    let t0 = Instant::now();
    let g = five_vertex_graph();
    let p = build_maxcut(&g);
    let w0 = Point::zeros(Shape::SymMatrix(5));
    let res = alm_solve(&p, &w0, &AlmConfig::default()).unwrap();
    println!("\nmaxcut: status={:?} V={:.2e} obj={:.6} in {:?}", res.status, res.v, maxcut_objective(&g, &res.w), t0.elapsed());
    for r in &res.records {
        println!("  k={} j={:4} f={:+.6e} V={:.3e} rho={:.2e} t_j={:.2e}", r.k, r.j, r.f_value, r.v, r.rho, r.t_j);
    }
    match cut_from_rank1(&g, &res.w) {
        Ok((s, wgt)) => println!("  cut S={:?} weight={}", s, wgt),
        Err(e) => println!("  cut extraction failed: {e}"),
    }
    println!("  rank = {:?}", numerical_rank(&res.w));

    // --- MAXCUT SDP relaxation ---
    let p = build_maxcut_relaxation(&g);
    let res_sdp = alm_solve(&p, &w0, &AlmConfig::default()).unwrap();
    println!("maxcut-sdp: status={:?} V={:.2e} obj={:.6} rank={:?}", res_sdp.status, res_sdp.v, maxcut_objective(&g, &res_sdp.w), numerical_rank(&res_sdp.w));

    // --- obstacle n=8 ---
    let t0 = Instant::now();
    let p = build_obstacle(8);
    let start = Point::vector(vec![1.0; 24]).unwrap();
    let res = alm_solve(&p, &start, &AlmConfig::default()).unwrap();
    println!("\nobstacle(8): status={:?} V={:.2e} |w|_inf={:.2e} in {:?}", res.status, res.v, res.w.norm_inf(), t0.elapsed());
    for r in &res.records {
        println!("  k={:2} j={:6} f={:+.6e} V={:.3e} rho={:.2e} t_j={:.2e}", r.k, r.j, r.f_value, r.v, r.rho, r.t_j);
    }

    // --- portfolio plain vs boosted ---
    let t0 = Instant::now();
    let mut wins = 0;
    let mut plain_feas = 0;
    let mut boost_feas = 0;
    for seed in 0..20u64 {
        let data = synthetic_portfolio(30, 5, seed);
        let p = build_portfolio(&data);
        let plain = alm_solve(&p, &Point::zeros(Shape::Vector(30)), &AlmConfig::default()).unwrap();
        let boosted = boosted_portfolio_solve(&data, &AlmConfig::default()).unwrap();
        let fp = p.f(&plain.w);
        let fb = p.f(&boosted.w);
        let nnz_p = plain.w.data().iter().filter(|x| **x != 0.0).count();
        let nnz_b = boosted.w.data().iter().filter(|x| **x != 0.0).count();
        let gp = p.g(&plain.w);
        let gb = p.g(&boosted.w);
        let feas_p = gp.data()[0].max(0.0).max(gp.data()[1].abs());
        let feas_b = gb.data()[0].max(0.0).max(gb.data()[1].abs());
        if plain.status == SolveStatus::AmStationary && feas_p <= 1e-4 && nnz_p <= 5 { plain_feas += 1; }
        if boosted.status == SolveStatus::AmStationary && feas_b <= 1e-4 && nnz_b <= 5 { boost_feas += 1; }
        if fb <= fp + 1e-6 { wins += 1; }
        println!("seed {:2}: plain f={:+.6e} ({:?},nnz={},feas={:.1e})  boosted f={:+.6e} ({:?},nnz={},feas={:.1e})  {}",
            seed, fp, plain.status, nnz_p, feas_p, fb, boosted.status, nnz_b, feas_b, if fb <= fp + 1e-6 {"boost<=plain"} else {"PLAIN BETTER"});
    }
    println!("portfolio: boosted wins {wins}/20, plain feasible {plain_feas}/20, boosted feasible {boost_feas}/20, in {:?}", t0.elapsed());
}
