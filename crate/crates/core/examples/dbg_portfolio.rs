use geoalm::instances::*;
use geoalm::*;

fn main() {
    // print convex-stage value and compare with tight-tolerance resolve
    for seed in [4u64, 6, 9, 19] {
        let data = synthetic_portfolio(30, 5, seed);
        let convex = build_portfolio_convex(&data);
        let cfg = AlmConfig::default();
        let res = alm_solve(&convex, &Point::zeros(Shape::Vector(30)), &cfg).unwrap();
        let tight = AlmConfig { outer_tol: 1e-8, inner_tol_base: 1e-8, ..AlmConfig::default() };
        let res_t = alm_solve(&convex, &Point::zeros(Shape::Vector(30)), &tight).unwrap();
        println!("seed {seed}: convex f={:.9e} tight f={:.9e}  supports agree: {}",
            convex.f(&res.w), convex.f(&res_t.w),
            {
                let top = |w: &Point| { let mut idx: Vec<usize> = (0..30).collect(); idx.sort_by(|&a,&b| w.data()[b].partial_cmp(&w.data()[a]).unwrap()); idx[..20].to_vec() };
                let (mut a, mut b) = (top(&res.w), top(&res_t.w)); a.sort(); b.sort(); a == b
            });
        // nonzero profile of convex solution
        let mut v: Vec<(usize, f64)> = res.w.data().iter().cloned().enumerate().collect();
        v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        println!("  top weights: {:?}", &v[..8].iter().map(|(i, x)| format!("{i}:{x:.4}")).collect::<Vec<_>>());
        println!("  #nonzero(>1e-6): {}", res.w.data().iter().filter(|x| **x > 1e-6).count());
    }
}
