//! Error budget of the map kernel for a few specs over successive
//! refinement steps.
//!
//!     cargo run --release --example kernel_report -- 61.6128:118.3872

use std::time::Instant;
use wiggle_core::{build_map, KernelConfig, WiggleSpec};

fn parse(arg: &str) -> WiggleSpec {
    let (r, big_r): (Vec<f64>, Vec<f64>) = arg
        .split(',')
        .map(|w| {
            let (a, b) = w.split_once(':').expect("wiggle as r:R");
            (a.parse::<f64>().expect("number"), b.parse::<f64>().expect("number"))
        })
        .unzip();
    WiggleSpec::new(r, big_r)
}

fn main() {
    let mut specs: Vec<WiggleSpec> = std::env::args().skip(1).map(|a| parse(&a)).collect();
    if specs.is_empty() {
        specs = vec![WiggleSpec::straight(), WiggleSpec::new(vec![20.0], vec![30.0])];
    }
    let base = KernelConfig::default();
    for spec in specs {
        println!("{spec:?}");
        let mut cfg = base.clone();
        for step in 0..4 {
            let label = format!("q{}", cfg.resolution.quad_nodes);
            let t = Instant::now();
            let k = build_map(&spec, &cfg).expect("kernel builds");
            let r = &k.report;
            println!(
                "  {label:4} eps_map {:.3e}  vertex {:.3e}  quadrature {:.3e}  residual {:.3e}  iters {}  {:.2} s",
                k.eps_map,
                r.vertex_error,
                r.quadrature_error,
                r.max_residual,
                r.iterations,
                t.elapsed().as_secs_f64()
            );
            if step < 3 {
                cfg = cfg.refreshed();
            }
        }
    }
}
