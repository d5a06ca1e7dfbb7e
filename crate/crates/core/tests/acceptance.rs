//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

mod common;

use std::time::{Duration, Instant};

use wiggle_core::builder::{measure_growth, rho_scan, BuildConfig, BuildState};
use wiggle_core::covers::{crooked_by_grid, hypothesis_check, Quadruple};
use wiggle_core::dynamics::{continuum_cover, render, Address, CoverConfig, Window};
use wiggle_core::verify::{self, Check, VerifyConfig};
use wiggle_core::{minimal_covers, KernelConfig, PiecewiseMonotoneMap, WiggleSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn checks(list: &[Check]) -> Outcome {
    let bad: Vec<String> = list
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} slack {:.3e} at {:?} ({})", c.name, c.worst_slack, c.witness, c.note))
        .collect();
    let worst = list.iter().map(|c| c.worst_slack).fold(f64::INFINITY, f64::min);
    if bad.is_empty() {
        outcome(true, format!("{} checks, worst slack {worst:.3e}", list.len()))
    } else {
        outcome(false, bad.join("; "))
    }
}

fn maps() -> Vec<std::sync::Arc<PiecewiseMonotoneMap>> {
    vec![common::straight(), common::one_wiggle(), common::two_wiggles(), common::staged()]
}

fn c1() -> Outcome {
    let t = Instant::now();
    let k = wiggle_core::build_map(&WiggleSpec::straight(), &KernelConfig::default()).unwrap();
    let c = verify::check_oracle(&k);
    let secs = t.elapsed().as_secs_f64();
    let mut o = checks(&[c]);
    o.pass &= secs <= 60.0;
    o.detail = format!("{}, {secs:.1} s", o.detail);
    o
}

fn c2() -> Outcome {
    let list: Vec<Check> = [common::straight(), common::two_wiggles()]
        .iter()
        .map(|m| verify::check_roundtrip(m.kernel(), 1e-2))
        .collect();
    checks(&list)
}

fn c3(cfg: &VerifyConfig) -> Outcome {
    let list: Vec<Check> = maps().iter().map(|m| verify::check_expansion(m.kernel(), cfg)).collect();
    checks(&list)
}

fn c4(cfg: &VerifyConfig) -> Outcome {
    let list: Vec<Check> = maps().iter().flat_map(|m| verify::check_phi_properties(m, cfg)).collect();
    checks(&list)
}

fn c5(cfg: &VerifyConfig) -> Outcome {
    let list: Vec<Check> = maps().iter().map(|m| verify::check_fandphi(m, cfg)).collect();
    checks(&list)
}

fn c6(cfg: &VerifyConfig) -> Outcome {
    let mut list = Vec::new();
    let mut nus = Vec::new();
    for m in maps() {
        let (c, nu) = verify::check_nu(m.kernel(), cfg);
        list.push(c);
        nus.push(format!("{nu:.4}"));
    }
    let mut o = checks(&list);
    o.detail = format!("{}, nu = [{}]", o.detail, nus.join(", "));
    o
}

fn c7(cfg: &VerifyConfig) -> Outcome {
    let list: Vec<Check> = maps().iter().map(|m| verify::check_growth(m.kernel(), common::GROWTH_C, cfg)).collect();
    let mut o = checks(&list);
    o.detail = format!("C = {}, {}", common::GROWTH_C, o.detail);
    o
}

fn c8(cfg: &VerifyConfig) -> Outcome {
    let list: Vec<Check> = [common::one_wiggle(), common::staged()]
        .iter()
        .map(|m| {
            let (_, nu) = verify::check_nu(m.kernel(), cfg);
            verify::check_un1(m, nu.max(common::NU0), cfg)
        })
        .collect();
    let mut o = checks(&list);
    o.pass &= list.iter().all(|c| c.samples == cfg.un1_trials);
    o
}

fn c9(st: &BuildState) -> Outcome {
    let mut margins = f64::INFINITY;
    let mut count = 0;
    let mut bad = Vec::new();
    let stage = &st.stages[0];
    let mut targets: Vec<Quadruple> = stage.placements.iter().map(|p| p.q_hat).collect();
    targets.push(stage.q);
    for q in targets {
        let f = minimal_covers(st.map(), &q, 1).unwrap();
        for iv in &f.intervals {
            count += 1;
            let margin = iv.witness.as_ref().map_or(0.0, |w| w.margin);
            margins = margins.min(margin);
            let grid = crooked_by_grid(st.map(), iv.lo, iv.hi, 1, &q, 40_000).unwrap();
            if margin <= 10.0 || !grid {
                bad.push(format!("{q}: [{:.4}, {:.4}] margin {margin:.2}, grid {grid}", iv.lo, iv.hi));
            }
        }
    }
    if bad.is_empty() && count > 0 {
        outcome(true, format!("{count} intervals crooked, min margin {margins:.1}, grid agrees"))
    } else {
        outcome(false, bad.join("; "))
    }
}

fn c10() -> Outcome {
    let cfg = BuildConfig { rho_steps: 4, eps: 1e-6, ..BuildConfig::default() };
    let choice = rho_scan(&common::straight(), &cfg, cfg.eps, cfg.tau, false).unwrap();
    let sups: Vec<String> = choice.steps.iter().map(|s| format!("{}:{:.2e}", s.rho, s.sup)).collect();
    outcome(
        choice.steps.len() == 4 && verify::closeness_ok(&choice, cfg.eps),
        format!("sup by rho [{}], eps {:.0e}", sups.join(", "), cfg.eps),
    )
}

fn c11(st: &BuildState, took: Duration) -> Outcome {
    let cert = &st.certificates[0];
    let re = cert.recheck.as_ref().unwrap();
    let pass = st.stages[0].q.size() >= st.k
        && cert.family.all_crooked()
        && re.identical
        && re.eps_target == cert.eps_target / 2.0
        && re.eps_map <= re.eps_target
        && st.reverify().unwrap().iter().all(|&b| b)
        && took.as_secs_f64() <= 1800.0;
    outcome(
        pass,
        format!(
            "Q = {}, K = {}, n* = {}, {} intervals, recheck identical {} (eps_map target {:.1e} -> {:.1e}, achieved {:.1e} / {:.1e}), {:.1} s",
            cert.q,
            st.k,
            cert.n_star,
            cert.family.len(),
            re.identical,
            cert.eps_target,
            re.eps_target,
            cert.eps_map,
            re.eps_map,
            took.as_secs_f64()
        ),
    )
}

fn c12(st: &BuildState) -> Outcome {
    let rs: Vec<f64> = (30..=80).step_by(5).map(f64::from).collect();
    let flat = measure_growth(common::straight().kernel(), &rs);
    let flat_ok = flat.iter().all(|&(_, s)| (0.45..=0.55).contains(&s));
    let (lo, hi) = flat.iter().fold((f64::INFINITY, 0.0f64), |a, &(_, s)| (a.0.min(s), a.1.max(s)));
    let rs: Vec<f64> = (30..=400).step_by(2).map(f64::from).collect();
    let staged = measure_growth(st.map().kernel(), &rs);
    let min = staged.iter().map(|&(_, s)| s).fold(f64::INFINITY, f64::min);
    outcome(
        flat_ok && min <= 0.8 && st.cfg.n_guard == 4,
        format!("N=0 s in [{lo:.4}, {hi:.4}]; staged min s = {min:.4}"),
    )
}

fn c13() -> Outcome {
    let cfg = CoverConfig::default();
    let mut worst = f64::NEG_INFINITY;
    let mut limit = f64::INFINITY;
    for m in [common::straight(), common::staged()] {
        let k = m.kernel();
        limit = limit.min(10.0 * k.eps_map);
        for addr in ["0", "1,-1;0,2", "3;-3,0,1"] {
            let c = continuum_cover(k, &Address::parse(addr, cfg.s_max).unwrap(), 20, &cfg).unwrap();
            worst = c.steps.iter().map(|s| s.worst_excess).fold(worst, f64::max);
        }
    }
    let k = common::staged();
    let a = Address::parse("0,1", cfg.s_max).unwrap();
    let draw = || {
        let covers: Vec<_> = (0..5).map(|d| continuum_cover(k.kernel(), &a, d, &cfg).unwrap()).collect();
        render(&covers, &Window::default())
    };
    let same = draw() == draw();
    outcome(worst <= limit && same, format!("worst diam(after) - diam(before)/2 = {worst:.3e}, deterministic render {same}"))
}

fn c14() -> Outcome {
    let m = common::straight();
    let mut total = 0;
    let mut crooked = 0;
    let quads = [(9.0, 10.0, 11.0, 12.0), (9.0, 20.0, 40.0, 80.0), (39.0, 73.0, 107.0, 141.0), (100.0, 300.0, 600.0, 900.0)];
    for (a, b, c, d) in quads {
        let q = Quadruple::new(a, b, c, d).unwrap();
        for n in 0..=8 {
            let f = minimal_covers(&m, &q, n).unwrap();
            total += f.len();
            crooked += f.crooked_count();
        }
        crooked += usize::from(hypothesis_check(&m, &q, 0, 8).unwrap().success());
    }
    outcome(crooked == 0, format!("{crooked} witnesses over {total} intervals, {} quadruples, n <= 8", quads.len()))
}

fn main() {
    let cfg = VerifyConfig::default();
    let t = Instant::now();
    let build = BuildConfig { nu0: Some(common::NU0), growth_c: Some(common::GROWTH_C), ..BuildConfig::default() };
    let mut st = BuildState::new(build).unwrap();
    let q = st.schedule()[0];
    let stage_ok = st.run_stage(&q).map(|_| ()).map_err(|e| e.to_string());
    let took = t.elapsed();

    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "oracle agreement", c1()),
        (2, "round trip", c2()),
        (3, "expansion", c3(&cfg)),
        (4, "properties of phi", c4(&cfg)),
        (5, "inverse vs phi", c5(&cfg)),
        (6, "bounded decorations", c6(&cfg)),
        (7, "growth", c7(&cfg)),
        (8, "single minimal interval", c8(&cfg)),
    ];
    match &stage_ok {
        Ok(()) => {
            results.push((9, "crookedness creation", c9(&st)));
            results.push((10, "approximation by close maps", c10()));
            results.push((11, "end-to-end stage", c11(&st, took)));
            results.push((12, "lower order", c12(&st)));
        }
        Err(e) => {
            results.push((9, "crookedness creation", outcome(false, format!("stage failed: {e}"))));
            results.push((10, "approximation by close maps", c10()));
            results.push((11, "end-to-end stage", outcome(false, format!("stage failed: {e}"))));
            results.push((12, "lower order", outcome(false, format!("stage failed: {e}"))));
        }
    }
    results.push((13, "backward separation", c13()));
    results.push((14, "negative control", c14()));

    let mut failed = 0;
    for (i, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("{tag} criterion {i:>2} {name}: {}", o.detail);
    }
    println!("{} of {} criteria passed in {:.1} s", results.len() - failed, results.len(), t.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
