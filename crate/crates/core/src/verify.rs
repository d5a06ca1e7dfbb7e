//! Sampled checks of the map-level estimates, collected into a JSON report.
//!
//! Every check records its worst slack (bound minus measured value, so a
//! negative number is a violation) and the point where it occurred.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::builder::{fit_growth_constant, measure_growth, rho_scan, BuildConfig, RhoChoice};
use crate::covers::{minimal_covers, Quadruple};
use crate::error::Result;
use crate::kernel::{f0_exact, MapKernel};
use crate::logpolar::LogPolar;
use crate::par;
use crate::projection::PiecewiseMonotoneMap;
use crate::tract::WiggleSpec;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Points per sampled check.
    pub samples: usize,
    /// Random intervals for the single-interval check.
    pub un1_trials: usize,
    /// Lambda step of the decoration estimate.
    pub nu_step: f64,
    /// Right end of the growth fit.
    pub growth_x_max: f64,
    /// Closest sampled points may come to the boundary.
    pub boundary_gap: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: 7, samples: 1000, un1_trials: 20, nu_step: 0.25, growth_x_max: 40.0, boundary_gap: 1e-2 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub samples: usize,
    /// Smallest bound minus value seen.
    pub worst_slack: f64,
    pub witness: Option<(f64, f64)>,
    pub note: String,
}

/// Running minimum of slacks.
#[derive(Clone, Debug)]
struct Worst {
    slack: f64,
    at: Option<(f64, f64)>,
    n: usize,
}

impl Worst {
    fn new() -> Self {
        Worst { slack: f64::INFINITY, at: None, n: 0 }
    }

    fn see(&mut self, slack: f64, at: (f64, f64)) {
        self.n += 1;
        if !(slack >= self.slack) {
            self.slack = slack;
            self.at = Some(at);
        }
    }

    fn check(self, name: &str, note: String) -> Check {
        Check {
            name: name.into(),
            pass: self.n > 0 && self.slack >= 0.0,
            samples: self.n,
            worst_slack: self.slack,
            witness: self.at,
            note,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpecReport {
    pub spec: WiggleSpec,
    pub fingerprint: String,
    pub eps_map: f64,
    pub checks: Vec<Check>,
}

impl SpecReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub nu0: f64,
    pub growth_c: f64,
    pub specs: Vec<SpecReport>,
    pub closeness: Option<RhoChoice>,
    pub closeness_pass: Option<bool>,
    pub pass: bool,
}

fn rng(cfg: &VerifyConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
}

/// Right end of the sampled part of the tract.
fn x_span(spec: &WiggleSpec) -> f64 {
    (spec.last_right() + 10.0).max(30.0)
}

/// Random interior points of the tract, at least `gap` from the boundary.
pub fn interior_points(spec: &WiggleSpec, n: usize, x_hi: f64, gap: f64, seed: u64) -> Vec<C64> {
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = C64::new(g.gen_range(4.0..x_hi), g.gen_range(-PI..PI));
        if spec.contains(z).unwrap_or(false) && spec.dist_to_boundary(z) > gap {
            out.push(z);
        }
    }
    out
}

/// The fixed 40 x 25 grid on {4.5 <= Re z <= 30, |Im z| <= 3}.
pub fn oracle_grid() -> Vec<C64> {
    let (nx, ny) = (40, 25);
    (0..nx)
        .flat_map(|i| {
            (0..ny).map(move |j| C64::new(4.5 + 25.5 * i as f64 / (nx - 1) as f64, -3.0 + 6.0 * j as f64 / (ny - 1) as f64))
        })
        .collect()
}

/// Relative error against the closed form for the straight strip.
pub fn check_oracle(kernel: &MapKernel) -> Check {
    let grid = oracle_grid();
    let rel = par::map(&grid, |&z| {
        let w = kernel.eval_forward(z).ok()?;
        let d = C64::new(w.lambda, w.theta) - f0_exact(z).ln();
        Some((d.exp() - 1.0).norm())
    });
    let mut worst = Worst::new();
    for (z, r) in grid.iter().zip(rel) {
        worst.see(r.map_or(f64::NEG_INFINITY, |r| 1e-6 - r), (z.re, z.im));
    }
    worst.check("oracle", "relative error vs 5 sinh((z-4)/2)/sinh(1/2), bound 1e-6".into())
}

/// |F^{-1}(F(z)) - z| <= 10 eps_map on the tract part of the oracle grid.
pub fn check_roundtrip(kernel: &MapKernel, gap: f64) -> Check {
    let spec = &kernel.spec;
    let pts: Vec<C64> = oracle_grid()
        .into_iter()
        .filter(|&z| spec.contains(z).unwrap_or(false) && spec.dist_to_boundary(z) > gap)
        .collect();
    let tol = 10.0 * kernel.eps_map;
    let errs = par::map(&pts, |&z| kernel.eval_forward(z).map(|w| (kernel.eval_inverse(w) - z).norm()).ok());
    let mut worst = Worst::new();
    for (z, e) in pts.iter().zip(errs) {
        worst.see(e.map_or(f64::NEG_INFINITY, |e| tol - e), (z.re, z.im));
    }
    worst.check("roundtrip", format!("bound 10 eps_map = {tol:.2e}"))
}

/// |F'(z)| >= (Re F(z) / 2)(1 - 1e-4); slack in log units.
pub fn check_expansion(kernel: &MapKernel, cfg: &VerifyConfig) -> Check {
    let spec = &kernel.spec;
    let pts = interior_points(spec, cfg.samples, x_span(spec), cfg.boundary_gap, cfg.seed ^ 0x11);
    let vals = par::map(&pts, |&z| {
        let w = kernel.eval_forward(z).ok()?;
        let d = kernel.derivative_modulus(z).ok()?;
        let bound = w.log_re() - 2f64.ln() + (1.0 - 1e-4f64).ln();
        let mut slack = d.log_abs - bound;
        if w.re() >= 4.0 {
            slack = slack.min(d.log_abs - (2.0 * (1.0 - 1e-4f64)).ln());
        }
        Some(slack)
    });
    let mut worst = Worst::new();
    for (z, s) in pts.iter().zip(vals) {
        worst.see(s.unwrap_or(f64::NEG_INFINITY), (z.re, z.im));
    }
    worst.check("expansion", "log|F'| - log(Re F / 2 (1 - 1e-4)), and >= 2 where Re F >= 4".into())
}

/// Hyperbolic density |F'| / Re F >= 1/2 along the real axis.
pub fn check_density(kernel: &MapKernel, cfg: &VerifyConfig) -> Check {
    let spec = &kernel.spec;
    let x_hi = x_span(spec);
    let n = 400;
    let pts: Vec<C64> = (0..n)
        .map(|k| C64::new(4.0 + (x_hi - 4.0) * (k as f64 + 0.5) / n as f64, 0.0))
        .filter(|&z| spec.contains(z).unwrap_or(false) && spec.dist_to_boundary(z) > cfg.boundary_gap)
        .collect();
    let vals = par::map(&pts, |&z| {
        let w = kernel.eval_forward(z).ok()?;
        let d = kernel.derivative_modulus(z).ok()?;
        Some(d.log_abs - w.log_re() - 0.5f64.ln() - (1.0 - 1e-4f64).ln())
    });
    let mut worst = Worst::new();
    for (z, s) in pts.iter().zip(vals) {
        worst.see(s.unwrap_or(f64::NEG_INFINITY), (z.re, z.im));
    }
    worst.check("density", "log of |F'| / Re F against 1/2 on the real axis".into())
}

/// The four estimates on phi, each with slack 10 eps_phi.
pub fn check_phi_properties(map: &PiecewiseMonotoneMap, cfg: &VerifyConfig) -> Vec<Check> {
    let tol = 10.0 * map.eps_phi;
    let u_hi = map.kernel().u_tail() + 2.0;
    let u_lo = 4f64.ln();
    let mut g = rng(cfg, 0x22);
    let us: Vec<(f64, f64)> = (0..cfg.samples).map(|_| (g.gen_range(u_lo..u_hi), g.gen_range(u_lo..u_hi))).collect();
    let vals = par::map(&us, |&(u1, u2)| (map.phi_u(u1), map.phi_u(u2)));
    let (mut a, mut b, mut c, mut d) = (Worst::new(), Worst::new(), Worst::new(), Worst::new());
    for (&(u1, u2), &(p1, p2)) in us.iter().zip(&vals) {
        let (t1, t2) = (u1.exp(), u2.exp());
        let slack = |bound: f64, v: f64| bound + tol - v;
        a.see(slack((t1 - t2).abs() / 2.0, (p1 - p2).abs()), (t1, t2));
        for &(t, p) in &[(t1, p1), (t2, p2)] {
            if t >= 5.0 {
                b.see(slack(t, p), (t, p));
                c.see(slack(5.0 + 2.0 * (t.ln() - 5f64.ln()), p), (t, p));
            } else {
                b.see(slack(6.0, p), (t, p));
            }
            if t >= 15.0 {
                d.see(slack(t / 2.0, p), (t, p));
            } else if t >= 7.0 {
                d.see(slack(t - 1.0, p), (t, p));
            }
        }
    }
    let note = format!("slack 10 eps_phi = {tol:.2e}, t in [4, {:.3e}]", u_hi.exp());
    vec![
        a.check("phi_contraction", note.clone()),
        b.check("phi_below_diagonal", note.clone()),
        c.check("phi_log_bound", note.clone()),
        d.check("phi_simple_bounds", note),
    ]
}

/// |Re F^{-1}(w) - phi(Re w)| <= 6 for Re w >= 4 and |Im w| <= Re w + 2 pi.
pub fn check_fandphi(map: &PiecewiseMonotoneMap, cfg: &VerifyConfig) -> Check {
    let k = map.kernel();
    let u_hi = k.u_tail() + 2.0;
    let mut g = rng(cfg, 0x33);
    let ws: Vec<(f64, f64)> = (0..cfg.samples)
        .map(|_| {
            let x = g.gen_range(4f64.ln()..u_hi).exp();
            (x, g.gen_range(-1.0..1.0) * (x + 2.0 * PI))
        })
        .collect();
    let tol = 6.0 + 10.0 * map.eps_phi;
    let vals = par::map(&ws, |&(x, y)| {
        let w = LogPolar::new(0.5 * (x * x + y * y).ln(), y.atan2(x));
        (k.eval_inverse(w).re - map.phi(x)).abs()
    });
    let mut worst = Worst::new();
    for (&(x, y), v) in ws.iter().zip(vals) {
        worst.see(tol - v, (x, y));
    }
    worst.check("fandphi", "bound 6 + 10 eps_phi; witness is w".into())
}

/// Sector lemma with delta = 2 (nu + log(2 + 3 pi / 2)). Pairs are drawn on
/// the half-plane side and pulled back; pairs with |z - w| < delta are skipped.
pub fn check_sector(kernel: &MapKernel, nu: f64, cfg: &VerifyConfig) -> Check {
    let delta = 2.0 * (nu + (2.0 + 1.5 * PI).ln());
    let lam_hi = kernel.u_tail() + 4.0;
    let mut g = rng(cfg, 0x44);
    let mut pairs = Vec::with_capacity(cfg.samples * 4);
    for _ in 0..cfg.samples * 4 {
        let lw = g.gen_range(4f64.ln()..lam_hi);
        let fw = C64::from_polar(lw.exp(), g.gen_range(-1.0..1.0) * PI / 2.0 * (1.0 - 1e-9));
        let im = fw.im + g.gen_range(-2.0 * PI..2.0 * PI);
        let re = g.gen_range(-6.0..lam_hi + 2.0).exp();
        let fz = C64::new(re, im);
        if fz.norm() >= fw.norm() {
            pairs.push((fz, fw));
        }
    }
    let vals = par::map(&pairs, |&(fz, fw)| {
        let z = kernel.eval_inverse_c(fz);
        let w = kernel.eval_inverse_c(fw);
        ((z - w).norm() >= delta).then(|| fz.re - (fz.im.abs() + 2.0 * PI))
    });
    let mut worst = Worst::new();
    for (&(fz, _), v) in pairs.iter().zip(vals) {
        if let Some(s) = v {
            worst.see(s, (fz.re, fz.im));
            if worst.n >= cfg.samples {
                break;
            }
        }
    }
    worst.check("sector", format!("delta = {delta:.4}; slack Re F(z) - |Im F(z)| - 2 pi, witness is F(z)"))
}

/// Decoration bound: the geodesic-diameter sup is finite and moves by at
/// most 1% when the lambda grid is halved.
/// Also returns the estimate.
pub fn check_nu(kernel: &MapKernel, cfg: &VerifyConfig) -> (Check, f64) {
    let e = kernel.nu_estimate(cfg.nu_step);
    let mut worst = Worst::new();
    worst.see(if e.nu.is_finite() { 0.01 - e.rel_change } else { f64::NEG_INFINITY }, (e.lambda_at_max, e.nu));
    let c = worst.check("nu", format!("nu = {:.6}, refined {:.6}, change {:.2e}", e.nu, e.nu_refined, e.rel_change));
    (c, e.nu)
}

/// The fitted growth constant of this spec against the working C.
pub fn check_growth(kernel: &MapKernel, growth_c: f64, cfg: &VerifyConfig) -> Check {
    let fit = fit_growth_constant(kernel, cfg.growth_x_max);
    let mut worst = Worst::new();
    worst.see(growth_c - fit.c, fit.worst_point);
    let mut c = worst.check("growth", format!("fitted C = {:.5} over {} samples, working C = {growth_c:.5}", fit.c, fit.samples));
    c.samples = fit.samples;
    c
}

/// Slopes s(r) of log Re F on cross-sections: s >= 1/(2C) everywhere and,
/// for the straight strip, s in [0.45, 0.55] for r >= 30.
pub fn check_slopes(kernel: &MapKernel, growth_c: f64) -> Check {
    let x0 = kernel.spec.last_right() + 2.0;
    let rs: Vec<f64> = (0..20).map(|k| x0.max(30.0) + 5.0 * k as f64).collect();
    let rows = measure_growth(kernel, &rs);
    let straight = kernel.spec.n() == 0;
    let mut worst = Worst::new();
    for &(r, s) in &rows {
        let mut slack = s - 1.0 / (2.0 * growth_c);
        if straight && r >= 30.0 {
            slack = slack.min(s - 0.45).min(0.55 - s);
        }
        worst.see(slack, (r, s));
    }
    worst.check("slopes", format!("r from {:.1} to {:.1}", rs[0], rs[rs.len() - 1]))
}

/// #U_1(I) = 1 for random I = [A, D] with A >= 6, |I| >= nu, disjoint from
/// every window [r_j - nu, R_j + nu].
pub fn check_un1(map: &PiecewiseMonotoneMap, nu: f64, cfg: &VerifyConfig) -> Check {
    let spec = &map.kernel().spec;
    let windows: Vec<(f64, f64)> = spec.r.iter().zip(&spec.big_r).map(|(&r, &big_r)| (r - nu, big_r + nu)).collect();
    let hi = spec.last_right() + nu + 60.0;
    let mut g = rng(cfg, 0x55);
    let mut worst = Worst::new();
    let mut tries = 0;
    let mut notes = Vec::new();
    while worst.n < cfg.un1_trials && tries < 10_000 {
        tries += 1;
        let a = g.gen_range(6.0..hi);
        let d = a + nu * g.gen_range(1.0..3.0);
        if windows.iter().any(|&(l, r)| d > l && a < r) {
            continue;
        }
        let len = d - a;
        let slack = match Quadruple::raw(a, a + len / 3.0, a + 2.0 * len / 3.0, d).and_then(|q| minimal_covers(map, &q, 1)) {
            Ok(f) => {
                if f.len() != 1 {
                    notes.push(format!("[{a:.3}, {d:.3}] has {} intervals", f.len()));
                }
                if f.len() == 1 { 0.0 } else { -1.0 }
            }
            Err(e) => {
                notes.push(format!("[{a:.3}, {d:.3}]: {e}"));
                -1.0
            }
        };
        worst.see(slack, (a, d));
    }
    let note = if notes.is_empty() { format!("{} intervals", worst.n) } else { notes.join("; ") };
    worst.check("un1", note)
}

/// Every per-spec check. Oracle only applies to the straight strip, the
/// single-interval check only to specs with wiggles. The sector and
/// single-interval checks use the larger of nu0 and this spec's own bound.
pub fn verify_spec(map: &PiecewiseMonotoneMap, nu0: f64, growth_c: f64, cfg: &VerifyConfig) -> SpecReport {
    let k = map.kernel();
    let mut checks = Vec::new();
    if k.spec.n() == 0 {
        checks.push(check_oracle(k));
    }
    checks.push(check_roundtrip(k, cfg.boundary_gap));
    checks.push(check_expansion(k, cfg));
    checks.push(check_density(k, cfg));
    checks.extend(check_phi_properties(map, cfg));
    checks.push(check_fandphi(map, cfg));
    let (nu_check, nu_spec) = check_nu(k, cfg);
    let nu = nu0.max(nu_spec);
    checks.push(check_sector(k, nu, cfg));
    checks.push(nu_check);
    checks.push(check_growth(k, growth_c, cfg));
    checks.push(check_slopes(k, growth_c));
    if k.spec.n() > 0 {
        checks.push(check_un1(map, nu, cfg));
    }
    SpecReport { spec: k.spec.clone(), fingerprint: k.fingerprint(), eps_map: k.eps_map, checks }
}

/// Sup of |phi^n - phi~^n| must not increase along the doubling sequence
/// (up to error bars) and must end below eps.
pub fn closeness_ok(choice: &RhoChoice, eps: f64) -> bool {
    let steps = &choice.steps;
    let monotone = steps.windows(2).all(|w| w[1].sup <= w[0].sup + w[0].err + w[1].err);
    monotone && steps.last().is_some_and(|s| s.sup <= eps)
}

/// Runs `verify_spec` on each map with shared constants, plus the closeness
/// scan from the first map when `build` is given.
pub fn verify_all(
    maps: &[PiecewiseMonotoneMap],
    nu0: f64,
    growth_c: f64,
    cfg: &VerifyConfig,
    build: Option<&BuildConfig>,
) -> Result<VerificationReport> {
    let specs: Vec<SpecReport> = maps.iter().map(|m| verify_spec(m, nu0, growth_c, cfg)).collect();
    let (closeness, closeness_pass) = match (build, maps.first()) {
        (Some(b), Some(m)) => {
            let c = rho_scan(m, b, b.eps, b.tau, false)?;
            let ok = closeness_ok(&c, b.eps);
            (Some(c), Some(ok))
        }
        _ => (None, None),
    };
    let pass = specs.iter().all(|s| s.pass()) && closeness_pass.unwrap_or(true);
    Ok(VerificationReport { nu0, growth_c, specs, closeness, closeness_pass, pass })
}
