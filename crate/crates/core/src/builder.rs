//! Finite stages of the inductive wiggle construction.
//!
//! A stage takes an integer quadruple Q, shrinks it to a chain
//! S_0 < S_1 < ... < S_m = Q and appends one wiggle per chain step over the
//! right-most minimal interval that is not yet crooked, until every minimal
//! interval over Q is crooked. The result is certified by `hypothesis_check`
//! and re-checked on a refreshed kernel.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::covers::{hypothesis_check, minimal_covers, stabilize_n0, HypothesisOutcome, IntervalFamily, Mark, Quadruple};
use crate::error::{Error, Result};
use crate::kernel::{build_map, build_map_from, KernelConfig, MapKernel};
use crate::par;
use crate::projection::{build_projection, PiecewiseMonotoneMap};
use crate::tract::WiggleSpec;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    /// Lower bound for |Q| in the schedule; derived from nu0 when absent.
    pub k: Option<f64>,
    /// The n of the lower-order guard; 0 switches the guard off.
    pub n_guard: usize,
    pub stages: usize,
    /// Closeness target and window for choose_rho.
    pub eps: f64,
    pub tau: f64,
    pub rho_steps: usize,
    pub rho_iterates: usize,
    /// Length R - r of the probe wiggle used by choose_rho.
    pub probe_len: f64,
    /// Largest abscissa a wiggle may reach.
    pub coord_cap: f64,
    /// Largest number of wiggles.
    pub n_max: usize,
    /// Largest n1 tried when placing a wiggle.
    pub n1_max: usize,
    /// Iterates examined by hypothesis_check.
    pub n_check: usize,
    /// Largest n tried when stabilizing interval counts.
    pub n_stab: usize,
    /// Working decoration bound; measured when absent.
    pub nu0: Option<f64>,
    /// Working growth constant; measured when absent.
    pub growth_c: Option<f64>,
    pub kernel: KernelConfig,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            k: None,
            n_guard: 4,
            stages: 1,
            eps: 1e-6,
            tau: 20.0,
            rho_steps: 4,
            rho_iterates: 3,
            probe_len: 4.0,
            coord_cap: 1000.0,
            n_max: 5,
            n1_max: 3,
            n_check: 4,
            n_stab: 8,
            nu0: None,
            growth_c: None,
            kernel: KernelConfig::default(),
        }
    }
}

/// Specs used to measure the working nu0 and C.
pub fn reference_specs() -> Vec<WiggleSpec> {
    vec![WiggleSpec::straight(), WiggleSpec::new(vec![10.0], vec![13.0]), WiggleSpec::new(vec![20.0], vec![30.0])]
}

/// Working nu0 (largest geodesic diameter) and growth constant C over the
/// reference specs.
pub fn measure_constants(cfg: &KernelConfig) -> Result<(f64, f64)> {
    let mut nu: f64 = 0.0;
    let mut c: f64 = 1.0;
    for s in reference_specs() {
        let k = build_map(&s, cfg)?;
        nu = nu.max(k.nu_estimate(0.25).nu);
        c = c.max(fit_growth_constant(&k, 40.0).c);
    }
    Ok((nu, c))
}

/// Default K from the working nu0.
pub fn default_k(nu0: f64) -> f64 {
    (3.0 * nu0).ceil() + 12.0
}

/// All integer quadruples with size >= K and D <= cap, sorted by (D, A, B, C).
pub fn quadruple_schedule(k: f64, cap: f64) -> Vec<Quadruple> {
    let k = k.max(1.0);
    let a0 = (5.0 + k).ceil().max(9.0) as i64;
    let kk = k.ceil() as i64;
    let cap = cap.floor() as i64;
    let mut out = Vec::new();
    for d in a0 + 3 * kk..=cap {
        for a in a0..=d - 3 * kk {
            for b in a + kk..=d - 2 * kk {
                for c in b + kk..=d - kk {
                    let q = Quadruple { a: a as f64, b: b as f64, c: c as f64, d: d as f64 };
                    if q.size() >= k {
                        out.push(q);
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub q: Quadruple,
    pub n_star: usize,
    pub family: IntervalFamily,
    pub counts: Vec<(usize, usize, usize)>,
    pub persists: bool,
    pub min_margin: f64,
    pub fingerprint: String,
    pub eps_target: f64,
    pub eps_map: f64,
    pub recheck: Option<Recheck>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Recheck {
    pub fingerprint: String,
    /// Error bound the refreshed kernel was built to; eps_map is what it achieved.
    pub eps_target: f64,
    pub eps_map: f64,
    pub n_star: Option<usize>,
    /// Same n*, counts and crooked flags as the original.
    pub identical: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlacementReport {
    pub n1: usize,
    pub q_hat: Quadruple,
    pub r: f64,
    pub big_r: f64,
    pub spread: f64,
    /// (crooked, total) for U_1(q_hat) under the new map.
    pub post_crooked: (usize, usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageReport {
    pub q: Quadruple,
    pub chain: Vec<Quadruple>,
    /// Stabilized non-crooked counts: m before the stage, then after each wiggle.
    pub m_history: Vec<usize>,
    pub placements: Vec<PlacementReport>,
    pub rho: f64,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct BuildState {
    pub spec: WiggleSpec,
    pub certificates: Vec<Certificate>,
    pub rho_history: Vec<f64>,
    pub stages: Vec<StageReport>,
    pub nu0: f64,
    pub growth_c: f64,
    pub k: f64,
    pub cfg: BuildConfig,
    map: Arc<PiecewiseMonotoneMap>,
}

pub fn load_map(spec: &WiggleSpec, cfg: &KernelConfig) -> Result<PiecewiseMonotoneMap> {
    load_map_from(spec, cfg, None)
}

/// Kernel and projection for `spec`, warm-started from a prefix kernel.
pub fn load_map_from(spec: &WiggleSpec, cfg: &KernelConfig, hint: Option<&MapKernel>) -> Result<PiecewiseMonotoneMap> {
    let k = build_map_from(spec, cfg, hint)?;
    build_projection(Arc::new(k), f64::INFINITY)
}

impl BuildState {
    /// Start from the straight strip, measuring nu0 and C unless configured.
    pub fn new(cfg: BuildConfig) -> Result<Self> {
        let (nu0, growth_c) = match (cfg.nu0, cfg.growth_c) {
            (Some(a), Some(b)) => (a, b),
            (a, b) => {
                let (nu, c) = measure_constants(&cfg.kernel)?;
                (a.unwrap_or(nu), b.unwrap_or(c))
            }
        };
        let k = cfg.k.unwrap_or_else(|| default_k(nu0));
        let spec = WiggleSpec::straight();
        let map = Arc::new(load_map(&spec, &cfg.kernel)?);
        Ok(BuildState {
            spec,
            certificates: Vec::new(),
            rho_history: vec![spec_first_rho(&WiggleSpec::straight())],
            stages: Vec::new(),
            nu0,
            growth_c,
            k,
            cfg,
            map,
        })
    }

    pub fn map(&self) -> &PiecewiseMonotoneMap {
        &self.map
    }

    pub fn kernel(&self) -> &MapKernel {
        self.map.kernel()
    }

    fn set_spec(&mut self, spec: WiggleSpec) -> Result<()> {
        self.map = Arc::new(load_map_from(&spec, &self.cfg.kernel, Some(self.map.kernel()))?);
        self.spec = spec;
        Ok(())
    }

    /// Current lower bound for the next wiggle's r.
    pub fn rho(&self) -> f64 {
        *self.rho_history.last().expect("rho_0 is always present")
    }

    /// Stabilized number of minimal intervals over q that are not crooked.
    pub fn noncrooked(&self, q: &Quadruple) -> Result<usize> {
        let st = stabilize_n0(&self.map, q, self.nu0, self.cfg.n_stab)?;
        let fam = minimal_covers(&self.map, q, st.n0 + 2)?;
        Ok(fam.len() - fam.crooked_count())
    }

    /// The first `stages` quadruples of the schedule.
    pub fn schedule(&self) -> Vec<Quadruple> {
        let kk = self.k.ceil();
        let d0 = (5.0 + kk).max(9.0) + 3.0 * kk;
        let mut cap = d0;
        loop {
            let s = quadruple_schedule(self.k, cap);
            if s.len() >= self.cfg.stages {
                return s.into_iter().take(self.cfg.stages).collect();
            }
            cap += 1.0;
        }
    }

    /// Runs every configured stage on the schedule.
    pub fn run(&mut self) -> Result<()> {
        for q in self.schedule() {
            self.run_stage(&q)?;
        }
        Ok(())
    }

    pub fn run_stage(&mut self, q: &Quadruple) -> Result<&StageReport> {
        if q.size() < self.k {
            return Err(Error::Builder(format!("|Q| = {} below K = {}", q.size(), self.k)));
        }
        // the chain length depends on m, which depends on S_0; settle both
        let mut m = self.noncrooked(&q.shrink(q.size() / 4.0)?)?;
        let mut chain = chain_for(q, m)?;
        for _ in 0..3 {
            let m2 = self.noncrooked(&chain[0])?;
            if m2 == m {
                break;
            }
            m = m2;
            chain = chain_for(q, m)?;
        }
        let mut m_history = vec![m];
        let mut placements = Vec::new();
        let note;
        if m == 0 {
            note = "m = 0".to_string();
        } else {
            for i in 1..=m {
                if self.spec.n() >= self.cfg.n_max {
                    return Err(Error::Builder(format!("wiggle cap N_max = {} reached", self.cfg.n_max)));
                }
                let (spec, mut rep) = self.place_wiggle(&chain[i - 1])?;
                self.set_spec(spec)?;
                let post = minimal_covers(&self.map, &rep.q_hat, 1)?;
                rep.post_crooked = (post.crooked_count(), post.len());
                placements.push(rep);
                let mi = self.noncrooked(&chain[i])?;
                let prev = *m_history.last().expect("nonempty");
                m_history.push(mi);
                if mi >= prev {
                    return Err(Error::Builder(format!(
                        "non-crooked count did not decrease ({prev} -> {mi}) over {}",
                        chain[i]
                    )));
                }
                if mi == 0 {
                    break;
                }
            }
            note = format!("{} wiggle(s) appended", placements.len());
        }
        let cert = self.certify(q)?;
        self.certificates.push(cert);
        let rho = self.choose_rho(self.cfg.eps, self.cfg.tau)?.rho;
        self.rho_history.push(rho);
        self.stages.push(StageReport { q: *q, chain, m_history, placements, rho, note });
        Ok(self.stages.last().expect("just pushed"))
    }

    /// Smallest admissible r for a new wiggle: validity, rho and the guard.
    pub fn r_floor(&self) -> f64 {
        let valid = if self.spec.n() == 0 { 6.0 } else { self.spec.last_right() + 1.0 };
        valid.max(self.rho()).max(self.lower_order_guard(self.cfg.n_guard))
    }

    /// rho_min = n (nu0/2 + C (R_{N-1} + 1)) + nu0 once a wiggle exists.
    pub fn lower_order_guard(&self, n_guard: usize) -> f64 {
        if n_guard == 0 || self.spec.n() == 0 {
            return f64::NEG_INFINITY;
        }
        n_guard as f64 * (self.nu0 / 2.0 + self.growth_c * (self.spec.last_right() + 1.0)) + self.nu0
    }

    /// Appends a wiggle over the right-most non-crooked interval of U_{n1}(s).
    pub fn place_wiggle(&self, s: &Quadruple) -> Result<(WiggleSpec, PlacementReport)> {
        let nu = self.nu0;
        let floor = self.r_floor();
        let mut last_err = String::new();
        for n1 in 0..=self.cfg.n1_max {
            let fam = minimal_covers(&self.map, s, n1)?;
            let Some(iv) = fam.intervals.iter().rev().find(|i| !i.crooked()) else {
                return Err(Error::Builder(format!("every interval of U_{n1}{s} is already crooked")));
            };
            let (Some(a_hat), Some(d_hat)) = (iv.left(), iv.right()) else {
                last_err = format!("n1 = {n1}: interval beyond the representable range");
                continue;
            };
            let Some((b_hat, c_hat)) = closest_bc_pair(iv.marks()) else {
                last_err = format!("n1 = {n1}: no B/C pair inside the interval");
                continue;
            };
            let r = b_hat - nu;
            let big_r = c_hat + nu;
            let spread = (b_hat - a_hat).min(d_hat - c_hat);
            let q_hat = Quadruple::raw(a_hat, b_hat, c_hat, d_hat)?;
            if big_r > self.cfg.coord_cap {
                return Err(Error::Resolution {
                    what: format!("wiggle for {s} at n1 = {n1} exceeds the coordinate cap {}", self.cfg.coord_cap),
                    achieved: big_r,
                });
            }
            if r < floor {
                last_err = format!("n1 = {n1}: r = {r:.3} below the floor {floor:.3}");
                if floor > self.cfg.coord_cap {
                    return Err(Error::Guard(format!(
                        "minimal r {floor:.1} is beyond the coordinate cap {}",
                        self.cfg.coord_cap
                    )));
                }
                continue;
            }
            if a_hat <= self.spec.last_right() + 1.0 + nu {
                last_err = format!("n1 = {n1}: A^ = {a_hat:.3} too close to the previous wiggle");
                continue;
            }
            if spread < 2.0 * nu + 2.0 {
                last_err = format!("n1 = {n1}: spread {spread:.3} < 2 nu0 + 2");
                continue;
            }
            let spec = self.spec.with_wiggle(r, big_r)?;
            let rep = PlacementReport { n1, q_hat, r, big_r, spread, post_crooked: (0, 0) };
            return Ok((spec, rep));
        }
        if self.r_floor() > self.cfg.coord_cap {
            return Err(Error::Guard(format!("minimal r {floor:.1} is beyond the coordinate cap")));
        }
        Err(Error::Builder(format!("no placement for {s} up to n1 = {}: {last_err}", self.cfg.n1_max)))
    }

    /// hypothesis_check on q, repeated on a refreshed kernel.
    pub fn certify(&self, q: &Quadruple) -> Result<Certificate> {
        let out = hypothesis_check(&self.map, q, 0, self.cfg.n_check)?;
        let (Some(n_star), Some(family)) = (out.n_star, out.family.clone()) else {
            return Err(Error::Builder(format!("no certificate for {q}: counts {:?}", out.counts)));
        };
        let k = self.kernel();
        let mut cert = Certificate {
            q: *q,
            n_star,
            family,
            counts: out.counts.clone(),
            persists: out.persists.unwrap_or(false),
            min_margin: out.min_margin,
            fingerprint: k.fingerprint(),
            eps_target: self.cfg.kernel.eps_target,
            eps_map: k.eps_map,
            recheck: None,
        };
        cert.recheck = Some(recheck(k, &self.cfg.kernel.refreshed(), &cert, self.cfg.n_check)?);
        Ok(cert)
    }

    /// Whether every certificate still holds for the current spec.
    pub fn reverify(&self) -> Result<Vec<bool>> {
        self.certificates
            .iter()
            .map(|c| Ok(hypothesis_check(&self.map, &c.q, 0, self.cfg.n_check)?.success()))
            .collect()
    }

    /// Smallest rho in a doubling sequence whose probe wiggle moves phi^n by
    /// at most eps wherever min(phi^n, phi~^n) <= tau.
    pub fn choose_rho(&self, eps: f64, tau: f64) -> Result<RhoChoice> {
        rho_scan(&self.map, &self.cfg, eps, tau, true)
    }
}

fn spec_first_rho(spec: &WiggleSpec) -> f64 {
    spec.last_right() + 2.0
}

/// S_0 < ... < S_m = q, shrinking by |q| / (4 (m + 1)) per step.
fn chain_for(q: &Quadruple, m: usize) -> Result<Vec<Quadruple>> {
    let delta = q.size() / (4.0 * (m as f64 + 1.0));
    (0..=m).map(|i| q.shrink((m - i) as f64 * delta)).collect()
}

fn recheck(current: &MapKernel, cfg: &KernelConfig, cert: &Certificate, n_check: usize) -> Result<Recheck> {
    // cold start: a warm start stops the solve at the old residual
    let map = load_map(&current.spec, cfg)?;
    let out: HypothesisOutcome = hypothesis_check(&map, &cert.q, 0, n_check)?;
    let flags = |f: &IntervalFamily| f.intervals.iter().map(|i| (i.crooked(), i.lift)).collect::<Vec<_>>();
    let identical = out.n_star == Some(cert.n_star)
        && out.counts == cert.counts
        && out.family.as_ref().map(flags) == Some(flags(&cert.family));
    Ok(Recheck {
        fingerprint: map.kernel().fingerprint(),
        eps_target: cfg.eps_target,
        eps_map: map.kernel().eps_map,
        n_star: out.n_star,
        identical,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhoStep {
    pub rho: f64,
    pub sup: f64,
    /// Error bar of the sup from both kernels.
    pub err: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhoChoice {
    pub rho: f64,
    pub steps: Vec<RhoStep>,
    pub reached: bool,
}

/// Probe-and-test doubling for rho from R_{N-1} + 2, up to `rho_steps`
/// candidates. With `stop_early` the scan ends at the first candidate with
/// sup <= eps; otherwise every step is measured so the trend can be read.
pub fn rho_scan(base: &PiecewiseMonotoneMap, cfg: &BuildConfig, eps: f64, tau: f64, stop_early: bool) -> Result<RhoChoice> {
    let spec = &base.kernel().spec;
    let mut rho = spec_first_rho(spec).max(7.0);
    let mut steps = Vec::new();
    for _ in 0..cfg.rho_steps {
        let probe = spec.with_wiggle(rho, rho + cfg.probe_len)?;
        let pm = load_map_from(&probe, &cfg.kernel, Some(base.kernel()))?;
        let (sup, samples) = closeness_sup(base, &pm, 2.0 * (rho + cfg.probe_len), cfg.rho_iterates, tau)?;
        let err = 2.0 * (base.eps_phi + pm.eps_phi);
        steps.push(RhoStep { rho, sup, err, samples });
        if stop_early && sup <= eps {
            break;
        }
        rho *= 2.0;
    }
    let pick = steps.iter().find(|s| s.sup <= eps);
    Ok(RhoChoice {
        rho: pick.map_or(steps.last().map_or(rho, |s| s.rho), |s| s.rho),
        reached: pick.is_some(),
        steps,
    })
}

/// sup |phi^n(t) - psi^n(t)| over t in [4, t_max] and 1 <= n <= iters with
/// min(phi^n, psi^n) <= tau; the iteration stops once both exceed tau.
pub fn closeness_sup(
    phi: &PiecewiseMonotoneMap,
    psi: &PiecewiseMonotoneMap,
    t_max: f64,
    iters: usize,
    tau: f64,
) -> Result<(f64, usize)> {
    let n = 2000;
    let (lo, hi) = (4f64.ln(), t_max.ln());
    let grid: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let per = par::map(&grid, |&u| -> Result<(f64, usize)> {
        let (mut a, mut b) = (u, u);
        let mut sup: f64 = 0.0;
        let mut count = 0;
        for _ in 0..iters {
            let (x, y) = (phi.phi_u(a), psi.phi_u(b));
            if x.min(y) <= tau {
                sup = sup.max((x - y).abs());
                count += 1;
            }
            if x < 4.0 || y < 4.0 {
                break;
            }
            a = x.ln();
            b = y.ln();
        }
        Ok((sup, count))
    });
    let mut sup: f64 = 0.0;
    let mut count = 0;
    for p in per {
        let (s, c) = p?;
        sup = sup.max(s);
        count += c;
    }
    Ok((sup, count))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Smallest C with Re z / C <= log|F(z)| <= C Re z off the wiggles and
    /// R_j / C <= log|F(z)| <= C R_j inside W_j, over the samples.
    pub c: f64,
    pub worst_point: (f64, f64),
    pub samples: usize,
}

/// Fit of the growth constant on a grid over Re z in [4.25, x_max].
pub fn fit_growth_constant(kernel: &MapKernel, x_max: f64) -> GrowthFit {
    let spec = &kernel.spec;
    let x_hi = x_max.max(spec.last_right() + 10.0);
    let nx = ((x_hi - 4.25) / 0.25).ceil() as usize;
    let ny = 24;
    let pts: Vec<C64> = (0..=nx)
        .flat_map(|i| {
            (0..ny).map(move |j| {
                C64::new(4.25 + (x_hi - 4.25) * i as f64 / nx as f64, -PI + 2.0 * PI * (j as f64 + 0.5) / ny as f64)
            })
        })
        .filter(|z| spec.contains(*z).unwrap_or(false) && spec.dist_to_boundary(*z) > 1e-3)
        .collect();
    let vals = par::map(&pts, |&z| {
        let w = kernel.eval_forward(z).ok()?;
        if w.lambda < 4f64.ln() {
            return None;
        }
        let scale = match spec.wiggle_region_of(z) {
            Some(j) => spec.big_r[j],
            None => z.re,
        };
        Some(((scale / w.lambda).max(w.lambda / scale), z))
    });
    let mut fit = GrowthFit { c: 1.0, worst_point: (0.0, 0.0), samples: 0 };
    for (c, z) in vals.into_iter().flatten() {
        fit.samples += 1;
        if c > fit.c {
            fit.c = c;
            fit.worst_point = (z.re, z.im);
        }
    }
    fit
}

/// s(r) = max over the cross-section Re z = r of log Re F(z) / r.
pub fn measure_growth(kernel: &MapKernel, rs: &[f64]) -> Vec<(f64, f64)> {
    let spec = &kernel.spec;
    let ny = 64;
    par::map(rs, |&r| {
        let mut best = f64::NEG_INFINITY;
        for j in 0..ny {
            let z = C64::new(r, -PI + 2.0 * PI * (j as f64 + 0.5) / ny as f64);
            if !spec.contains(z).unwrap_or(false) || spec.dist_to_boundary(z) < 1e-3 {
                continue;
            }
            if let Ok(w) = kernel.eval_forward(z) {
                best = best.max(w.log_re());
            }
        }
        (r, best / r)
    })
}

/// Growth CSV: r, s(r).
pub fn growth_csv(rows: &[(f64, f64)]) -> String {
    let mut s = String::from("r,s\n");
    for (r, v) in rows {
        s.push_str(&format!("{r},{v}\n"));
    }
    s
}

/// Adjacent marks B/C with the smallest gap, as reals.
pub fn closest_bc_pair(marks: &[(f64, f64, Mark)]) -> Option<(f64, f64)> {
    marks
        .windows(2)
        .filter(|w| w[0].2 != w[1].2)
        .min_by(|x, y| (x[1].0 - x[0].0).total_cmp(&(y[1].0 - y[0].0)))
        .map(|w| (w[0].0.exp(), w[1].0.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_matches_brute_force() {
        let s = quadruple_schedule(1.0, 13.0);
        let mut brute = 0;
        for a in 9..=13 {
            for b in a + 1..=13 {
                for c in b + 1..=13 {
                    for d in c + 1..=13 {
                        let q = Quadruple { a: a as f64, b: b as f64, c: c as f64, d: d as f64 };
                        if q.size() >= 1.0 {
                            brute += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(s.len(), brute);
        assert_eq!(s[0], Quadruple { a: 9.0, b: 10.0, c: 11.0, d: 12.0 });
        let key = |q: &Quadruple| (q.d, q.a, q.b, q.c);
        assert!(s.windows(2).all(|w| key(&w[0]) < key(&w[1])));
    }

    #[test]
    fn schedule_respects_size() {
        let s = quadruple_schedule(2.0, 16.0);
        assert!(!s.contains(&Quadruple { a: 9.0, b: 10.0, c: 11.0, d: 12.0 }));
        assert!(s.contains(&Quadruple { a: 9.0, b: 11.0, c: 13.0, d: 15.0 }));
    }

    #[test]
    fn chain_is_increasing() {
        let q = Quadruple { a: 40.0, b: 80.0, c: 120.0, d: 160.0 };
        let c = chain_for(&q, 3).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c[3], q);
        assert!(c.windows(2).all(|w| w[0].is_below(&w[1])));
    }
}
