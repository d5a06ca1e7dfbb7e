//! The normalized conformal map F: T -> H with F(5) = 5 and F(inf) = inf.
//!
//! With f the strip map, F(f(s)) = a * (-i exp(pi s)) + i b, where a > 0 and
//! real b are fixed by F(5) = 5. Everything on the half-plane side is kept in
//! log-polar form.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::logpolar::{log_shift, LogPolar};
use crate::par;
use crate::strip::{self, Resolution, SolveReport, StripMap};
use crate::tract::WiggleSpec;

const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const CACHE_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    pub resolution: Resolution,
    /// Largest acceptable eps_map.
    pub eps_target: f64,
    /// Refinement steps tried before giving up.
    pub max_refine: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { resolution: Resolution::default(), eps_target: 1e-6, max_refine: 2 }
    }
}

impl KernelConfig {
    /// Tighter target and one refinement step up, used to re-check results.
    pub fn refreshed(&self) -> Self {
        KernelConfig {
            resolution: self.resolution.refined(),
            eps_target: self.eps_target / 2.0,
            max_refine: self.max_refine,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MapKernel {
    pub spec: WiggleSpec,
    pub resolution: Resolution,
    pub strip: StripMap,
    pub ln_a: f64,
    pub b: f64,
    pub eps_map: f64,
    pub report: SolveReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelCache {
    pub version: u32,
    pub spec_hash: String,
    pub spec: WiggleSpec,
    pub resolution: Resolution,
    pub lower_x: Vec<f64>,
    pub upper_x: Vec<f64>,
    pub log_c: C64,
    pub ln_a: f64,
    pub b: f64,
    pub eps_map: f64,
    pub report: SolveReport,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicArc {
    pub lambda: f64,
    pub polyline: Vec<C64>,
    pub diam: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NuEstimate {
    pub nu: f64,
    pub nu_refined: f64,
    pub rel_change: f64,
    pub lambda_at_max: f64,
    pub grid_len: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DerivativeModulus {
    /// log |F'(z)|.
    pub log_abs: f64,
    /// Relative disagreement with a centered difference of F.
    pub rel_err: f64,
}

pub fn build_map(spec: &WiggleSpec, cfg: &KernelConfig) -> Result<MapKernel> {
    build_map_from(spec, cfg, None)
}

/// As `build_map`, warm-started from a kernel whose spec is a prefix of
/// `spec` (or equal to it).
pub fn build_map_from(spec: &WiggleSpec, cfg: &KernelConfig, hint: Option<&MapKernel>) -> Result<MapKernel> {
    spec.validate().map_err(|v| Error::Spec(v.to_string()))?;
    let mut res = cfg.resolution.clone();
    let mut warm: Option<(Vec<f64>, Vec<f64>)> = hint.and_then(|h| {
        let n = h.spec.n();
        let prefix = n <= spec.n() && h.spec.r[..] == spec.r[..n] && h.spec.big_r[..] == spec.big_r[..n];
        prefix.then(|| strip::extend_start(spec, &h.strip.lower_x, &h.strip.upper_x))
    });
    let mut achieved = f64::INFINITY;
    for _ in 0..=cfg.max_refine {
        let start = warm.as_ref().map(|(l, u)| (l.as_slice(), u.as_slice()));
        let (xl, xu, log_c, report) = strip::solve_prevertices(spec, &res, start)?;
        let k = MapKernel::assemble(spec, &res, xl.clone(), xu.clone(), log_c, report)?;
        achieved = k.eps_map;
        if k.eps_map <= cfg.eps_target {
            return Ok(k);
        }
        warm = Some((xl, xu));
        res = res.refined();
    }
    Err(Error::Resolution { what: "eps_map above target after refinement".into(), achieved })
}

impl MapKernel {
    fn assemble(
        spec: &WiggleSpec,
        res: &Resolution,
        lower_x: Vec<f64>,
        upper_x: Vec<f64>,
        log_c: C64,
        report: SolveReport,
    ) -> Result<Self> {
        let strip = StripMap::assemble(spec, lower_x, upper_x, log_c, res);
        let s5 = strip.invert(C64::new(5.0, 0.0))?;
        let theta5 = PI * s5.im - FRAC_PI_2;
        let ln_re5 = PI * s5.re + theta5.cos().ln();
        let ln_a = 5f64.ln() - ln_re5;
        let b = -5.0 * theta5.tan();
        let scale = strip::vertices(spec).0.iter().map(|v| v.w.norm()).fold(8.0, f64::max);
        let eps_map = 4.0 * (report.vertex_error + report.quadrature_error) + 64.0 * f64::EPSILON * scale;
        Ok(MapKernel { spec: spec.clone(), resolution: res.clone(), strip, ln_a, b, eps_map, report })
    }

    pub fn to_cache(&self) -> KernelCache {
        KernelCache {
            version: CACHE_VERSION,
            spec_hash: self.spec.hash(),
            spec: self.spec.clone(),
            resolution: self.resolution.clone(),
            lower_x: self.strip.lower_x.clone(),
            upper_x: self.strip.upper_x.clone(),
            log_c: self.strip.log_c(),
            ln_a: self.ln_a,
            b: self.b,
            eps_map: self.eps_map,
            report: self.report.clone(),
        }
    }

    pub fn from_cache(c: &KernelCache) -> Result<Self> {
        if c.version != CACHE_VERSION {
            return Err(Error::Domain(format!("kernel cache version {} unsupported", c.version)));
        }
        if c.spec.hash() != c.spec_hash {
            return Err(Error::Domain("kernel cache spec hash mismatch".into()));
        }
        let strip = StripMap::assemble(&c.spec, c.lower_x.clone(), c.upper_x.clone(), c.log_c, &c.resolution);
        Ok(MapKernel {
            spec: c.spec.clone(),
            resolution: c.resolution.clone(),
            strip,
            ln_a: c.ln_a,
            b: c.b,
            eps_map: c.eps_map,
            report: c.report.clone(),
        })
    }

    /// Short identifier of spec, resolution and error bound.
    pub fn fingerprint(&self) -> String {
        let h = self.spec.hash();
        format!("{}-q{}-e{:.1e}", &h[..12], self.resolution.quad_nodes, self.eps_map)
    }

    /// Strip coordinate of a half-plane point.
    pub fn zeta_of(&self, w: LogPolar) -> C64 {
        let l = log_shift(C64::new(w.lambda, w.theta), -self.b) - self.ln_a;
        (l + I * FRAC_PI_2) / PI
    }

    /// Half-plane point of a strip coordinate.
    pub fn w_of_zeta(&self, s: C64) -> LogPolar {
        let l = log_shift(C64::new(self.ln_a + PI * s.re, PI * s.im - FRAC_PI_2), self.b);
        LogPolar::new(l.re, l.im)
    }

    /// F(z).
    pub fn eval_forward(&self, z: C64) -> Result<LogPolar> {
        if !self.spec.contains(z)? {
            return Err(Error::Domain(format!("{z} is outside the tract")));
        }
        let s = self.strip.invert(z)?;
        Ok(self.w_of_zeta(s))
    }

    /// F^{-1}(w); the closure of T is reached for |theta| = pi/2.
    pub fn eval_inverse(&self, w: LogPolar) -> C64 {
        self.strip.eval(self.zeta_of(w))
    }

    pub fn eval_inverse_c(&self, w: C64) -> C64 {
        self.eval_inverse(LogPolar::from_complex(w))
    }

    /// log |F'(z)| from the strip derivative, with a centered-difference check.
    pub fn derivative_modulus(&self, z: C64) -> Result<DerivativeModulus> {
        let d = self.spec.dist_to_boundary(z);
        if d < 1e-6 {
            return Err(Error::Domain(format!("derivative unreliable at {z}: distance {d:.1e} to the boundary")));
        }
        if !self.spec.contains(z)? {
            return Err(Error::Domain(format!("{z} is outside the tract")));
        }
        let s = self.strip.invert(z)?;
        let w = self.w_of_zeta(s);
        let log_abs = self.ln_a + PI.ln() + PI * s.re - self.strip.log_deriv(s).re;
        let h = 1e-5 * d.min(1.0);
        let wp = self.eval_forward(z + h)?;
        let wm = self.eval_forward(z - h)?;
        // |F(z+h) - F(z-h)| / |F(z)| from log differences
        let dp = C64::new(wp.lambda - w.lambda, wp.theta - w.theta).exp();
        let dm = C64::new(wm.lambda - w.lambda, wm.theta - w.theta).exp();
        let fd = ((dp - dm).norm() / (2.0 * h)).ln() + w.lambda;
        Ok(DerivativeModulus { log_abs, rel_err: (fd - log_abs).abs() })
    }

    /// phi in log coordinates: Re F^{-1}(e^u).
    pub fn phi_log(&self, u: f64) -> f64 {
        self.strip.eval(self.zeta_of(LogPolar::from_log(u))).re
    }

    /// d phi / du at t = e^u.
    pub fn dphi_du(&self, u: f64) -> f64 {
        let s = self.zeta_of(LogPolar::from_log(u));
        let ds = 1.0 / (PI * (C64::new(1.0, 0.0) - I * self.b * (-u).exp()));
        (self.strip.deriv(s) * ds).re
    }

    /// u beyond which phi is given by the straight-strip model.
    pub fn u_tail(&self) -> f64 {
        let x = self.strip.x_right();
        self.w_of_zeta(C64::new(x, 0.5)).lambda + 1.0
    }

    /// Preimage of the circle |w| = e^lambda, sampled until consecutive
    /// points are at most `step` apart.
    pub fn vertical_geodesic(&self, lambda: f64) -> GeodesicArc {
        self.geodesic_with(lambda, 0.25)
    }

    pub fn geodesic_with(&self, lambda: f64, step: f64) -> GeodesicArc {
        let th_max = FRAC_PI_2 * (1.0 - 1e-12);
        let at = |th: f64| self.eval_inverse(LogPolar::new(lambda, th));
        let n0 = 33;
        let mut pts: Vec<(f64, C64)> = (0..n0)
            .map(|k| {
                let th = -th_max + 2.0 * th_max * k as f64 / (n0 - 1) as f64;
                (th, at(th))
            })
            .collect();
        for _ in 0..12 {
            let mut next = Vec::with_capacity(pts.len() * 2);
            let mut split = false;
            for w in pts.windows(2) {
                next.push(w[0]);
                if (w[1].1 - w[0].1).norm() > step {
                    let th = (w[0].0 + w[1].0) / 2.0;
                    next.push((th, at(th)));
                    split = true;
                }
            }
            next.push(*pts.last().expect("nonempty"));
            pts = next;
            if !split {
                break;
            }
        }
        let polyline: Vec<C64> = pts.into_iter().map(|p| p.1).collect();
        let diam = diameter(&polyline);
        GeodesicArc { lambda, polyline, diam }
    }

    /// Largest geodesic diameter over a grid of lambda values, with the best
    /// few grid maxima polished by golden-section search.
    pub fn estimate_nu(&self, grid: &[f64]) -> (f64, f64) {
        let d = par::map(grid, |&l| self.vertical_geodesic(l).diam);
        let n = grid.len();
        let mut peaks: Vec<usize> = (0..n)
            .filter(|&i| (i == 0 || d[i] >= d[i - 1]) && (i + 1 == n || d[i] >= d[i + 1]))
            .collect();
        peaks.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
        peaks.truncate(4);
        let polished = par::map(&peaks, |&i| {
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(n - 1)];
            let (l, v) = self.golden_max(a, b);
            if v > d[i] { (v, l) } else { (d[i], grid[i]) }
        });
        polished.into_iter().fold((0.0, grid.first().copied().unwrap_or(0.0)), |m, p| if p.0 > m.0 { p } else { m })
    }

    fn golden_max(&self, mut a: f64, mut b: f64) -> (f64, f64) {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let f = |l: f64| self.vertical_geodesic(l).diam;
        let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
        let (mut f1, mut f2) = (f(x1), f(x2));
        while b - a > 1e-4 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = f(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = f(x1);
            }
        }
        if f1 > f2 { (x1, f1) } else { (x2, f2) }
    }

    /// Lambda range covering every geodesic that meets a wiggle, plus the
    /// straight part on both sides.
    pub fn nu_range(&self) -> (f64, f64) {
        (4f64.ln(), self.u_tail() + 2.0)
    }

    /// estimate_nu on a uniform grid and on its refinement.
    pub fn nu_estimate(&self, step: f64) -> NuEstimate {
        let (lo, hi) = self.nu_range();
        let grid = |h: f64| -> Vec<f64> {
            let n = ((hi - lo) / h).ceil() as usize;
            (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
        };
        let g1 = grid(step);
        let g2 = grid(step / 2.0);
        let (nu, at) = self.estimate_nu(&g1);
        let (nu2, at2) = self.estimate_nu(&g2);
        NuEstimate {
            nu: nu.max(nu2),
            nu_refined: nu2,
            rel_change: (nu2 - nu).abs() / nu2.max(1e-300),
            lambda_at_max: if nu2 >= nu { at2 } else { at },
            grid_len: g2.len(),
        }
    }
}

/// Largest pairwise distance.
pub fn diameter(pts: &[C64]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max((pts[i] - pts[j]).norm());
        }
    }
    d
}

/// The closed form for the straight strip, F0(z) = 5 sinh((z-4)/2) / sinh(1/2).
pub fn f0_exact(z: C64) -> C64 {
    5.0 * ((z - 4.0) / 2.0).sinh() / 0.5f64.sinh()
}

/// Inverse of the closed form on the real axis.
pub fn phi0_exact(t: f64) -> f64 {
    4.0 + 2.0 * (t * 0.5f64.sinh() / 5.0).asinh()
}
