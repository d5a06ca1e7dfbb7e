//! Schwarz-Christoffel map from the strip {0 < Im s < 1} onto a wiggle tract.
//!
//! The left end of the strip goes to the boundary point 4, the right end to
//! the infinite end of the tract. Prevertices sit on both edges; the
//! derivative is
//!
//!   f'(s) = C exp(pi s / 2) prod_lower sinh(pi (s - x_k)/2)^(a_k - 1)
//!                            prod_upper cosh(pi (s - x_k)/2)^(a_k - 1)
//!
//! and is always handled through its logarithm.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::lm::{self, LmOptions};
use crate::par;
use crate::quadrature::RuleSet;
use crate::tract::{Segment, WiggleSpec};

const I: C64 = C64 { re: 0.0, im: 1.0 };
/// Distance from the outermost prevertex to the asymptotic end models.
pub const END_MARGIN: f64 = 12.0;

/// A boundary vertex of the tract together with its interior angle / pi.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub w: C64,
    pub alpha: f64,
}

/// Vertices of the lower and upper boundary chains in strip order.
pub fn vertices(spec: &WiggleSpec) -> (Vec<Vertex>, Vec<Vertex>) {
    let h = PI / 3.0;
    let v = |x: f64, y: f64, alpha: f64| Vertex { w: C64::new(x, y), alpha };
    let mut lower = vec![v(4.0, -PI, 0.5)];
    let mut upper = vec![v(4.0, PI, 0.5)];
    for (&r, &big_r) in spec.r.iter().zip(&spec.big_r) {
        lower.extend([v(r, -PI, 0.5), v(r, h, 1.5), v(big_r - 1.0, h, 2.0), v(r, h, 0.5), v(r, -PI, 0.5)]);
        upper.extend([v(big_r, PI, 0.5), v(big_r, -h, 0.5), v(r + 1.0, -h, 2.0), v(big_r, -h, 1.5), v(big_r, PI, 0.5)]);
    }
    (lower, upper)
}

/// Prevertex guess from the conformal lengths of the channels.
pub fn initial_guess(spec: &WiggleSpec) -> (Vec<f64>, Vec<f64>) {
    let h = 2.0 * PI / 3.0;
    let mut lower = vec![0.0];
    let mut upper = vec![0.0];
    let (mut s_prev, mut x_prev) = (-0.22, 4.0);
    for (&r, &big_r) in spec.r.iter().zip(&spec.big_r) {
        let l = big_r - r;
        let s_in = s_prev + (r - x_prev) / (2.0 * PI);
        let t1 = s_in + l / h;
        let t2 = t1 + l / h;
        let out = t2 + l / h;
        lower.extend([s_in - 0.15, s_in + 0.05, t1 - 0.3, t2 - 0.1, t2 + 0.1]);
        upper.extend([t1 + 0.1, t1 + 0.3, t2 - 0.3, out - 0.05, out + 0.15]);
        s_prev = out;
        x_prev = big_r;
    }
    (lower, upper)
}

/// Starting prevertices for `spec` from a solution for a prefix of it: the
/// solved prefix is kept and the new wiggles are guessed relative to it.
pub fn extend_start(spec: &WiggleSpec, prefix_lower: &[f64], prefix_upper: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (gl, gu) = initial_guess(spec);
    let shift = |solved: &[f64], guess: &[f64]| -> Vec<f64> {
        let k = solved.len();
        let d = solved[k - 1] - guess[k - 1];
        solved.iter().copied().chain(guess[k..].iter().map(|g| g + d)).collect()
    };
    (shift(prefix_lower, &gl), shift(prefix_upper, &gu))
}

/// log sinh(u) on the branch continuous over 0 <= Im u <= pi/2.
pub fn log_sinh(u: C64) -> C64 {
    if u.re > 15.0 {
        u - LN_2 + crate::logpolar::log1p_c(-(-2.0 * u).exp())
    } else if u.re < -15.0 {
        -u + I * PI - LN_2 + crate::logpolar::log1p_c(-(2.0 * u).exp())
    } else {
        let s = u.sinh();
        let im = if s.im <= 0.0 { 0.0 } else { s.im };
        C64::new(s.norm().ln(), im.atan2(s.re))
    }
}

/// log cosh(u) on the branch continuous over 0 <= Im u <= pi/2.
pub fn log_cosh(u: C64) -> C64 {
    if u.re > 15.0 {
        u - LN_2 + crate::logpolar::log1p_c((-2.0 * u).exp())
    } else if u.re < -15.0 {
        -u - LN_2 + crate::logpolar::log1p_c((2.0 * u).exp())
    } else {
        u.cosh().ln()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Resolution {
    /// Gauss nodes per quadrature piece.
    pub quad_nodes: usize,
    /// Longest quadrature piece in the strip.
    pub max_piece: f64,
    /// Spacing of the evaluation table along the strip.
    pub table_step: f64,
    /// Number of rows of the evaluation table across the strip.
    pub table_rows: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { quad_nodes: 16, max_piece: 2.0, table_step: 0.125, table_rows: 8 }
    }
}

impl Resolution {
    /// One refinement step.
    pub fn refined(&self) -> Self {
        Resolution {
            quad_nodes: self.quad_nodes + 8,
            max_piece: self.max_piece * 0.75,
            table_step: self.table_step,
            table_rows: self.table_rows,
        }
    }
}

/// The derivative data: prevertex positions, exponents and scale.
#[derive(Clone, Debug)]
pub struct Integrand {
    pos: Vec<C64>,
    alpha: Vec<f64>,
    n_lower: usize,
    log_c: C64,
    rules: RuleSet,
    max_piece: f64,
}

impl Integrand {
    pub fn new(lower_x: &[f64], upper_x: &[f64], lower_a: &[f64], upper_a: &[f64], res: &Resolution) -> Self {
        let mut pos: Vec<C64> = lower_x.iter().map(|&x| C64::new(x, 0.0)).collect();
        pos.extend(upper_x.iter().map(|&x| C64::new(x, 1.0)));
        let mut alpha = lower_a.to_vec();
        alpha.extend_from_slice(upper_a);
        Integrand {
            pos,
            alpha,
            n_lower: lower_x.len(),
            log_c: C64::new(0.0, 0.0),
            rules: RuleSet::new(res.quad_nodes),
            max_piece: res.max_piece,
        }
    }

    pub fn log_deriv(&self, s: C64) -> C64 {
        let mut l = self.log_c + s * (PI / 2.0);
        for (k, (&p, &a)) in self.pos.iter().zip(&self.alpha).enumerate() {
            let u = (s - p.re) * (PI / 2.0);
            l += (a - 1.0) * if k < self.n_lower { log_sinh(u) } else { log_cosh(u) };
        }
        l
    }

    pub fn deriv(&self, s: C64) -> C64 {
        self.log_deriv(s).exp()
    }

    fn min_dist(&self, p: C64, skip: Option<usize>) -> f64 {
        let mut d = f64::INFINITY;
        for (k, &q) in self.pos.iter().enumerate() {
            if Some(k) != skip {
                d = d.min((q - p).norm());
            }
        }
        d
    }

    /// Integral of f' along the segment between two regular points.
    pub fn path(&self, from: C64, to: C64) -> C64 {
        let rule = &self.rules.legendre;
        let mut total = C64::new(0.0, 0.0);
        let mut cur = from;
        let tiny = 1e-15 * (1.0 + to.norm());
        for _ in 0..4000 {
            let rest = (to - cur).norm();
            if rest <= tiny {
                break;
            }
            let h = rest.min(self.min_dist(cur, None) / 2.0).min(self.max_piece);
            let next = if h >= rest { to } else { cur + (to - cur) * (h / rest) };
            let half = (next - cur) / 2.0;
            let mid = (cur + next) / 2.0;
            let mut acc = C64::new(0.0, 0.0);
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                acc += *w * self.deriv(mid + half * *t);
            }
            total += half * acc;
            cur = next;
        }
        total
    }

    /// Integral of f' from prevertex k to a point `to`.
    pub fn from_vertex(&self, k: usize, to: C64) -> C64 {
        let za = self.pos[k];
        let len = (to - za).norm();
        if len == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let a = self.alpha[k];
        let h = len.min(self.min_dist(za, Some(k)) / 2.0).min(self.max_piece);
        let end = za + (to - za) * (h / len);
        let rule = self.rules.jacobi(a - 1.0);
        let half = (end - za) / 2.0;
        let mut acc = C64::new(0.0, 0.0);
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            // the weight carries (1+t)^(a-1); divide it out of f'
            let l = self.log_deriv(za + half * (1.0 + *t)) + (1.0 - a) * (1.0 + *t).ln();
            acc += *w * l.exp();
        }
        let first = half * acc;
        if h >= len {
            first
        } else {
            first + self.path(end, to)
        }
    }

    /// Integral of f' between two prevertices, split at the midpoint.
    pub fn side(&self, k1: usize, k2: usize) -> C64 {
        let mid = (self.pos[k1] + self.pos[k2]) / 2.0;
        self.from_vertex(k1, mid) - self.from_vertex(k2, mid)
    }

    fn leftmost(&self) -> f64 {
        self.pos.iter().fold(f64::INFINITY, |m, p| m.min(p.re))
    }

    /// Integral of f' from the left end of the strip to prevertex k.
    pub fn from_left_end(&self, k: usize) -> C64 {
        let z0 = C64::new(self.leftmost() - END_MARGIN, self.pos[k].im);
        // near the left end f' ~ c exp(pi s), whose antiderivative is f'/pi
        self.deriv(z0) / PI - self.from_vertex(k, z0)
    }
}

/// Prevertex problem in log-gap coordinates.
struct Problem {
    lower: Vec<Vertex>,
    upper: Vec<Vertex>,
    res: Resolution,
}

impl Problem {
    fn unpack(&self, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let nl = self.lower.len();
        let mut xl = vec![0.0];
        for i in 1..nl {
            let prev = xl[i - 1];
            xl.push(prev + p[i].exp());
        }
        let mut xu = vec![p[0]];
        for i in 1..self.upper.len() {
            let prev = xu[i - 1];
            xu.push(prev + p[nl - 1 + i].exp());
        }
        (xl, xu)
    }

    fn pack(&self, xl: &[f64], xu: &[f64]) -> Vec<f64> {
        let mut p = vec![xu[0]];
        p.extend(xl.windows(2).map(|w| (w[1] - w[0]).ln()));
        p.extend(xu.windows(2).map(|w| (w[1] - w[0]).ln()));
        p
    }

    fn integrand(&self, xl: &[f64], xu: &[f64], res: &Resolution) -> Integrand {
        let la: Vec<f64> = self.lower.iter().map(|v| v.alpha).collect();
        let ua: Vec<f64> = self.upper.iter().map(|v| v.alpha).collect();
        let mut g = Integrand::new(xl, xu, &la, &ua, res);
        // fix C by the left end: f(c1) - 4 = -i pi
        let i0 = g.from_left_end(0);
        g.log_c = (C64::new(0.0, -PI) / i0).ln();
        g
    }

    /// Side integrals, lower chain then upper chain; index 0 is the upper
    /// left-end integral.
    fn sides(&self, g: &Integrand) -> Vec<C64> {
        let nl = self.lower.len();
        let mut out = vec![g.from_left_end(nl)];
        out.extend((0..nl - 1).map(|k| g.side(k, k + 1)));
        out.extend((0..self.upper.len() - 1).map(|k| g.side(nl + k, nl + k + 1)));
        out
    }

    fn targets(&self) -> Vec<C64> {
        let mut t = vec![self.upper[0].w - 4.0];
        t.extend(self.lower.windows(2).map(|w| w[1].w - w[0].w));
        t.extend(self.upper.windows(2).map(|w| w[1].w - w[0].w));
        t
    }

    fn residual(&self, p: &[f64]) -> Vec<f64> {
        let (xl, xu) = self.unpack(p);
        let g = self.integrand(&xl, &xu, &self.res);
        self.sides(&g)
            .iter()
            .zip(self.targets())
            .map(|(s, t)| {
                let v = (s.norm() / t.norm()).ln();
                if v.is_finite() {
                    v
                } else {
                    1e6
                }
            })
            .collect()
    }
}

/// Solver diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub max_residual: f64,
    /// Largest vertex misplacement implied by the residuals.
    pub vertex_error: f64,
    /// Change of the side integrals under a finer quadrature.
    pub quadrature_error: f64,
    /// Measured derivative at the right end; the strip width 2 pi predicts 2 pi.
    pub k_inf: C64,
}

/// Find prevertices for `spec`, starting from `start` when given.
pub fn solve_prevertices(
    spec: &WiggleSpec,
    res: &Resolution,
    start: Option<(&[f64], &[f64])>,
) -> Result<(Vec<f64>, Vec<f64>, C64, SolveReport)> {
    let (lower, upper) = vertices(spec);
    let prob = Problem { lower, upper, res: res.clone() };
    let (gl, gu) = initial_guess(spec);
    let p0 = match start {
        Some((l, u)) => prob.pack(l, u),
        None => prob.pack(&gl, &gu),
    };
    let o = lm::solve(|p| prob.residual(p), &p0, &LmOptions::default());
    let out = if o.converged { o } else { continuation(spec, res)? };
    let (xl, xu) = prob.unpack(&out.x);
    let g = prob.integrand(&xl, &xu, res);
    let sides = prob.sides(&g);
    let targets = prob.targets();
    let vertex_error = sides
        .iter()
        .zip(&targets)
        .map(|(s, t)| (s.norm() - t.norm()).abs())
        .fold(0.0, f64::max);
    let fine = prob.integrand(&xl, &xu, &res.refined());
    let quadrature_error = prob
        .sides(&fine)
        .iter()
        .zip(&sides)
        .map(|(a, b)| (a - b).norm())
        .fold((fine.log_c - g.log_c).norm(), f64::max);
    let xr = xl.iter().chain(&xu).fold(f64::NEG_INFINITY, |m, &x| m.max(x)) + END_MARGIN;
    let k_inf = g.deriv(C64::new(xr, 0.5));
    let report = SolveReport {
        iterations: out.iterations,
        max_residual: lm::max_abs(&out.residual),
        vertex_error,
        quadrature_error,
        k_inf,
    };
    Ok((xl, xu, g.log_c, report))
}

/// Fallback: grow the wiggles from short stubs to full length.
fn continuation(spec: &WiggleSpec, res: &Resolution) -> Result<lm::LmOutcome> {
    let steps = 6;
    let mut prev: Option<(Vec<f64>, WiggleSpec)> = None;
    let mut last = None;
    for s in 1..=steps {
        let frac = s as f64 / steps as f64;
        let mut sp = spec.clone();
        for j in 0..sp.n() {
            let full = spec.big_r[j] - spec.r[j];
            sp.big_r[j] = spec.r[j] + 2.5 + (full - 2.5) * frac;
        }
        let (lo, up) = vertices(&sp);
        let p = Problem { lower: lo, upper: up, res: res.clone() };
        let (gl, gu) = initial_guess(&sp);
        let p0 = match &prev {
            None => p.pack(&gl, &gu),
            Some((x, psp)) => {
                let (xl, xu) = p.unpack(x);
                let (ol, ou) = initial_guess(psp);
                let l: Vec<f64> = xl.iter().zip(gl.iter().zip(&ol)).map(|(x, (g, o))| x + g - o).collect();
                let u: Vec<f64> = xu.iter().zip(gu.iter().zip(&ou)).map(|(x, (g, o))| x + g - o).collect();
                if l.windows(2).any(|w| w[1] <= w[0]) || u.windows(2).any(|w| w[1] <= w[0]) {
                    x.clone()
                } else {
                    p.pack(&l, &u)
                }
            }
        };
        let o = lm::solve(|q| p.residual(q), &p0, &LmOptions::default());
        prev = Some((o.x.clone(), sp));
        last = Some(o);
    }
    let o = last.expect("at least one continuation step");
    if !o.converged {
        let r = lm::max_abs(&o.residual);
        if r > 1e-9 || !r.is_finite() {
            return Err(Error::Resolution { what: "prevertex solve did not converge".into(), achieved: r });
        }
    }
    Ok(o)
}

/// The solved map with its evaluation tables.
#[derive(Clone, Debug)]
pub struct StripMap {
    pub spec: WiggleSpec,
    pub lower_x: Vec<f64>,
    pub upper_x: Vec<f64>,
    g: Integrand,
    images: Vec<C64>,
    x_left: f64,
    x_right: f64,
    tail_anchor: C64,
    tail_value: C64,
    tail_slope: C64,
    table_step: f64,
    table_rows: usize,
    table_cols: usize,
    table: Vec<C64>,
    slits: Vec<Segment>,
}

impl StripMap {
    pub fn assemble(spec: &WiggleSpec, lower_x: Vec<f64>, upper_x: Vec<f64>, log_c: C64, res: &Resolution) -> Self {
        let (lower, upper) = vertices(spec);
        let la: Vec<f64> = lower.iter().map(|v| v.alpha).collect();
        let ua: Vec<f64> = upper.iter().map(|v| v.alpha).collect();
        let mut g = Integrand::new(&lower_x, &upper_x, &la, &ua, res);
        g.log_c = log_c;
        let images: Vec<C64> = lower.iter().chain(&upper).map(|v| v.w).collect();
        let x_min = lower_x.iter().chain(&upper_x).fold(f64::INFINITY, |m, &x| m.min(x));
        let x_max = lower_x.iter().chain(&upper_x).fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        let x_left = x_min - END_MARGIN;
        let x_right = x_max + END_MARGIN;
        let mut map = StripMap {
            spec: spec.clone(),
            lower_x,
            upper_x,
            g,
            images,
            x_left,
            x_right,
            tail_anchor: C64::new(x_right, 0.5),
            tail_value: C64::new(0.0, 0.0),
            tail_slope: C64::new(0.0, 0.0),
            table_step: res.table_step,
            table_rows: res.table_rows,
            table_cols: ((x_right - x_left) / res.table_step).ceil() as usize + 1,
            table: Vec::new(),
            slits: spec.slits().into_iter().flatten().collect(),
        };
        map.tail_value = map.from_nearest_vertex(map.tail_anchor);
        map.tail_slope = map.g.deriv(map.tail_anchor);
        let cols = map.table_cols;
        let rows = map.table_rows;
        let table = par::map_range(cols * rows, |idx| map.from_nearest_vertex(map.grid_point(idx)));
        map.table = table;
        map
    }

    fn grid_point(&self, idx: usize) -> C64 {
        let (i, j) = (idx / self.table_rows, idx % self.table_rows);
        C64::new(self.x_left + i as f64 * self.table_step, (j as f64 + 0.5) / self.table_rows as f64)
    }

    fn nearest_vertex(&self, s: C64) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (k, p) in self.g.pos.iter().enumerate() {
            let d = (p - s).norm();
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    }

    fn from_nearest_vertex(&self, s: C64) -> C64 {
        let (k, _) = self.nearest_vertex(s);
        self.images[k] + self.g.from_vertex(k, s)
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn tail_slope(&self) -> C64 {
        self.tail_slope
    }

    pub fn tail_value(&self) -> C64 {
        self.tail_value
    }

    pub fn log_c(&self) -> C64 {
        self.g.log_c
    }

    pub fn log_deriv(&self, s: C64) -> C64 {
        if s.re >= self.x_right {
            self.tail_slope.ln()
        } else {
            self.g.log_deriv(s)
        }
    }

    pub fn deriv(&self, s: C64) -> C64 {
        self.log_deriv(s).exp()
    }

    /// f(s) for 0 <= Im s <= 1.
    pub fn eval(&self, s: C64) -> C64 {
        if s.re >= self.x_right {
            return self.tail_value + self.tail_slope * (s - self.tail_anchor);
        }
        if s.re <= self.x_left {
            return C64::new(4.0, 0.0) + self.g.deriv(s) / PI;
        }
        let i = (((s.re - self.x_left) / self.table_step).round() as usize).min(self.table_cols - 1);
        let j = ((s.im * self.table_rows as f64).floor().max(0.0) as usize).min(self.table_rows - 1);
        let idx = i * self.table_rows + j;
        let gp = self.grid_point(idx);
        let (k, dk) = self.nearest_vertex(s);
        if dk < (gp - s).norm() {
            self.images[k] + self.g.from_vertex(k, s)
        } else {
            self.table[idx] + self.g.path(gp, s)
        }
    }

    fn crosses_slit(&self, a: C64, b: C64) -> bool {
        let seg = Segment::new(a, b);
        self.slits.iter().any(|s| s.intersects(&seg))
    }

    /// Preimage of a tract point z. Starts at the nearest table point that
    /// sees z without crossing a slit, follows the straight segment by RK4
    /// and polishes with Newton.
    pub fn invert(&self, z: C64) -> Result<C64> {
        if z.re >= self.tail_value.re + 0.5 {
            let s = self.tail_anchor + (z - self.tail_value) / self.tail_slope;
            if s.re >= self.x_right {
                return Ok(s);
            }
        }
        let mut cand: Vec<(f64, usize)> = self.table.iter().enumerate().map(|(k, w)| ((w - z).norm(), k)).collect();
        let take = cand.len().min(48);
        if take < cand.len() {
            cand.select_nth_unstable_by(take, |a, b| a.0.total_cmp(&b.0));
            cand.truncate(take);
        }
        cand.sort_by(|a, b| a.0.total_cmp(&b.0));
        let tol = 1e-13 * (1.0 + z.norm());
        let mut best: Option<(f64, C64)> = None;
        for &(_, k) in cand.iter() {
            let zs = self.table[k];
            if self.crosses_slit(zs, z) {
                continue;
            }
            let s = self.follow(self.grid_point(k), zs, z);
            let s = self.newton(s, z);
            let e = (self.eval(s) - z).norm();
            if e <= tol {
                return Ok(s);
            }
            if best.is_none_or(|b| e < b.0) {
                best = Some((e, s));
            }
        }
        match best {
            Some((e, s)) if e <= 1e-9 * (1.0 + z.norm()) => Ok(s),
            Some((e, _)) => Err(Error::Resolution { what: format!("inverse at {z}"), achieved: e }),
            None => Err(Error::Domain(format!("no visible table point for {z}"))),
        }
    }

    fn follow(&self, s0: C64, z0: C64, z: C64) -> C64 {
        let dz = z - z0;
        let steps = ((dz.norm() / 0.05).ceil() as usize).clamp(4, 400);
        let h = 1.0 / steps as f64;
        let rhs = |s: C64| dz / self.deriv(clamp_strip(s));
        let mut s = s0;
        for _ in 0..steps {
            let k1 = rhs(s);
            let k2 = rhs(s + k1 * (h / 2.0));
            let k3 = rhs(s + k2 * (h / 2.0));
            let k4 = rhs(s + k3 * h);
            s = clamp_strip(s + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0));
        }
        s
    }

    fn newton(&self, mut s: C64, z: C64) -> C64 {
        let mut err = (self.eval(s) - z).norm();
        for _ in 0..40 {
            let fz = self.eval(s) - z;
            let step = fz / self.deriv(s);
            let mut lam = 1.0;
            let mut accepted = false;
            while lam > 1e-4 {
                let t = clamp_strip(s - step * lam);
                let e = (self.eval(t) - z).norm();
                if e < err {
                    s = t;
                    err = e;
                    accepted = true;
                    break;
                }
                lam /= 2.0;
            }
            if !accepted || step.norm() * lam < 1e-16 * (1.0 + s.norm()) {
                break;
            }
        }
        s
    }
}

fn clamp_strip(s: C64) -> C64 {
    C64::new(s.re, s.im.clamp(0.0, 1.0))
}
