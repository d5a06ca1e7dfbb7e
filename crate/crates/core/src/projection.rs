//! The real projection phi(t) = Re F^{-1}(t) as a piecewise monotone map.
//!
//! Arguments are handled as u = log t so that preimages of large values stay
//! representable; values are plain tract abscissae.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::MapKernel;
use crate::par;

/// Sample spacing in u used to locate turning points.
const SCAN_STEP: f64 = 0.02;
/// Largest u whose exponential is a finite double.
pub const U_FINITE: f64 = 709.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Piece {
    /// Ends in u; the last piece is unbounded on the right.
    pub lo: f64,
    pub hi: f64,
    pub dir: Direction,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl Piece {
    fn covers(&self, c: f64) -> bool {
        let (a, b) = if self.v_lo <= self.v_hi { (self.v_lo, self.v_hi) } else { (self.v_hi, self.v_lo) };
        c >= a && c <= b
    }
}

/// A root in u with its error bar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub u: f64,
    pub err: f64,
}

#[derive(Clone, Debug)]
pub struct PiecewiseMonotoneMap {
    kernel: Arc<MapKernel>,
    pub u_min: f64,
    pub u_max: f64,
    pub pieces: Vec<Piece>,
    /// Turning points in u and the width of their final bracket.
    pub breaks: Vec<(f64, f64)>,
    pub eps_phi: f64,
    pub tol_root: f64,
    /// Largest value of phi left of the last turning point; above it every
    /// value has exactly one preimage.
    pub v_star: f64,
}

pub fn build_projection(kernel: Arc<MapKernel>, t_max_log: f64) -> Result<PiecewiseMonotoneMap> {
    let u_min = 4f64.ln();
    let u_scan = kernel.u_tail().max(u_min + 1.0);
    let n = ((u_scan - u_min) / SCAN_STEP).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|k| u_min + (u_scan - u_min) * k as f64 / n as f64).collect();
    let slope = par::map(&grid, |&u| kernel.dphi_du(u));
    let tol_break = 1e-12;
    let mut breaks = Vec::new();
    for k in 0..n {
        if slope[k] == 0.0 || slope[k].signum() != slope[k + 1].signum() {
            let (mut a, mut b) = (grid[k], grid[k + 1]);
            let sa = slope[k].signum();
            while b - a > tol_break * (1.0 + b.abs()) {
                let m = 0.5 * (a + b);
                if kernel.dphi_du(m).signum() == sa {
                    a = m;
                } else {
                    b = m;
                }
            }
            breaks.push((0.5 * (a + b), b - a));
        }
    }
    let eps_phi = kernel.eps_map;
    let mut pieces = Vec::new();
    let mut lo = u_min;
    let mut up = slope[0] > 0.0;
    for &(t, _) in breaks.iter().chain(std::iter::once(&(f64::INFINITY, 0.0))) {
        let v_lo = kernel.phi_log(lo);
        let v_hi = if t.is_finite() { kernel.phi_log(t) } else { f64::INFINITY };
        pieces.push(Piece { lo, hi: t, dir: if up { Direction::Up } else { Direction::Down }, v_lo, v_hi });
        lo = t;
        up = !up;
    }
    if pieces.last().map(|p| p.dir) != Some(Direction::Up) {
        return Err(Error::Resolution { what: "phi does not end increasing".into(), achieved: 0.0 });
    }
    let v_star = pieces[..pieces.len() - 1].iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.v_lo).max(p.v_hi));
    let tol_root = kernel.eps_map / 10.0;
    Ok(PiecewiseMonotoneMap { kernel, u_min, u_max: t_max_log, pieces, breaks, eps_phi, tol_root, v_star })
}

impl PiecewiseMonotoneMap {
    pub fn kernel(&self) -> &MapKernel {
        &self.kernel
    }

    pub fn kernel_arc(&self) -> Arc<MapKernel> {
        self.kernel.clone()
    }

    /// Error bound for a value of phi of size v.
    pub fn err_at(&self, v: f64) -> f64 {
        self.eps_phi + 16.0 * f64::EPSILON * v.abs()
    }

    pub fn phi_u(&self, u: f64) -> f64 {
        self.kernel.phi_log(u)
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.phi_u(t.ln())
    }

    pub fn dphi_du(&self, u: f64) -> f64 {
        self.kernel.dphi_du(u)
    }

    fn check_domain(&self, u: f64) -> Result<()> {
        if !(u >= self.u_min - 1e-12) || u > self.u_max {
            return Err(Error::Domain(format!("log t = {u} outside [{}, {}]", self.u_min, self.u_max)));
        }
        Ok(())
    }

    /// phi^n(t) for t = e^u; n = 0 gives t.
    pub fn phi_iter_u(&self, u: f64, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(u.exp());
        }
        let mut u = u;
        let mut v = 0.0;
        for _ in 0..n {
            self.check_domain(u)?;
            v = self.phi_u(u);
            u = v.ln();
        }
        Ok(v)
    }

    pub fn phi_iter(&self, t: f64, n: usize) -> Result<f64> {
        self.phi_iter_u(t.ln(), n)
    }

    /// Image hull of [lo, hi] (in u) under phi.
    pub fn image_hull(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut a = self.phi_u(lo);
        let mut b = a;
        let v = self.phi_u(hi);
        a = a.min(v);
        b = b.max(v);
        for &(t, _) in &self.breaks {
            if t > lo && t < hi {
                let w = self.phi_u(t);
                a = a.min(w);
                b = b.max(w);
            }
        }
        (a, b)
    }

    /// All u in [lo, hi] with phi(e^u) = c, sorted, one per crossing piece.
    pub fn preimages(&self, c: f64, lo: f64, hi: f64) -> Result<Vec<Root>> {
        self.preimages_err(c, 0.0, lo, hi)
    }

    /// As `preimages`, for a target value c known only to within c_err.
    pub fn preimages_err(&self, c: f64, c_err: f64, lo: f64, hi: f64) -> Result<Vec<Root>> {
        let tang = 10.0 * (self.err_at(c) + c_err);
        for &(t, _) in &self.breaks {
            if t >= lo && t <= hi && (self.phi_u(t) - c).abs() <= tang {
                return Err(Error::Tangency(format!("value {c} within {tang:.1e} of a turning value")));
            }
        }
        let mut out = Vec::new();
        for p in &self.pieces {
            let a = p.lo.max(lo);
            let b = p.hi.min(hi);
            if !(a <= b) {
                continue;
            }
            let va = if a == p.lo { p.v_lo } else { self.phi_u(a) };
            let vb = if b == p.hi { p.v_hi } else if b.is_finite() { self.phi_u(b) } else { f64::INFINITY };
            let sub = Piece { lo: a, hi: b, dir: p.dir, v_lo: va, v_hi: vb };
            if !sub.covers(c) {
                continue;
            }
            let mut r = self.root_on(&sub, c);
            r.err += c_err / self.dphi_du(r.u).abs().max(1e-300);
            if out.last().is_none_or(|q: &Root| (r.u - q.u).abs() > q.err + r.err) {
                out.push(r);
            }
        }
        Ok(out)
    }

    /// Preimages over the whole domain.
    pub fn preimages_all(&self, c: f64) -> Result<Vec<Root>> {
        self.preimages(c, self.u_min, self.u_max)
    }

    /// Safeguarded Newton on one monotone piece.
    fn root_on(&self, p: &Piece, c: f64) -> Root {
        let sign = if p.dir == Direction::Up { 1.0 } else { -1.0 };
        let (mut a, mut b) = (p.lo, p.hi);
        if !b.is_finite() {
            // walk out along the linear tail until the bracket closes
            let mut step = 1.0f64.max(a.abs());
            b = a + step;
            while self.phi_u(b) < c {
                a = b;
                step *= 2.0;
                b = a + step;
            }
        }
        let mut u = 0.5 * (a + b);
        let tol = self.tol_root + 4.0 * f64::EPSILON * c.abs();
        for _ in 0..200 {
            let g = self.phi_u(u) - c;
            if sign * g > 0.0 {
                b = u;
            } else {
                a = u;
            }
            if g.abs() <= tol || b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
                break;
            }
            let d = self.dphi_du(u);
            let nu = u - g / d;
            u = if d != 0.0 && nu > a && nu < b { nu } else { 0.5 * (a + b) };
        }
        let d = self.dphi_du(u).abs().max(1e-300);
        let err = self.err_at(c) / d + 4.0 * f64::EPSILON * u.abs();
        Root { u, err }
    }

    /// Samples (t, phi(t), err) on a log-uniform grid, for dumps.
    pub fn samples(&self, u_hi: f64, n: usize) -> Vec<(f64, f64, f64)> {
        let grid: Vec<f64> = (0..=n).map(|k| self.u_min + (u_hi - self.u_min) * k as f64 / n as f64).collect();
        par::map(&grid, |&u| {
            let v = self.phi_u(u);
            (u.exp(), v, self.err_at(v))
        })
    }
}
