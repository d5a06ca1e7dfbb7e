//! The 2 pi i-periodic extension, its inverse branches, and outer covers of
//! Julia continua by backward iteration.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernel::{diameter, MapKernel};
use crate::logpolar::LogPolar;
use crate::par;

const TWO_PI: f64 = 2.0 * PI;

/// s_0 s_1 s_2 ...: a finite prefix followed by a repeated tail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Address {
    pub prefix: Vec<i64>,
    pub tail: Vec<i64>,
}

impl Address {
    pub fn zero() -> Self {
        Address { prefix: Vec::new(), tail: vec![0] }
    }

    pub fn new(prefix: Vec<i64>, tail: Vec<i64>, s_max: i64) -> Result<Self> {
        if let Some(s) = prefix.iter().chain(&tail).find(|s| s.abs() > s_max) {
            return Err(Error::Spec(format!("address entry {s} exceeds |s|_max = {s_max}")));
        }
        let tail = if tail.is_empty() { vec![0] } else { tail };
        Ok(Address { prefix, tail })
    }

    /// Parses "1,0,-2" or "1,0;2,3" (prefix;periodic tail).
    pub fn parse(text: &str, s_max: i64) -> Result<Self> {
        let list = |t: &str| -> Result<Vec<i64>> {
            t.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| x.parse::<i64>().map_err(|e| Error::Spec(format!("address entry {x:?}: {e}"))))
                .collect()
        };
        match text.split_once(';') {
            Some((p, t)) => Self::new(list(p)?, list(t)?, s_max),
            None => Self::new(list(text)?, Vec::new(), s_max),
        }
    }

    pub fn get(&self, n: usize) -> i64 {
        if n < self.prefix.len() {
            self.prefix[n]
        } else {
            self.tail[(n - self.prefix.len()) % self.tail.len()]
        }
    }
}

/// F^(z) = F(z - 2 pi i s) for z in T + 2 pi i s.
pub fn ext_forward(kernel: &MapKernel, z: C64, s: i64) -> Result<LogPolar> {
    let w = C64::new(z.re, z.im - TWO_PI * s as f64);
    if !kernel.spec.contains(w)? {
        return Err(Error::Domain(format!("{z} is outside T + 2 pi i {s}")));
    }
    kernel.eval_forward(w)
}

/// F^{-1}(w) + 2 pi i s.
pub fn inverse_branch(kernel: &MapKernel, w: C64, s: i64) -> C64 {
    kernel.eval_inverse(LogPolar::from_complex(w)) + C64::new(0.0, TWO_PI * s as f64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct CoverConfig {
    /// Truncation of the strip at Re = x_cut.
    pub x_cut: f64,
    /// Cell width and rows used to tile the truncated strip.
    pub cell_width: f64,
    pub rows: usize,
    /// Boundary samples per cell side.
    pub side_samples: usize,
    pub s_max: i64,
    pub max_depth: usize,
}

impl Default for CoverConfig {
    fn default() -> Self {
        CoverConfig { x_cut: 60.0, cell_width: 1.0, rows: 2, side_samples: 8, s_max: 3, max_depth: 40 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn diam(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    pub fn contains(&self, z: C64, tol: f64) -> bool {
        z.re >= self.x0 - tol && z.re <= self.x1 + tol && z.im >= self.y0 - tol && z.im <= self.y1 + tol
    }

    pub fn center(&self) -> C64 {
        C64::new((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    fn bound(pts: &[C64], pad: f64) -> Rect {
        let mut r = Rect { x0: f64::INFINITY, x1: f64::NEG_INFINITY, y0: f64::INFINITY, y1: f64::NEG_INFINITY };
        for p in pts {
            r.x0 = r.x0.min(p.re);
            r.x1 = r.x1.max(p.re);
            r.y0 = r.y0.min(p.im);
            r.y1 = r.y1.max(p.im);
        }
        Rect { x0: r.x0 - pad, x1: r.x1 + pad, y0: r.y0 - pad, y1: r.y1 + pad }
    }
}

/// Per-step record of a pullback chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepStat {
    pub step: usize,
    /// Largest diameter of a pulled-back cell (over its sample points).
    pub diam_max: f64,
    /// Largest ratio diam(after) / diam(before) over the cells.
    pub worst_ratio: f64,
    /// Largest diam(after) - diam(before)/2 over the cells.
    pub worst_excess: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxCover {
    pub depth: usize,
    pub address: Address,
    /// Outer boxes, inflated by 2 eps_map per pullback.
    pub boxes: Vec<Rect>,
    pub diam_max: f64,
    pub steps: Vec<StepStat>,
    #[serde(skip)]
    pub cells: Vec<Vec<C64>>,
}

impl BoxCover {
    /// All sample points of all cells.
    pub fn points(&self) -> impl Iterator<Item = &C64> {
        self.cells.iter().flatten()
    }

    /// JSON rectangles with depth tags.
    pub fn to_json(&self) -> serde_json::Value {
        let rects: Vec<_> = self
            .boxes
            .iter()
            .map(|b| serde_json::json!({"depth": self.depth, "x0": b.x0, "x1": b.x1, "y0": b.y0, "y1": b.y1}))
            .collect();
        serde_json::json!({"depth": self.depth, "address": self.address, "diam_max": self.diam_max, "boxes": rects})
    }
}

/// Cells tiling [4, x_cut] x [-pi, pi] + 2 pi i s, as boundary samples.
fn strip_cells(cfg: &CoverConfig, s: i64) -> Vec<Vec<C64>> {
    let nx = ((cfg.x_cut - 4.0) / cfg.cell_width).ceil().max(1.0) as usize;
    let dy = TWO_PI / cfg.rows as f64;
    let m = cfg.side_samples.max(1);
    let mut out = Vec::new();
    for i in 0..nx {
        let x0 = 4.0 + (cfg.x_cut - 4.0) * i as f64 / nx as f64;
        let x1 = 4.0 + (cfg.x_cut - 4.0) * (i + 1) as f64 / nx as f64;
        for r in 0..cfg.rows {
            let y0 = -PI + dy * r as f64 + TWO_PI * s as f64;
            let y1 = y0 + dy;
            let corners = [C64::new(x0, y0), C64::new(x1, y0), C64::new(x1, y1), C64::new(x0, y1)];
            let mut pts = Vec::with_capacity(4 * m);
            for k in 0..4 {
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                pts.extend((0..m).map(|t| a + (b - a) * (t as f64 / m as f64)));
            }
            out.push(pts);
        }
    }
    out
}

/// Outer cover of X_0^j: the truncated strip at s_j pulled back through
/// the branches s_{j-1}, ..., s_0.
pub fn continuum_cover(kernel: &MapKernel, address: &Address, depth: usize, cfg: &CoverConfig) -> Result<BoxCover> {
    if depth > cfg.max_depth {
        return Err(Error::Spec(format!("depth {depth} above the configured maximum {}", cfg.max_depth)));
    }
    if let Some(k) = (0..=depth).find(|&k| address.get(k).abs() > cfg.s_max) {
        return Err(Error::Spec(format!("address entry s_{k} exceeds |s|_max = {}", cfg.s_max)));
    }
    let mut cells = strip_cells(cfg, address.get(depth));
    let mut diam: Vec<f64> = par::map(&cells, |c| diameter(c));
    let mut steps = Vec::new();
    for k in (0..depth).rev() {
        let s = address.get(k);
        let next: Vec<Vec<C64>> = par::map(&cells, |c| c.iter().map(|&w| inverse_branch(kernel, w, s)).collect());
        let nd: Vec<f64> = par::map(&next, |c| diameter(c));
        let mut st = StepStat { step: depth - k, diam_max: 0.0, worst_ratio: 0.0, worst_excess: f64::NEG_INFINITY };
        for (a, b) in diam.iter().zip(&nd) {
            st.diam_max = st.diam_max.max(*b);
            st.worst_ratio = st.worst_ratio.max(b / a);
            st.worst_excess = st.worst_excess.max(b - a / 2.0);
        }
        if next.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Resolution { what: "pullback left the kernel window".into(), achieved: f64::NAN });
        }
        steps.push(st);
        cells = next;
        diam = nd;
    }
    let pad = 2.0 * kernel.eps_map * depth as f64;
    let boxes: Vec<Rect> = cells.iter().map(|c| Rect::bound(c, pad)).collect();
    let diam_max = diam.iter().copied().fold(0.0, f64::max);
    Ok(BoxCover { depth, address: address.clone(), boxes, diam_max, steps, cells })
}

/// Hausdorff distance between the sample sets of two covers.
pub fn hausdorff(a: &BoxCover, b: &BoxCover) -> f64 {
    let pa: Vec<C64> = a.points().copied().collect();
    let pb: Vec<C64> = b.points().copied().collect();
    let one_way = |x: &[C64], y: &[C64]| {
        par::map(x, |p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min)).into_iter().fold(0.0, f64::max)
    };
    one_way(&pa, &pb).max(one_way(&pb, &pa))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub width: usize,
    pub height: usize,
}

impl Default for Window {
    fn default() -> Self {
        Window { x0: 4.0, x1: 64.0, y0: -PI, y1: PI, width: 600, height: 64 }
    }
}

impl Window {
    /// Parses "x0,x1,y0,y1,width,height".
    pub fn parse(text: &str) -> Result<Self> {
        let v: Vec<&str> = text.split(',').map(str::trim).collect();
        if v.len() != 6 {
            return Err(Error::Spec(format!("window needs x0,x1,y0,y1,width,height, got {text:?}")));
        }
        let f = |s: &str| s.parse::<f64>().map_err(|e| Error::Spec(format!("window value {s:?}: {e}")));
        let u = |s: &str| s.parse::<usize>().map_err(|e| Error::Spec(format!("window size {s:?}: {e}")));
        let w = Window { x0: f(v[0])?, x1: f(v[1])?, y0: f(v[2])?, y1: f(v[3])?, width: u(v[4])?, height: u(v[5])? };
        if !(w.x0 < w.x1 && w.y0 < w.y1 && w.width > 0 && w.height > 0) {
            return Err(Error::Spec(format!("degenerate window {text:?}")));
        }
        Ok(w)
    }
}

fn depth_color(d: usize) -> [u8; 3] {
    const P: [[u8; 3]; 6] = [[40, 40, 40], [200, 60, 40], [230, 160, 30], [60, 150, 70], [40, 110, 200], [120, 60, 170]];
    P[d % P.len()]
}

/// Binary PPM (P6) with the boxes of each cover painted in order.
pub fn render(covers: &[BoxCover], win: &Window) -> Vec<u8> {
    let (w, h) = (win.width, win.height);
    let mut px = vec![255u8; 3 * w * h];
    let sx = (win.x1 - win.x0) / w as f64;
    let sy = (win.y1 - win.y0) / h as f64;
    for cover in covers {
        let col = depth_color(cover.depth);
        for b in &cover.boxes {
            // pixel (i, j) covers [x0 + i sx, x0 + (i+1) sx], rows from the top
            let i0 = ((b.x0 - win.x0) / sx).floor().max(0.0) as usize;
            let i1 = (((b.x1 - win.x0) / sx).ceil().max(0.0) as usize).min(w);
            let j0 = ((win.y1 - b.y1) / sy).floor().max(0.0) as usize;
            let j1 = (((win.y1 - b.y0) / sy).ceil().max(0.0) as usize).min(h);
            for j in j0..j1 {
                for i in i0..i1 {
                    px[3 * (j * w + i)..3 * (j * w + i) + 3].copy_from_slice(&col);
                }
            }
        }
    }
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.extend(px);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn address_parsing() {
        let a = Address::parse("1,-2;0,3", 3).unwrap();
        assert_eq!(a.get(0), 1);
        assert_eq!(a.get(1), -2);
        assert_eq!(a.get(2), 0);
        assert_eq!(a.get(5), 3);
        assert!(Address::parse("4", 3).is_err());
        assert_eq!(Address::parse("", 3).unwrap(), Address::zero());
    }

    #[test]
    fn empty_render_is_blank() {
        let win = Window { width: 4, height: 3, ..Window::default() };
        let img = render(&[], &win);
        let header = b"P6\n4 3\n255\n";
        assert_eq!(&img[..header.len()], header);
        assert!(img[header.len()..].iter().all(|&b| b == 255));
    }

    #[test]
    fn window_parsing() {
        assert!(Window::parse("4,60,-3.2,3.2,100,20").is_ok());
        assert!(Window::parse("4,3,-3.2,3.2,100,20").is_err());
    }
}
