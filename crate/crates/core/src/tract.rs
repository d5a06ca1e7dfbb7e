//! Wiggle tracts: a half-strip {x > 4, |y| < π} with four slits removed per
//! wiggle, forcing the real part to go right, back left and right again.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Abscissa used in place of R[-1].
pub const R_PREV_DEFAULT: f64 = 5.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct WiggleSpec {
    pub r: Vec<f64>,
    #[serde(rename = "R")]
    pub big_r: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub inequality: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.inequality)
    }
}

impl WiggleSpec {
    pub fn new(r: Vec<f64>, big_r: Vec<f64>) -> Self {
        WiggleSpec { r, big_r }
    }

    pub fn straight() -> Self {
        WiggleSpec::default()
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }

    /// R[j-1], with R[-1] = 5.
    pub fn right_before(&self, j: usize) -> f64 {
        if j == 0 {
            R_PREV_DEFAULT
        } else {
            self.big_r[j - 1]
        }
    }

    /// R[N-1], or 5 for the straight strip.
    pub fn last_right(&self) -> f64 {
        self.right_before(self.n())
    }

    pub fn validate(&self) -> std::result::Result<(), Violation> {
        if self.r.len() != self.big_r.len() {
            return Err(Violation {
                index: self.r.len().min(self.big_r.len()),
                inequality: "len(r) == len(R)".into(),
            });
        }
        for j in 0..self.n() {
            let (r, big_r) = (self.r[j], self.big_r[j]);
            if !r.is_finite() || !big_r.is_finite() {
                return Err(Violation { index: j, inequality: format!("r[{j}], R[{j}] finite") });
            }
            if j == 0 {
                if r <= 6.0 {
                    return Err(Violation { index: 0, inequality: "r[0] > 6".into() });
                }
            } else if r <= self.big_r[j - 1] + 1.0 {
                return Err(Violation { index: j, inequality: format!("r[{j}] > R[{}]+1", j - 1) });
            }
            if big_r <= r + 2.0 {
                return Err(Violation { index: j, inequality: format!("R[{j}] > r[{j}]+2") });
            }
        }
        Ok(())
    }

    pub fn checked(self) -> Result<Self> {
        self.validate().map_err(|v| Error::Spec(v.to_string()))?;
        Ok(self)
    }

    /// Spec with one more wiggle appended; earlier entries are untouched.
    pub fn with_wiggle(&self, r: f64, big_r: f64) -> Result<Self> {
        let mut s = self.clone();
        s.r.push(r);
        s.big_r.push(big_r);
        s.checked()
    }

    /// Stable content hash (hex sha256 over the IEEE bit patterns).
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n() as u64).to_le_bytes());
        for (a, b) in self.r.iter().zip(&self.big_r) {
            h.update(a.to_bits().to_le_bytes());
            h.update(b.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn slits(&self) -> Vec<[Segment; 4]> {
        let h = PI / 3.0;
        self.r
            .iter()
            .zip(&self.big_r)
            .map(|(&r, &big_r)| {
                [
                    Segment::new(C64::new(r, -PI), C64::new(r, h)),
                    Segment::new(C64::new(r, h), C64::new(big_r - 1.0, h)),
                    Segment::new(C64::new(big_r, -h), C64::new(big_r, PI)),
                    Segment::new(C64::new(r + 1.0, -h), C64::new(big_r, -h)),
                ]
            })
            .collect()
    }

    /// Index of the wiggle region containing z, if any.
    pub fn wiggle_region_of(&self, z: C64) -> Option<usize> {
        self.regions().into_iter().find(|w| w.contains(z)).map(|w| w.j)
    }

    pub fn regions(&self) -> Vec<WiggleRegion> {
        (0..self.n())
            .map(|j| WiggleRegion { j, r: self.r[j], big_r: self.big_r[j] })
            .collect()
    }

    /// Membership in T; a point on a slit is reported as an error.
    pub fn contains(&self, z: C64) -> Result<bool> {
        if !(z.re > 4.0 && z.im.abs() < PI) {
            return Ok(false);
        }
        let tol = 1e-12 * (1.0 + z.re.abs());
        for w in self.slits() {
            for s in w {
                if s.distance(z) <= tol {
                    return Err(Error::BoundaryPoint(format!("{z} lies on a slit")));
                }
            }
        }
        Ok(true)
    }

    /// Euclidean distance from z to the boundary of T.
    pub fn dist_to_boundary(&self, z: C64) -> f64 {
        let mut d = (PI - z.im.abs()).max(0.0);
        d = d.min(Segment::new(C64::new(4.0, -PI), C64::new(4.0, PI)).distance(z));
        for w in self.slits() {
            for s in w {
                d = d.min(s.distance(z));
            }
        }
        d
    }

    /// Lengths and chains hit by the vertical rays up and down from z.
    pub fn vertical_reach(&self, z: C64) -> [(f64, Chain); 2] {
        let h = PI / 3.0;
        let mut up = (PI - z.im, Chain::Upper);
        let mut down = (z.im + PI, Chain::Lower);
        for (&r, &big_r) in self.r.iter().zip(&self.big_r) {
            if z.re > r && z.re <= big_r - 1.0 {
                if z.im < h && h - z.im < up.0 {
                    up = (h - z.im, Chain::Lower);
                }
                if z.im > h && z.im - h < down.0 {
                    down = (z.im - h, Chain::Lower);
                }
            }
            if z.re >= r + 1.0 && z.re < big_r {
                if z.im < -h && -h - z.im < up.0 {
                    up = (-h - z.im, Chain::Upper);
                }
                if z.im > -h && z.im + h < down.0 {
                    down = (z.im + h, Chain::Upper);
                }
            }
        }
        [up, down]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chain {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: C64,
    pub b: C64,
}

impl Segment {
    pub fn new(a: C64, b: C64) -> Self {
        Segment { a, b }
    }

    pub fn distance(&self, z: C64) -> f64 {
        let d = self.b - self.a;
        let l2 = d.norm_sqr();
        if l2 == 0.0 {
            return (z - self.a).norm();
        }
        let t = (((z - self.a) * d.conj()).re / l2).clamp(0.0, 1.0);
        (z - (self.a + d * t)).norm()
    }

    /// Closed-segment intersection test.
    pub fn intersects(&self, o: &Segment) -> bool {
        fn orient(p: C64, q: C64, r: C64) -> f64 {
            ((q - p).conj() * (r - p)).im
        }
        fn on(p: C64, q: C64, r: C64) -> bool {
            r.re >= p.re.min(q.re) && r.re <= p.re.max(q.re) && r.im >= p.im.min(q.im) && r.im <= p.im.max(q.im)
        }
        let (p1, p2, q1, q2) = (self.a, self.b, o.a, o.b);
        let d1 = orient(q1, q2, p1);
        let d2 = orient(q1, q2, p2);
        let d3 = orient(p1, p2, q1);
        let d4 = orient(p1, p2, q2);
        if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
            return true;
        }
        (d1 == 0.0 && on(q1, q2, p1))
            || (d2 == 0.0 && on(q1, q2, p2))
            || (d3 == 0.0 && on(p1, p2, q1))
            || (d4 == 0.0 && on(p1, p2, q2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WiggleRegion {
    pub j: usize,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
}

impl WiggleRegion {
    pub fn contains(&self, z: C64) -> bool {
        z.re > self.r && z.re < self.big_r && z.im < PI / 3.0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TractBoundary {
    pub upper: Vec<C64>,
    pub lower: Vec<C64>,
    pub slits: Vec<[Segment; 4]>,
    pub tips: Vec<C64>,
    pub x_max: f64,
}

pub fn build_boundary(spec: &WiggleSpec, x_max: f64) -> Result<TractBoundary> {
    spec.validate().map_err(|v| Error::Spec(v.to_string()))?;
    let need = if spec.n() == 0 { 7.0 } else { spec.last_right() + 2.0 };
    if !(x_max > need) {
        return Err(Error::Domain(format!("truncation inside last wiggle (x_max {x_max} <= {need})")));
    }
    let h = PI / 3.0;
    let o = C64::new(4.0, 0.0);
    let mut lower = vec![o, C64::new(4.0, -PI)];
    let mut upper = vec![o, C64::new(4.0, PI)];
    let mut tips = Vec::new();
    for (&r, &big_r) in spec.r.iter().zip(&spec.big_r) {
        lower.extend([
            C64::new(r, -PI),
            C64::new(r, h),
            C64::new(big_r - 1.0, h),
            C64::new(r, h),
            C64::new(r, -PI),
        ]);
        upper.extend([
            C64::new(big_r, PI),
            C64::new(big_r, -h),
            C64::new(r + 1.0, -h),
            C64::new(big_r, -h),
            C64::new(big_r, PI),
        ]);
        tips.extend([C64::new(r, h), C64::new(big_r - 1.0, h), C64::new(big_r, -h), C64::new(r + 1.0, -h)]);
    }
    lower.push(C64::new(x_max, -PI));
    upper.push(C64::new(x_max, PI));
    Ok(TractBoundary { upper, lower, slits: spec.slits(), tips, x_max })
}

impl TractBoundary {
    /// Closed, positively oriented ring: top edge leftwards, then the bottom
    /// chain rightwards, closed by the truncation edge.
    pub fn ring(&self) -> Vec<C64> {
        let mut ring: Vec<C64> = self.upper.iter().rev().copied().collect();
        ring.extend(self.lower.iter().skip(1));
        ring
    }

    /// Winding-number membership in the truncated polygon. Slits are walked
    /// out and back, so they cancel for points off the slit.
    pub fn polygon_contains(&self, z: C64) -> bool {
        let ring = self.ring();
        let mut wn = 0i32;
        let n = ring.len();
        for i in 0..n {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            let cross = ((b - a).conj() * (z - a)).im;
            if a.im <= z.im {
                if b.im > z.im && cross > 0.0 {
                    wn += 1;
                }
            } else if b.im <= z.im && cross < 0.0 {
                wn -= 1;
            }
        }
        wn != 0
    }

    /// Signed area of the ring (positive for counterclockwise).
    pub fn signed_area(&self) -> f64 {
        let ring = self.ring();
        let n = ring.len();
        (0..n).map(|i| (ring[i].conj() * ring[(i + 1) % n]).im).sum::<f64>() / 2.0
    }

    /// Plain CSV: one "x,y" per line, chains separated by a blank line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, chain) in [&self.upper, &self.lower].into_iter().enumerate() {
            if k > 0 {
                s.push('\n');
            }
            for p in chain {
                s.push_str(&format!("{},{}\n", p.re, p.im));
            }
        }
        s
    }
}

/// The arc from 5 to the truncation abscissa running through the middle of
/// every channel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpineCurve {
    pub vertices: Vec<C64>,
}

pub fn spine(spec: &WiggleSpec, x_max: f64) -> SpineCurve {
    let c = 2.0 * PI / 3.0;
    let mut v = vec![C64::new(5.0, 0.0)];
    for (&r, &big_r) in spec.r.iter().zip(&spec.big_r) {
        v.extend([
            C64::new(r - 0.5, 0.0),
            C64::new(r - 0.5, c),
            C64::new(big_r - 0.5, c),
            C64::new(big_r - 0.5, 0.0),
            C64::new(r + 0.5, 0.0),
            C64::new(r + 0.5, -c),
            C64::new(big_r + 0.5, -c),
            C64::new(big_r + 0.5, 0.0),
        ]);
    }
    v.push(C64::new(x_max.max(5.0), 0.0));
    SpineCurve { vertices: v }
}

impl SpineCurve {
    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Length of the prefix up to the first point with real part x.
    pub fn length_to(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for w in self.vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.re >= x {
                return acc;
            }
            if b.re >= x {
                return acc + (x - a.re) / (b.re - a.re) * (b - a).norm();
            }
            acc += (b - a).norm();
        }
        acc
    }

    /// Evenly spaced points along the curve, at most `step` apart.
    pub fn sample(&self, step: f64) -> Vec<C64> {
        let mut out = vec![self.vertices[0]];
        for w in self.vertices.windows(2) {
            let n = ((w[1] - w[0]).norm() / step).ceil().max(1.0) as usize;
            for k in 1..=n {
                out.push(w[0] + (w[1] - w[0]) * (k as f64 / n as f64));
            }
        }
        out
    }
}

pub fn spine_length_to(spine: &SpineCurve, x: f64) -> f64 {
    spine.length_to(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_is_counterclockwise() {
        let b = build_boundary(&WiggleSpec::new(vec![20.0], vec![30.0]), 50.0).unwrap();
        // slits have zero area, so the ring encloses the plain rectangle
        assert!((b.signed_area() - 46.0 * 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn segment_intersections() {
        let s = Segment::new(C64::new(0.0, 0.0), C64::new(1.0, 1.0));
        assert!(s.intersects(&Segment::new(C64::new(0.0, 1.0), C64::new(1.0, 0.0))));
        assert!(!s.intersects(&Segment::new(C64::new(2.0, 0.0), C64::new(3.0, 0.0))));
    }
}
