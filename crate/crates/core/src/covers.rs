//! Quadruples, minimal covers U_n(Q, phi) and crookedness.
//!
//! Intervals are stored in u = log t. Once an interval sits so far out that
//! its preimage would overflow, it lies on the last increasing branch of phi,
//! which maps it homeomorphically onto its parent. Such intervals are kept as
//! a lift count over a materialized base interval; their order type (and so
//! their crookedness) is that of the base.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::par;
use crate::projection::{PiecewiseMonotoneMap, U_FINITE};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadruple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quadruple {
    /// A quadruple in the strict sense: increasing, all entries at least 9.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let q = Self::raw(a, b, c, d)?;
        if a < 9.0 {
            return Err(Error::Spec(format!("quadruple entries must be >= 9, got A = {a}")));
        }
        Ok(q)
    }

    /// Only the ordering is checked; used for small test configurations.
    pub fn raw(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if !(a < b && b < c && c < d) || !a.is_finite() || !d.is_finite() {
            return Err(Error::Spec(format!("quadruple must satisfy A<B<C<D, got ({a},{b},{c},{d})")));
        }
        Ok(Quadruple { a, b, c, d })
    }

    pub fn size(&self) -> f64 {
        (self.a - 5.0).min(self.b - self.a).min(self.c - self.b).min(self.d - self.c)
    }

    /// Whether `other` is larger than `self`: other.a < a < b < other.b < other.c < c < d < other.d.
    pub fn is_below(&self, other: &Quadruple) -> bool {
        other.a < self.a && self.b < other.b && other.c < self.c && self.d < other.d
    }

    /// Moves A and C right and B and D left by `delta`.
    pub fn shrink(&self, delta: f64) -> Result<Self> {
        Self::raw(self.a + delta, self.b - delta, self.c + delta, self.d - delta)
    }
}

impl fmt::Display for Quadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.a, self.b, self.c, self.d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mark {
    B,
    C,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrookednessWitness {
    /// t1 < t_mid < t2 in log scale, in the coordinates of the base interval.
    pub pattern: [f64; 3],
    /// Either B C B or C B C.
    pub labels: [Mark; 3],
    /// Smallest gap between consecutive witness points over their summed error bars.
    pub margin: f64,
    /// Largest |phi^k(t_i) - target| over the witness points, when computable.
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverInterval {
    /// Ends in log scale. For lifted intervals these are the base ends.
    pub lo: f64,
    pub hi: f64,
    pub err_lo: f64,
    pub err_hi: f64,
    /// Number of applications of the last branch inverse above the base.
    pub lift: usize,
    /// Whether phi^n(lo) = A (otherwise lo goes to D).
    pub lo_to_a: bool,
    pub witness: Option<CrookednessWitness>,
    #[serde(skip)]
    marks: Vec<(f64, f64, Mark)>,
}

impl CoverInterval {
    pub fn crooked(&self) -> bool {
        self.witness.is_some()
    }

    /// Left end in log scale, or infinity for lifted intervals.
    pub fn log_left(&self) -> f64 {
        if self.lift > 0 {
            f64::INFINITY
        } else {
            self.lo
        }
    }

    /// Left end as a real, if representable.
    pub fn left(&self) -> Option<f64> {
        let v = self.log_left().exp();
        v.is_finite().then_some(v)
    }

    pub fn right(&self) -> Option<f64> {
        if self.lift > 0 {
            return None;
        }
        let v = self.hi.exp();
        v.is_finite().then_some(v)
    }

    /// Points of the interval mapping to B or C, sorted, with error bars.
    pub fn marks(&self) -> &[(f64, f64, Mark)] {
        &self.marks
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntervalFamily {
    pub q: Quadruple,
    pub n: usize,
    pub intervals: Vec<CoverInterval>,
}

impl IntervalFamily {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn crooked_count(&self) -> usize {
        self.intervals.iter().filter(|i| i.crooked()).count()
    }

    pub fn all_crooked(&self) -> bool {
        !self.is_empty() && self.crooked_count() == self.len()
    }

    pub fn min_margin(&self) -> f64 {
        self.intervals.iter().filter_map(|i| i.witness.as_ref().map(|w| w.margin)).fold(f64::INFINITY, f64::min)
    }

    /// JSON dump: Q, n and the intervals with log-scale ends.
    pub fn to_json(&self) -> serde_json::Value {
        let iv: Vec<_> = self
            .intervals
            .iter()
            .map(|i| {
                serde_json::json!({
                    "log_a": i.lo, "log_d": i.hi, "err": i.err_lo.max(i.err_hi),
                    "lift": i.lift, "crooked": i.crooked(), "witness": i.witness,
                })
            })
            .collect();
        serde_json::json!({ "Q": self.q, "n": self.n, "intervals": iv })
    }
}

/// U_0(Q) = {[A, D]}.
pub fn base_family(q: &Quadruple) -> IntervalFamily {
    let mut iv = CoverInterval {
        lo: q.a.ln(),
        hi: q.d.ln(),
        err_lo: 0.0,
        err_hi: 0.0,
        lift: 0,
        lo_to_a: true,
        witness: None,
        marks: vec![(q.b.ln(), 0.0, Mark::B), (q.c.ln(), 0.0, Mark::C)],
    };
    iv.witness = witness_of(&iv.marks, None);
    IntervalFamily { q: *q, n: 0, intervals: vec![iv] }
}

/// U_{n+1} from U_n.
pub fn cover_step(map: &PiecewiseMonotoneMap, fam: &IntervalFamily) -> Result<IntervalFamily> {
    let parts = par::map(&fam.intervals, |p| children(map, p));
    let mut intervals = Vec::new();
    for p in parts {
        intervals.extend(p?);
    }
    intervals.sort_by(|x, y| (x.lift, x.lo).partial_cmp(&(y.lift, y.lo)).expect("finite ends"));
    let n = fam.n + 1;
    for iv in &mut intervals {
        if iv.lift == 0 && iv.witness.is_none() {
            iv.witness = witness_of(&iv.marks, None);
        }
        if let (Some(w), 0) = (iv.witness.as_mut(), iv.lift) {
            w.residual = witness_residual(map, w, n, &fam.q).ok();
        }
    }
    Ok(IntervalFamily { q: fam.q, n, intervals })
}

pub fn minimal_covers(map: &PiecewiseMonotoneMap, q: &Quadruple, n: usize) -> Result<IntervalFamily> {
    let mut fam = base_family(q);
    for _ in 0..n {
        fam = cover_step(map, &fam)?;
    }
    Ok(fam)
}

/// Every U_k for k = 0..=n.
pub fn cover_sequence(map: &PiecewiseMonotoneMap, q: &Quadruple, n: usize) -> Result<Vec<IntervalFamily>> {
    let mut out = vec![base_family(q)];
    for _ in 0..n {
        let next = cover_step(map, out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

/// U_1(P).
fn children(map: &PiecewiseMonotoneMap, p: &CoverInterval) -> Result<Vec<CoverInterval>> {
    let lift_ok = p.lift > 0 || (p.hi >= U_FINITE && p.lo.exp() > map.v_star);
    if lift_ok {
        let mut c = p.clone();
        c.lift += 1;
        return Ok(vec![c]);
    }
    if p.hi >= U_FINITE {
        return Err(Error::Resolution {
            what: "minimal interval straddles the representable range".into(),
            achieved: p.hi,
        });
    }
    let (vl, vh) = (p.lo.exp(), p.hi.exp());
    let (el, eh) = (vl * p.err_lo, vh * p.err_hi);
    let mut ends: Vec<(f64, f64, bool)> = Vec::new();
    for r in map.preimages_err(vl, el, map.u_min, map.u_max)? {
        ends.push((r.u, r.err, false));
    }
    for r in map.preimages_err(vh, eh, map.u_min, map.u_max)? {
        ends.push((r.u, r.err, true));
    }
    ends.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = Vec::new();
    for w in ends.windows(2) {
        let ((ul, el, hl), (uh, eh, hh)) = (w[0], w[1]);
        if hl == hh {
            continue;
        }
        let lo_to_a = if hl { !p.lo_to_a } else { p.lo_to_a };
        let mut marks = Vec::new();
        for &(mu, me, m) in &p.marks {
            let v = mu.exp();
            for r in map.preimages_err(v, v * me, ul, uh)? {
                marks.push((r.u, r.err, m));
            }
        }
        marks.sort_by(|x, y| x.0.total_cmp(&y.0));
        out.push(CoverInterval { lo: ul, hi: uh, err_lo: el, err_hi: eh, lift: 0, lo_to_a, witness: None, marks });
    }
    Ok(out)
}

/// First alternating run B C B or C B C among sorted marks.
fn witness_of(marks: &[(f64, f64, Mark)], residual: Option<f64>) -> Option<CrookednessWitness> {
    // collapse to runs, keeping the last point of the first run and the
    // first point of the following ones so the witness is as tight as possible
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, m) in marks.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if marks[r.0].2 == m.2 => r.1 = i,
            _ => runs.push((i, i)),
        }
    }
    if runs.len() < 3 {
        return None;
    }
    let i0 = runs[0].1;
    let i1 = runs[1].0;
    let i2 = runs[2].0;
    let pts = [marks[i0], marks[i1], marks[i2]];
    let sep = |x: (f64, f64, Mark), y: (f64, f64, Mark)| (y.0 - x.0) / (x.1 + y.1).max(f64::MIN_POSITIVE);
    Some(CrookednessWitness {
        pattern: [pts[0].0, pts[1].0, pts[2].0],
        labels: [pts[0].2, pts[1].2, pts[2].2],
        margin: sep(pts[0], pts[1]).min(sep(pts[1], pts[2])),
        residual,
    })
}

fn witness_residual(map: &PiecewiseMonotoneMap, w: &CrookednessWitness, n: usize, q: &Quadruple) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (u, m) in w.pattern.iter().zip(w.labels) {
        let target = if m == Mark::B { q.b } else { q.c };
        let v = map.phi_iter_u(*u, n)?;
        worst = worst.max((v - target).abs());
    }
    Ok(worst)
}

/// Crookedness of phi^n on J = [lo, hi] (log scale) over Q, decided from
/// the full preimage sets of B and C pulled back through the image hulls.
pub fn is_crooked(map: &PiecewiseMonotoneMap, lo: f64, hi: f64, n: usize, q: &Quadruple) -> Result<Option<CrookednessWitness>> {
    // hulls of phi^k(J) in log scale
    let mut hulls = vec![(lo, hi)];
    for _ in 0..n {
        let (a, b) = *hulls.last().expect("nonempty");
        let (va, vb) = map.image_hull(a, b);
        hulls.push((va.ln(), vb.ln()));
    }
    let mut marks: Vec<(f64, f64, Mark)> = Vec::new();
    for (target, m) in [(q.b, Mark::B), (q.c, Mark::C)] {
        let (a, b) = hulls[n];
        let tu = target.ln();
        if tu < a || tu > b {
            continue;
        }
        let mut level: Vec<(f64, f64)> = vec![(tu, 0.0)];
        for k in (0..n).rev() {
            let (a, b) = hulls[k];
            let mut next = Vec::new();
            for &(u, e) in &level {
                let v = u.exp();
                next.extend(map.preimages_err(v, v * e, a, b)?.into_iter().map(|r| (r.u, r.err)));
            }
            level = next;
        }
        marks.extend(level.into_iter().map(|(u, e)| (u, e, m)));
    }
    marks.sort_by(|x, y| x.0.total_cmp(&y.0));
    let w = witness_of(&marks, None).map(|mut w| {
        w.residual = witness_residual(map, &w, n, q).ok();
        w
    });
    Ok(w)
}

/// Grid oracle: sign changes of phi^n - B and phi^n - C on a uniform grid
/// over [lo, hi], compared by hull overlap.
pub fn crooked_by_grid(map: &PiecewiseMonotoneMap, lo: f64, hi: f64, n: usize, q: &Quadruple, samples: usize) -> Result<bool> {
    let grid: Vec<f64> = (0..=samples).map(|k| lo + (hi - lo) * k as f64 / samples as f64).collect();
    let vals = par::map(&grid, |&u| map.phi_iter_u(u, n));
    let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    let crossings = |c: f64| -> Vec<f64> {
        let mut out = Vec::new();
        for k in 0..samples {
            let (x, y) = (vals[k] - c, vals[k + 1] - c);
            if x == 0.0 || x.signum() != y.signum() {
                out.push(grid[k]);
            }
        }
        out
    };
    let bs = crossings(q.b);
    let cs = crossings(q.c);
    if bs.is_empty() || cs.is_empty() {
        return Ok(false);
    }
    let (b0, b1) = (bs[0], *bs.last().expect("nonempty"));
    let (c0, c1) = (cs[0], *cs.last().expect("nonempty"));
    Ok(b0 <= c1 && c0 <= b1)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HypothesisOutcome {
    pub n_star: Option<usize>,
    /// (n, crooked, total) for every n examined.
    pub counts: Vec<(usize, usize, usize)>,
    pub family: Option<IntervalFamily>,
    pub persists: Option<bool>,
    pub min_margin: f64,
}

impl HypothesisOutcome {
    pub fn success(&self) -> bool {
        self.n_star.is_some()
    }
}

/// Least n in [n_lo, n_hi] with U_n(Q) nonempty and entirely crooked, and
/// whether U_{n+1}(Q) is too.
pub fn hypothesis_check(map: &PiecewiseMonotoneMap, q: &Quadruple, n_lo: usize, n_hi: usize) -> Result<HypothesisOutcome> {
    let mut fam = base_family(q);
    let mut counts = Vec::new();
    for n in 0..=n_hi {
        if n > 0 {
            fam = cover_step(map, &fam)?;
        }
        if n < n_lo {
            continue;
        }
        counts.push((n, fam.crooked_count(), fam.len()));
        if fam.all_crooked() {
            let next = cover_step(map, &fam)?;
            counts.push((n + 1, next.crooked_count(), next.len()));
            let min_margin = fam.min_margin();
            return Ok(HypothesisOutcome {
                n_star: Some(n),
                counts,
                persists: Some(next.all_crooked()),
                family: Some(fam),
                min_margin,
            });
        }
    }
    Ok(HypothesisOutcome { n_star: None, counts, family: None, persists: None, min_margin: 0.0 })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Stabilization {
    pub n0: usize,
    /// Interval counts at n0, n0+1 and n0+2.
    pub counts: [usize; 3],
}

/// Least n0 such that every interval of U_{n0}(Q) lies right of
/// [r - nu, R + nu] for the last wiggle.
pub fn stabilize_n0(map: &PiecewiseMonotoneMap, q: &Quadruple, nu: f64, n_cap: usize) -> Result<Stabilization> {
    let spec = &map.kernel().spec;
    let bound = if spec.n() == 0 { f64::NEG_INFINITY } else { (spec.last_right() + nu).ln() };
    let mut fams = vec![base_family(q)];
    let mut n0 = None;
    for n in 0..=n_cap + 2 {
        if n > 0 {
            let next = cover_step(map, fams.last().expect("nonempty"))?;
            fams.push(next);
        }
        if n0.is_none() && fams[n].intervals.iter().all(|i| i.log_left() > bound) {
            n0 = Some(n);
        }
        if let Some(k) = n0 {
            if n == k + 2 {
                return Ok(Stabilization { n0: k, counts: [fams[k].len(), fams[k + 1].len(), fams[k + 2].len()] });
            }
        } else if n >= n_cap {
            break;
        }
    }
    Err(Error::Domain(format!("no stabilization for {q} up to n = {n_cap}; extend the domain cap")))
}

/// Endpoint invariant: phi^n sends each materialized end to A or D.
pub fn endpoint_residual(map: &PiecewiseMonotoneMap, fam: &IntervalFamily) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for iv in &fam.intervals {
        if iv.lift > 0 {
            continue;
        }
        let (ta, td) = if iv.lo_to_a { (fam.q.a, fam.q.d) } else { (fam.q.d, fam.q.a) };
        worst = worst.max((map.phi_iter_u(iv.lo, fam.n)? - ta).abs());
        worst = worst.max((map.phi_iter_u(iv.hi, fam.n)? - td).abs());
    }
    Ok(worst)
}

/// Disjoint interiors, up to the endpoint error bars.
pub fn interiors_disjoint(fam: &IntervalFamily) -> bool {
    let m: Vec<&CoverInterval> = fam.intervals.iter().filter(|i| i.lift == 0).collect();
    m.windows(2).all(|w| w[0].hi <= w[1].lo + w[0].err_hi + w[1].err_lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_formula() {
        let q = Quadruple::new(9.0, 10.0, 11.0, 12.0).unwrap();
        assert_eq!(q.size(), 1.0);
        let q = Quadruple::new(9.0, 11.0, 13.0, 15.0).unwrap();
        assert_eq!(q.size(), 2.0);
        assert!(Quadruple::new(8.0, 11.0, 13.0, 15.0).is_err());
        assert!(Quadruple::raw(9.0, 9.0, 13.0, 15.0).is_err());
    }

    #[test]
    fn order_on_quadruples() {
        let q = Quadruple::new(20.0, 30.0, 40.0, 50.0).unwrap();
        let s = q.shrink(1.0).unwrap();
        assert!(s.is_below(&q));
        assert!(!q.is_below(&s));
    }

    #[test]
    fn witness_patterns() {
        let m = |u: f64, k: Mark| (u, 1e-9, k);
        assert!(witness_of(&[m(1.0, Mark::B), m(2.0, Mark::C)], None).is_none());
        let w = witness_of(&[m(1.0, Mark::B), m(1.5, Mark::B), m(2.0, Mark::C), m(3.0, Mark::B)], None).unwrap();
        assert_eq!(w.labels, [Mark::B, Mark::C, Mark::B]);
        assert_eq!(w.pattern, [1.5, 2.0, 3.0]);
        assert!((w.margin - 0.25e9).abs() < 1.0);
    }
}
