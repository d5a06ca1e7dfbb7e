mod common;

use common::{phi0, phi0_inv};
use wiggle_core::covers::{
    crooked_by_grid, endpoint_residual, hypothesis_check, interiors_disjoint, is_crooked, stabilize_n0, Quadruple,
};
use wiggle_core::projection::Direction;
use wiggle_core::{minimal_covers, Error, IntervalFamily, PiecewiseMonotoneMap};

fn q(a: f64, b: f64, c: f64, d: f64) -> Quadruple {
    Quadruple::new(a, b, c, d).unwrap()
}

fn ends(f: &IntervalFamily) -> Vec<(usize, f64, f64)> {
    f.intervals.iter().map(|i| (i.lift, i.lo, i.hi)).collect()
}

#[test]
fn straight_projection_values() {
    let m = common::straight();
    assert_eq!(m.pieces.len(), 1);
    assert_eq!(m.pieces[0].dir, Direction::Up);
    assert!((m.phi(5.0) - 5.0).abs() < 1e-12);
    let v = m.phi(15.0);
    assert!((v - 6.458725867056113).abs() < 1e-9, "{v}");
    assert!(v < 7.5f64.min(5.0 + 2.0 * 3f64.ln()));
    let v2 = m.phi_iter(15.0, 2).unwrap();
    assert!((v2 - phi0(phi0(15.0))).abs() < 1e-9);
    assert!(v2 < v);
}

#[test]
fn iteration_edge_cases() {
    let m = common::straight();
    assert_eq!(m.phi_iter(15.0, 0).unwrap(), 15.0);
    assert!(matches!(m.phi_iter(3.0, 1), Err(Error::Domain(_))));
    // |phi^n(t + h) - phi^n(t)| <= h / 2^n
    let m = common::one_wiggle();
    for n in 1..4 {
        for &t in &[8.0, 25.0, 400.0, 1e5] {
            let h = 0.37;
            let d = (m.phi_iter(t + h, n).unwrap() - m.phi_iter(t, n).unwrap()).abs();
            assert!(d <= h / 2f64.powi(n as i32) + 4.0 * m.eps_phi, "n {n}, t {t}: {d}");
        }
    }
}

#[test]
fn piece_structure() {
    for (m, n) in [(common::straight(), 0), (common::one_wiggle(), 1), (common::two_wiggles(), 2), (common::staged(), 1)] {
        assert!(m.pieces.len() <= 2 * n + 1, "{} pieces for N = {n}", m.pieces.len());
        assert_eq!(m.pieces.last().unwrap().dir, Direction::Up);
        for w in m.pieces.windows(2) {
            assert_ne!(w[0].dir, w[1].dir);
            assert_eq!(w[0].hi, w[1].lo);
        }
        for p in &m.pieces {
            if !p.hi.is_finite() {
                continue;
            }
            let s = if p.dir == Direction::Up { 1.0 } else { -1.0 };
            for k in 1..20 {
                let u = p.lo + (p.hi - p.lo) * k as f64 / 20.0;
                assert!(s * m.dphi_du(u) > 0.0);
            }
        }
    }
    let m = common::one_wiggle();
    assert_eq!(m.pieces.len(), 3);
    // the fold climbs to the top channel and falls back into the wiggle
    let down = m.pieces[1];
    assert!(down.v_lo > 28.0 && down.v_lo < 30.0, "{}", down.v_lo);
    assert!(down.v_hi > 20.0 && down.v_hi < down.v_lo, "{}", down.v_hi);
    assert_eq!(m.v_star, down.v_lo);
}

fn grid_roots(m: &PiecewiseMonotoneMap, c: f64, lo: f64, hi: f64) -> Vec<f64> {
    let n = 200_000;
    let mut out = Vec::new();
    let mut prev = m.phi_u(lo) - c;
    for k in 1..=n {
        let u = lo + (hi - lo) * k as f64 / n as f64;
        let v = m.phi_u(u) - c;
        if prev.signum() != v.signum() {
            out.push(u);
        }
        prev = v;
    }
    out
}

#[test]
fn preimages_examples() {
    let m = common::straight();
    let r = m.preimages(6.458725867056113, 4f64.ln(), 100f64.ln()).unwrap();
    assert_eq!(r.len(), 1);
    assert!((r[0].u.exp() - 15.0).abs() < 1e-8);
    assert!(m.preimages(4.5, 10f64.ln(), 100f64.ln()).unwrap().is_empty());

    let m = common::one_wiggle();
    let p = m.pieces[1];
    let c = 0.5 * (p.v_lo + p.v_hi);
    let (lo, hi) = (m.u_min, 2.0 * m.pieces[2].lo);
    let r = m.preimages(c, lo, hi).unwrap();
    assert_eq!(r.len(), 3);
    assert!(r.windows(2).all(|w| w[0].u < w[1].u));
    let g = grid_roots(&m, c, lo, hi);
    assert_eq!(g.len(), 3);
    let h = (hi - lo) / 200_000.0;
    for (a, b) in r.iter().zip(&g) {
        assert!((a.u - b).abs() <= h, "{} vs {b}", a.u);
        assert!((m.phi_u(a.u) - c).abs() <= 10.0 * m.eps_phi);
    }
}

#[test]
fn tangency_is_reported() {
    let m = common::one_wiggle();
    let top = m.pieces[1].v_lo;
    assert!(matches!(m.preimages_all(top + 1e-13), Err(Error::Tangency(_))));
    assert!(m.preimages_all(top - 1e-3).is_ok());
}

#[test]
fn first_cover_of_the_straight_strip() {
    let m = common::straight();
    let f = minimal_covers(&m, &Quadruple::raw(6.0, 7.0, 8.0, 9.0).unwrap(), 1).unwrap();
    assert_eq!(f.len(), 1);
    let iv = &f.intervals[0];
    let (a, d) = (iv.left().unwrap(), iv.right().unwrap());
    assert!((a - phi0_inv(6.0)).abs() < 1e-8 && (a - 11.276).abs() < 1e-3);
    assert!((d - phi0_inv(9.0)).abs() < 1e-8 && (d - 58.053).abs() < 1e-3);
    assert!(!iv.crooked());

    let f0 = minimal_covers(&m, &q(10.0, 20.0, 30.0, 40.0), 0).unwrap();
    assert_eq!(f0.len(), 1);
    let iv = &f0.intervals[0];
    assert!((iv.left().unwrap() - 10.0).abs() < 1e-12 && (iv.right().unwrap() - 40.0).abs() < 1e-12);
}

#[test]
fn family_invariants() {
    let cases = [
        (common::one_wiggle(), Quadruple::raw(21.0, 23.0, 25.0, 27.0).unwrap()),
        (common::two_wiggles(), Quadruple::raw(11.0, 11.5, 12.0, 12.5).unwrap()),
        (common::staged(), q(39.0, 73.0, 107.0, 141.0)),
    ];
    for (m, quad) in cases {
        let mut fams = Vec::new();
        for n in 0..=3 {
            let f = minimal_covers(&m, &quad, n).unwrap();
            assert!(!f.is_empty());
            assert!(interiors_disjoint(&f));
            for iv in &f.intervals {
                assert!(iv.lift > 0 || iv.lo.exp() >= 6.0 - 1e-9);
            }
            if n <= 2 {
                assert!(endpoint_residual(&m, &f).unwrap() <= 10.0 * m.err_at(quad.d), "n = {n}");
            }
            fams.push(f);
        }
        // no interval of U_n contains one of U_m for m != n
        for (i, a) in fams.iter().enumerate() {
            for b in fams.iter().skip(i + 1) {
                for x in a.intervals.iter().filter(|x| x.lift == 0) {
                    for y in b.intervals.iter().filter(|y| y.lift == 0) {
                        assert!(!(x.lo <= y.lo && y.hi <= x.hi) && !(y.lo <= x.lo && x.hi <= y.hi));
                    }
                }
            }
        }
    }
}

#[test]
fn composition_property() {
    // J in U_2(Q) maps onto a member of U_1(Q), and J is in U_1(phi(J))
    let m = common::one_wiggle();
    let quad = Quadruple::raw(21.0, 23.0, 25.0, 27.0).unwrap();
    let u1 = minimal_covers(&m, &quad, 1).unwrap();
    let u2 = minimal_covers(&m, &quad, 2).unwrap();
    assert!(u1.len() > 1);
    for j in u2.intervals.iter().filter(|j| j.lift == 0) {
        let (a, d) = (m.phi_u(j.lo), m.phi_u(j.hi));
        let (lo, hi) = (a.min(d).ln(), a.max(d).ln());
        let hit = u1.intervals.iter().find(|k| (k.lo - lo).abs() < 1e-8 && (k.hi - hi).abs() < 1e-8);
        assert!(hit.is_some(), "phi(J) = [{lo}, {hi}] not in U_1");
        let (x, y) = (lo.exp(), hi.exp());
        let sub = minimal_covers(&m, &Quadruple::raw(x, x + (y - x) / 3.0, x + 2.0 * (y - x) / 3.0, y).unwrap(), 1).unwrap();
        assert!(sub.intervals.iter().any(|k| (k.lo - j.lo).abs() < 1e-8 && (k.hi - j.hi).abs() < 1e-8));
    }
}

#[test]
fn decomposition_with_other_splits() {
    // U_3(I) = union over J in U_1(I) of U_2(J), for Q small enough to stay representable
    for m in [common::straight(), common::one_wiggle()] {
        let quad = Quadruple::raw(6.0, 6.2, 6.35, 6.5).unwrap();
        let direct = minimal_covers(&m, &quad, 3).unwrap();
        let mut split = Vec::new();
        for j in &minimal_covers(&m, &quad, 1).unwrap().intervals {
            let (x, y) = (j.lo.exp(), j.hi.exp());
            let sub = Quadruple::raw(x, x + (y - x) / 3.0, x + 2.0 * (y - x) / 3.0, y).unwrap();
            split.extend(ends(&minimal_covers(&m, &sub, 2).unwrap()));
        }
        split.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = ends(&direct);
        assert_eq!(split.len(), want.len());
        for (a, b) in split.iter().zip(&want) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() <= 1e-9 * b.1.abs() && (a.2 - b.2).abs() <= 1e-9 * b.2.abs(), "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn monotone_maps_are_never_crooked() {
    let m = common::straight();
    for quad in [q(9.0, 10.0, 11.0, 12.0), q(20.0, 30.0, 40.0, 50.0), q(10.0, 100.0, 1000.0, 10000.0)] {
        for n in 0..=4 {
            let f = minimal_covers(&m, &quad, n).unwrap();
            assert_eq!((f.len(), f.crooked_count()), (1, 0));
            let iv = &f.intervals[0];
            if iv.lift == 0 {
                assert!(is_crooked(&m, iv.lo, iv.hi, n, &quad).unwrap().is_none());
            }
        }
        let h = hypothesis_check(&m, &quad, 0, 4).unwrap();
        assert!(!h.success());
        assert!(h.counts.iter().all(|&(_, c, t)| c == 0 && t == 1));
    }
}

#[test]
fn staged_map_is_crooked_over_its_quadruple() {
    let m = common::staged();
    let quad = q(39.0, 73.0, 107.0, 141.0);
    let f = minimal_covers(&m, &quad, 1).unwrap();
    assert!(f.all_crooked());
    for iv in &f.intervals {
        let w = iv.witness.as_ref().unwrap();
        assert!(w.margin > 10.0);
        assert!(w.pattern[0] < w.pattern[1] && w.pattern[1] < w.pattern[2]);
        assert!(w.pattern[0] >= iv.lo && w.pattern[2] <= iv.hi);
        assert!(w.residual.unwrap() <= 10.0 * m.err_at(quad.d));
        assert!(is_crooked(&m, iv.lo, iv.hi, 1, &quad).unwrap().is_some());
    }
    let h = hypothesis_check(&m, &quad, 0, 4).unwrap();
    assert_eq!(h.n_star, Some(1));
    assert_eq!(h.persists, Some(true));
    assert!(h.min_margin > 10.0);
}

#[test]
fn recursive_and_grid_crookedness_agree() {
    let cases = [
        (common::staged(), q(39.0, 73.0, 107.0, 141.0), 1),
        (common::staged(), q(39.0, 73.0, 107.0, 141.0), 0),
        (common::one_wiggle(), Quadruple::raw(21.0, 23.0, 25.0, 27.0).unwrap(), 1),
        (common::one_wiggle(), Quadruple::raw(21.0, 23.0, 25.0, 27.0).unwrap(), 2),
        (common::two_wiggles(), Quadruple::raw(11.0, 11.5, 12.0, 12.5).unwrap(), 1),
        (common::straight(), q(9.0, 10.0, 11.0, 12.0), 2),
    ];
    for (m, quad, n) in cases {
        let f = minimal_covers(&m, &quad, n).unwrap();
        for iv in f.intervals.iter().filter(|i| i.lift == 0) {
            let grid = crooked_by_grid(&m, iv.lo, iv.hi, n, &quad, 40_000).unwrap();
            assert_eq!(grid, iv.crooked(), "n = {n}, [{}, {}]", iv.lo, iv.hi);
        }
    }
}

#[test]
fn stabilization() {
    let m = common::straight();
    assert_eq!(stabilize_n0(&m, &q(9.0, 10.0, 11.0, 12.0), common::NU0, 8).unwrap().n0, 0);

    let m = common::one_wiggle();
    let s = stabilize_n0(&m, &q(9.0, 10.0, 11.0, 12.0), common::NU0, 8).unwrap();
    assert!(s.n0 >= 1);
    assert_eq!(s.counts[0], s.counts[1]);
    assert_eq!(s.counts[1], s.counts[2]);
    let f = minimal_covers(&m, &q(9.0, 10.0, 11.0, 12.0), s.n0).unwrap();
    assert!(f.intervals.iter().all(|i| i.log_left() > (30.0 + common::NU0).ln()));
}

#[test]
fn family_json_shape() {
    let m = common::staged();
    let f = minimal_covers(&m, &q(39.0, 73.0, 107.0, 141.0), 1).unwrap();
    let v = f.to_json();
    assert_eq!(v["n"], 1);
    let iv = &v["intervals"][0];
    for key in ["log_a", "log_d", "err", "lift", "crooked", "witness"] {
        assert!(iv.get(key).is_some(), "missing {key}");
    }
}
