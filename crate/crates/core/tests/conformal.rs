mod common;

use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_2, PI};

use wiggle_core::kernel::{f0_exact, phi0_exact, KernelCache, MapKernel};
use wiggle_core::verify::{check_oracle, check_roundtrip, check_sector, interior_points, VerifyConfig};
use wiggle_core::{build_map, Error, KernelConfig, LogPolar, WiggleSpec};

#[test]
fn closed_form_values() {
    // 5 sinh(1) / sinh(1/2)
    assert!((f0_exact(C64::new(6.0, 0.0)).re - 11.276259652063807).abs() < 1e-12);
    assert!((f0_exact(C64::new(5.0, 0.0)).re - 5.0).abs() < 1e-14);
    assert!((phi0_exact(5.0) - 5.0).abs() < 1e-14);
}

#[test]
fn normalization() {
    for m in [common::straight(), common::one_wiggle(), common::two_wiggles()] {
        let k = m.kernel();
        let w = k.eval_forward(C64::new(5.0, 0.0)).unwrap();
        assert!((w.lambda - 5f64.ln()).abs() <= k.eps_map, "{:?}", k.spec);
        assert!(w.theta.abs() <= k.eps_map);
        assert!((k.eval_inverse(LogPolar::real(5.0)) - C64::new(5.0, 0.0)).norm() <= 10.0 * k.eps_map);
    }
}

#[test]
fn straight_forward_and_inverse() {
    let m = common::straight();
    let k = m.kernel();
    let w = k.eval_forward(C64::new(6.0, 0.0)).unwrap();
    assert!((w.lambda - 11.276259652063807f64.ln()).abs() < 1e-9);
    assert!(w.theta.abs() < 1e-9);
    for t in [4.0, 5.0, 9.5, 40.0, 1e6, 1e40] {
        let z = k.eval_inverse(LogPolar::real(t));
        let want = 4.0 + 2.0 * (t * 0.5f64.sinh() / 5.0).asinh();
        assert!((z.re - want).abs() < 1e-9 * want && z.im.abs() < 1e-9, "t = {t}");
    }
}

#[test]
fn derivative_at_five() {
    let m = common::straight();
    let d = m.kernel().derivative_modulus(C64::new(5.0, 0.0)).unwrap();
    let want = 2.5 / 0.5f64.tanh();
    assert!((d.log_abs.exp() - want).abs() < 1e-9, "{}", d.log_abs.exp());
    assert!(want >= 2.5);
    assert!(d.rel_err < 1e-5);
}

#[test]
fn derivative_refuses_boundary_points() {
    let m = common::one_wiggle();
    assert!(matches!(m.kernel().derivative_modulus(C64::new(20.0, 1e-9)), Err(Error::Domain(_))));
    assert!(matches!(m.kernel().eval_forward(C64::new(3.0, 0.0)), Err(Error::Domain(_))));
}

#[test]
fn boundary_correspondence() {
    let m = common::straight();
    let k = m.kernel();
    for y in [-3.0, -1.0, 0.5, 2.9] {
        let w = k.eval_forward(C64::new(4.0 + 1e-9, y)).unwrap();
        assert!((w.theta.abs() - FRAC_PI_2).abs() < 1e-6, "y = {y}: {}", w.theta);
    }
    for x in [5.0, 12.0, 30.0] {
        let w = k.eval_forward(C64::new(x, PI - 1e-9)).unwrap();
        assert!((w.theta - FRAC_PI_2).abs() < 1e-6);
    }
    let m = common::one_wiggle();
    let k = m.kernel();
    for z in [C64::new(25.0, PI / 3.0 + 1e-9), C64::new(25.0, -PI / 3.0 - 1e-9), C64::new(20.0 + 1e-9, -2.0)] {
        let w = k.eval_forward(z).unwrap();
        assert!((w.theta.abs() - FRAC_PI_2).abs() < 1e-4, "{z}: {}", w.theta);
    }
}

#[test]
fn oracle_and_roundtrip() {
    let s = common::straight();
    let c = check_oracle(s.kernel());
    assert!(c.pass && c.samples == 1000, "{c:?}");
    for m in [common::straight(), common::one_wiggle(), common::two_wiggles()] {
        let c = check_roundtrip(m.kernel(), 1e-2);
        assert!(c.pass && c.samples > 900, "{:?}: {c:?}", m.kernel().spec);
    }
}

#[test]
fn roundtrip_on_random_interior_points() {
    let m = common::two_wiggles();
    let k = m.kernel();
    for z in interior_points(&k.spec, 300, 45.0, 1e-3, 3) {
        let back = k.eval_inverse(k.eval_forward(z).unwrap());
        assert!((back - z).norm() <= 10.0 * k.eps_map, "{z}: {}", (back - z).norm());
    }
}

#[test]
fn uniqueness_of_the_normalization() {
    // w -> a w + i b fixing 5 forces a = 1, b = 0; check the kernel's own
    // composition is the identity on a few points
    let m = common::one_wiggle();
    let k = m.kernel();
    for w in [C64::new(5.0, 0.0), C64::new(1.0, 7.0), C64::new(300.0, -200.0)] {
        let z = k.eval_inverse_c(w);
        let back = k.eval_forward(z).unwrap().to_complex();
        assert!((back - w).norm() / w.norm() < 1e-8, "{w} -> {back}");
    }
}

#[test]
fn log_polar_handles_huge_values() {
    let m = common::straight();
    let k = m.kernel();
    // Re F ~ e^{(x-4)/2}; x = 1500 overflows linear coordinates
    let z = k.eval_inverse(LogPolar::new(700.0, 0.3));
    let w = k.eval_forward(z).unwrap();
    assert!((w.lambda - 700.0).abs() < 1e-9 && (w.theta - 0.3).abs() < 1e-9);
    assert!(z.re > 1300.0);
}

#[test]
fn decoration_bound_straight_strip() {
    // F0^{-1}({|w| = t}) has diameter tending to 2 pi
    let m = common::straight();
    let e = m.kernel().nu_estimate(0.25);
    assert!(e.nu.is_finite() && e.rel_change < 0.01);
    assert!((e.nu - 2.0 * PI).abs() < 1e-3, "{}", e.nu);
}

#[test]
fn decoration_bound_one_wiggle() {
    let m = common::one_wiggle();
    let e = m.kernel().nu_estimate(0.25);
    assert!(e.nu.is_finite() && e.rel_change < 0.01, "{e:?}");
    assert!(e.nu > 2.0 * PI && e.nu < common::NU0 + 1e-3);
    // shifting the grid moves the sup by less than the stability margin
    let (lo, hi) = m.kernel().nu_range();
    let g: Vec<f64> = (0..=200).map(|k| lo + 0.037 + (hi - lo) * k as f64 / 200.0).collect();
    let (shifted, _) = m.kernel().estimate_nu(&g);
    assert!((shifted - e.nu).abs() / e.nu < 0.01);
}

#[test]
fn geodesics_end_on_the_boundary() {
    let m = common::one_wiggle();
    let k = m.kernel();
    for lambda in [2.0, 3.4, 5.0] {
        let g = k.vertical_geodesic(lambda);
        let (a, b) = (g.polyline[0], *g.polyline.last().unwrap());
        assert!(k.spec.dist_to_boundary(a) < 1e-3 && k.spec.dist_to_boundary(b) < 1e-3, "lambda {lambda}");
    }
}

#[test]
fn sector_lemma_on_one_wiggle() {
    let m = common::one_wiggle();
    let c = check_sector(m.kernel(), common::NU0, &VerifyConfig { samples: 300, ..VerifyConfig::default() });
    assert!(c.pass && c.samples == 300, "{c:?}");
}

#[test]
fn cache_roundtrip() {
    let m = common::one_wiggle();
    let k = m.kernel();
    let text = serde_json::to_string(&k.to_cache()).unwrap();
    let back = MapKernel::from_cache(&serde_json::from_str::<KernelCache>(&text).unwrap()).unwrap();
    assert_eq!(back.fingerprint(), k.fingerprint());
    for t in [5.0, 25.0, 1e5] {
        assert_eq!(back.phi_log(f64::ln(t)), k.phi_log(f64::ln(t)));
    }
    let mut bad = k.to_cache();
    bad.spec_hash = "0".into();
    assert!(MapKernel::from_cache(&bad).is_err());
}

#[test]
fn build_is_deterministic() {
    let s = WiggleSpec::new(vec![20.0], vec![30.0]);
    let a = build_map(&s, &KernelConfig::default()).unwrap();
    let k = common::one_wiggle();
    assert_eq!(a.fingerprint(), k.kernel().fingerprint());
    assert_eq!(a.to_cache().lower_x, k.kernel().to_cache().lower_x);
}

#[test]
fn invalid_spec_is_rejected() {
    let s = WiggleSpec::new(vec![20.0], vec![21.0]);
    assert!(matches!(build_map(&s, &KernelConfig::default()), Err(Error::Spec(_))));
}
