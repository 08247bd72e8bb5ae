use std::f64::consts::PI;

use qlab_core::jet::Jet;
use qlab_core::tensor::MetricAtPoint;
use qlab_core::Error;
use qlab_core::metrics::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn flat_torus_jets_are_trivial() {
    let j = catalog("flat_torus", &[4.0]).unwrap().jet(&[0.3, 1.0, 2.0, 5.0], 4).unwrap();
    let m = j.at_point();
    assert_eq!(m.g(), MetricAtPoint::euclidean(4).g());
    for k in 1..=4 {
        assert!(j.partials(k).unwrap().iter().all(|&v| v == 0.0));
    }
    let p = curvature(&j, 2).unwrap();
    assert!(p.riemann.data().iter().all(|&v| v == 0.0));
    assert_eq!(p.scal, 0.0);
}

#[test]
fn unknown_metric_rejected() {
    assert!(matches!(catalog("klein_bottle", &[]), Err(Error::UnknownMetric(_))));
}

#[test]
fn round_two_sphere_has_unit_gauss_curvature() {
    let s = catalog("round_sphere", &[2.0, 1.0]).unwrap();
    for p in [[0.0, 0.0], [0.4, -1.3], [2.5, 0.1]] {
        let k = scalar_curvature(&s.jet(&p, 2).unwrap()).unwrap() / 2.0;
        assert!((k - 1.0).abs() < 1e-12, "K = {k}");
    }
}

#[test]
fn unit_sphere_closed_form_riemann() {
    for n in [4usize, 6] {
        let s = MetricSpec::RoundSphere { dim: n, radius: 1.0 };
        let pt: Vec<f64> = (0..n).map(|i| 0.1 * i as f64 - 0.2).collect();
        let jet = s.jet(&pt, 2).unwrap();
        let p = curvature(&jet, 0).unwrap();
        let g = p.metric.g();
        let mut err: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let e = g[a * n + c] * g[b * n + d] - g[a * n + d] * g[b * n + c];
                        err = err.max((p.riemann.get(&[a, b, c, d]) - e).abs());
                    }
                }
            }
        }
        assert!(err < 1e-10, "n={n} err={err}");
        assert!(rel(p.scal, (n * (n - 1)) as f64) < 1e-12);
        assert!(p.weyl.data().iter().all(|v| v.abs() < 1e-10));
    }
}

#[test]
fn fubini_study_constants() {
    let cp2 = MetricSpec::FubiniStudyCp2;
    assert!(rel(cp2.volume().unwrap(), PI * PI / 2.0) < 1e-15);
    for pt in [[0.0; 4], [0.3, -0.2, 0.5, 0.1], [1.2, 0.4, -0.7, 0.9]] {
        let p = curvature(&cp2.jet(&pt, 2).unwrap(), 0).unwrap();
        assert!(rel(p.scal, 24.0) < 1e-12, "scal {}", p.scal);
        assert!(rel(p.j, 4.0) < 1e-12);
        assert!(rel(p.weyl.norm_squared(&p.metric), 96.0) < 1e-10);
        let sp = dim4_specials(&p).unwrap();
        assert!(rel(sp.weyl_plus_sq, 96.0) < 1e-10, "C+ {}", sp.weyl_plus_sq);
        assert!(sp.weyl_minus_sq.abs() < 1e-9);
        assert!(rel(sp.pfaffian * PI * PI / 2.0, 3.0) < 1e-10);
        assert!(rel(sp.hirzebruch_l * PI * PI / 2.0, 1.0) < 1e-10);
    }
}

#[test]
fn four_sphere_euler_density() {
    let s = MetricSpec::RoundSphere { dim: 4, radius: 1.0 };
    let p = curvature(&s.jet(&[0.2, 0.1, -0.3, 0.4], 2).unwrap(), 0).unwrap();
    let sp = dim4_specials(&p).unwrap();
    assert!(rel(sp.pfaffian, 3.0 / (4.0 * PI * PI)) < 1e-12);
    assert!(rel(sp.pfaffian * s.volume().unwrap(), 2.0) < 1e-12);
}

#[test]
fn product_with_flat_factor() {
    let m = MetricSpec::product(MetricSpec::FubiniStudyCp2, MetricSpec::FlatTorus { dim: 6 });
    let pt = [0.1, 0.2, -0.1, 0.3, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
    let p = curvature(&m.jet(&pt, 2).unwrap(), 0).unwrap();
    assert!(rel(p.scal, 24.0) < 1e-12);
    assert!(rel(p.j, 24.0 / 18.0) < 1e-12);
    let g = p.metric.g();
    for a in 0..4 {
        for b in 0..4 {
            let e = 84.0 / 144.0 * g[a * 10 + b];
            assert!((p.schouten.get(&[a, b]) - e).abs() < 1e-12);
        }
    }
}

#[test]
fn constant_rescaling_scales_scalar_curvature() {
    let s = MetricSpec::RoundSphere { dim: 4, radius: 1.0 };
    let jet = s.jet(&[0.1, 0.2, 0.3, 0.4], 3).unwrap();
    let c = 0.37;
    let w = Jet::constant(jet.space(), 3, c);
    let r = conformal_rescale(&jet, &w).unwrap();
    let s0 = curvature(&jet, 0).unwrap().scal;
    let s1 = curvature(&r, 0).unwrap().scal;
    assert!(rel(s1, (-2.0 * c).exp() * s0) < 1e-12);
    let zero = Jet::zero(jet.space(), 3);
    let same = conformal_rescale(&jet, &zero).unwrap();
    assert_eq!(same.partials(2).unwrap(), jet.partials(2).unwrap());
    let low = Jet::zero(jet.space(), 2);
    assert!(conformal_rescale(&jet, &low).is_err());
}

#[test]
fn curvature_needs_enough_jet_order() {
    let jet = MetricSpec::FubiniStudyCp2.jet(&[0.0; 4], 2).unwrap();
    assert!(matches!(curvature(&jet, 1), Err(Error::InsufficientJetOrder { .. })));
}
