use std::f64::consts::PI;

use qlab_core::tensor::Form;
use qlab_core::Error;
use qlab_core::charforms::*;
use qlab_core::metrics::{curvature, dim4_specials, random_metric_jet, ConformalFactor, MetricSpec};
use qlab_core::trig::TrigPoly;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn s2() -> MetricSpec {
    MetricSpec::RoundSphere { dim: 2, radius: 1.0 }
}

#[test]
fn scalar_two_form_square() {
    let beta = Form::from_comps(4, 2, vec![1.0, 2.0, 0.5, -1.0, 0.3, 0.7]).unwrap();
    let f = EndoFormMatrix::from_fn(1, 4, 2, |_, _| beta.clone());
    assert_eq!(invariant_s(&f, 2).unwrap(), beta.wedge(&beta));
    assert!(invariant_s(&EndoFormMatrix::zero(3, 4, 2), 2).unwrap().sup_norm() == 0.0);
    assert_eq!(invariant_s(&EndoFormMatrix::zero(2, 4, 1), 2), Err(Error::OddDegree(1)));
}

#[test]
fn conjugation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 4;
    let f = EndoFormMatrix::from_fn(3, n, 2, |_, _| {
        Form::from_comps(n, 2, (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    });
    // G = I + small random, inverse by nalgebra
    let g: Vec<f64> = (0..9).map(|k| if k % 4 == 0 { 1.0 } else { 0.0 } + 0.3 * ((k * 7 % 5) as f64 - 2.0)).collect();
    let gi = nalgebra::DMatrix::from_row_slice(3, 3, &g).try_inverse().unwrap();
    let gi: Vec<f64> = (0..9).map(|k| gi[(k / 3, k % 3)]).collect();
    let c = f.conjugate(&g, &gi);
    for k in 1..=2 {
        let a = invariant_s(&f, k).unwrap();
        let b = invariant_s(&c, k).unwrap();
        assert!(a.sub(&b).unwrap().sup_norm() < 1e-10 * a.sup_norm().max(1.0));
    }
}

#[test]
fn cp2_pontrjagin_is_three_times_signature_density() {
    let jet = MetricSpec::FubiniStudyCp2.jet(&[0.3, -0.2, 0.5, 0.1], 2).unwrap();
    let pack = curvature(&jet, 0).unwrap();
    let sp = dim4_specials(&pack).unwrap();
    let p1 = pontrjagin_form(&pack, 1, CurvatureSource::Riemann).unwrap();
    let vol = pack.metric.volume_form();
    let ratio = p1.comps()[0] / vol.comps()[0];
    assert!((ratio - 3.0 * sp.hirzebruch_l).abs() < 1e-12);
    assert!((ratio * PI * PI / 2.0 - 3.0).abs() < 1e-10);
    let pw = pontrjagin_form(&pack, 1, CurvatureSource::Weyl).unwrap();
    assert!(p1.sub(&pw).unwrap().sup_norm() < 1e-12);
    assert!(pontrjagin_form(&pack, 2, CurvatureSource::Riemann).is_err());
}

#[test]
fn odd_traces_of_metric_curvature_vanish() {
    let m = MetricSpec::product(MetricSpec::RoundSphere { dim: 4, radius: 1.0 }, s2());
    let pack = curvature(&m.jet(&[0.1, 0.2, 0.3, -0.1, 0.4, 0.2], 2).unwrap(), 0).unwrap();
    let f = EndoFormMatrix::from_curvature(&pack.riemann, &pack.metric);
    assert!(invariant_s(&f, 1).unwrap().sup_norm() < 1e-12);
    assert!(invariant_s(&f, 3).unwrap().sup_norm() < 1e-10);
}

#[test]
fn pontrjagin_form_conformally_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let base = MetricSpec::product(s2(), s2());
    let w = TrigPoly::random(&mut rng, 4, &[0, 1, 2, 3], 2, 3, 0.3);
    let resc = MetricSpec::conformal(base.clone(), ConformalFactor::trig(w));
    let pt = [0.2, -0.4, 0.3, 0.6];
    let a = curvature(&base.jet(&pt, 2).unwrap(), 0).unwrap();
    let b = curvature(&resc.jet(&pt, 2).unwrap(), 0).unwrap();
    let pa = pontrjagin_form(&a, 1, CurvatureSource::Riemann).unwrap();
    let pb = pontrjagin_form(&b, 1, CurvatureSource::Riemann).unwrap();
    assert!(pa.sub(&pb).unwrap().sup_norm() < 1e-10);
}

#[test]
fn tractor_curvature_matches_skew_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [3usize, 4, 5] {
        let jet = random_metric_jet(&mut rng, n, 3, 0.15);
        let pack = curvature(&jet, 1).unwrap();
        let tp = tractor_curvature(&jet).unwrap();
        let formula = tractor_omega_formula(&pack, 1.0).unwrap();
        assert!(tp.omega.max_abs_diff(&formula) < 1e-12, "n={n}");
        assert!(tp.omega.skew_defect(&tp.h) < 1e-12);
        let printed = tractor_omega_formula(&pack, -1.0).unwrap();
        assert!(printed.skew_defect(&tp.h) > 1e-3);
    }
}

#[test]
fn tractor_curvature_vanishes_when_conformally_flat() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let w = TrigPoly::random(&mut rng, 4, &[0, 1, 2, 3], 2, 4, 0.4);
    let m = MetricSpec::conformal(MetricSpec::FlatTorus { dim: 4 }, ConformalFactor::trig(w));
    let tp = tractor_curvature(&m.jet(&[0.3, 1.0, 2.0, -0.5], 3).unwrap()).unwrap();
    assert!(tp.omega.sup_norm() < 1e-10);
    let tp = tractor_curvature(&MetricSpec::RoundSphere { dim: 4, radius: 2.0 }.jet(&[0.1; 4], 3).unwrap()).unwrap();
    assert!(tp.omega.sup_norm() < 1e-10);
}

#[test]
fn tractor_trace_equals_weyl_trace() {
    let jet = MetricSpec::FubiniStudyCp2.jet(&[0.1, 0.2, -0.3, 0.4], 3).unwrap();
    let pack = curvature(&jet, 1).unwrap();
    let tp = tractor_curvature(&jet).unwrap();
    let lhs = invariant_s(&tp.omega, 2).unwrap();
    let rhs = invariant_s(&EndoFormMatrix::from_curvature(&pack.weyl, &pack.metric), 2).unwrap();
    assert!(lhs.sub(&rhs).unwrap().sup_norm() < 1e-10);
    // X is null for h.
    let r = 6;
    assert_eq!(tp.h[tractor_rho(4) * r + tractor_rho(4)], 0.0);
}

#[test]
fn dim6_identity_on_symmetric_products() {
    let s222 = MetricSpec::product(MetricSpec::product(s2(), s2()), s2());
    let id = dim6_tractor_identity(&s222.jet(&[0.1, -0.2, 0.3, 0.0, 0.2, 0.1], 5).unwrap()).unwrap();
    assert!(id.residual() < 1e-9, "{id:?}");
    assert!(id.invariants.g.abs() < 1e-10);
    assert!(id.lhs.abs() > 0.1);
}

#[test]
fn dim6_identity_needs_order_five() {
    let jet = MetricSpec::FlatTorus { dim: 6 }.jet(&[0.0; 6], 4).unwrap();
    assert!(matches!(omega_q2_omega(&jet), Err(Error::InsufficientJetOrder { .. })));
}
