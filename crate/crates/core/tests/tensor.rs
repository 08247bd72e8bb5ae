use qlab_core::tensor::*;
use qlab_core::Error;
use proptest::prelude::*;

fn random_spd(n: usize, seed: &[f64]) -> MetricAtPoint {
    // A = I + B Bᵀ/n is symmetric positive definite.
    let b: Vec<f64> = (0..n * n).map(|k| seed[k % seed.len()] * ((k * 7 % 5) as f64 - 2.0) / 3.0).collect();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for k in 0..n {
                s += b[i * n + k] * b[j * n + k] / n as f64;
            }
            g[i * n + j] = s;
        }
    }
    MetricAtPoint::new(n, g, 1.0).unwrap()
}

fn sphere_riemann(m: &MetricAtPoint) -> TensorPoint {
    let n = m.dim();
    let g = m.g();
    let mut r = TensorPoint::zeros(n, vec![Variance::Lower; 4]);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let v = g[a * n + c] * g[b * n + d] - g[a * n + d] * g[b * n + c];
                    r.set(&[a, b, c, d], v);
                }
            }
        }
    }
    r
}

#[test]
fn trace_of_identity_is_dimension() {
    let t = TensorPoint::identity(5).contract(0, 1, None).unwrap();
    assert_eq!(t.data(), &[5.0]);
}

#[test]
fn metric_against_inverse_traces_to_dimension() {
    let m = random_spd(4, &[0.3, -0.7, 1.1]);
    let t = m.metric_tensor().outer(&m.inverse_tensor());
    // g_{ab} g^{bc} contracted over b then the remaining pair.
    let gg = t.contract(1, 2, None).unwrap();
    let tr = gg.contract(0, 1, None).unwrap();
    assert!((tr.data()[0] - 4.0).abs() < 1e-12);
}

#[test]
fn sphere_riemann_contracts_to_ricci() {
    let m = MetricAtPoint::euclidean(4);
    let ric = sphere_riemann(&m).contract(0, 2, Some(&m)).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let e = if i == j { 3.0 } else { 0.0 };
            assert!((ric.get(&[i, j]) - e).abs() < 1e-14);
        }
    }
}

#[test]
fn contraction_errors() {
    let t = TensorPoint::zeros(3, vec![Variance::Lower, Variance::Lower]);
    assert!(matches!(t.contract(0, 1, None), Err(Error::SameVariance(_))));
    assert!(matches!(t.contract(0, 2, None), Err(Error::SlotOutOfRange { .. })));
}

#[test]
fn form_dot_basics() {
    let m = MetricAtPoint::euclidean(4);
    let a = Form::basis(4, &[0, 1]);
    let b = Form::basis(4, &[0, 2]);
    assert_eq!(form_dot(&a, &a, &m).unwrap(), 1.0);
    assert_eq!(form_dot(&a, &b, &m).unwrap(), 0.0);
    let c = Form::basis(4, &[0]);
    assert!(matches!(form_dot(&a, &c, &m), Err(Error::DegreeMismatch { .. })));
    let g = random_spd(4, &[0.4, 0.9, -0.2]);
    let v = g.volume_form();
    assert!((form_dot(&v, &v, &g).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn hodge_star_flat_examples() {
    let m = MetricAtPoint::euclidean(4);
    let s = hodge_star(&Form::basis(4, &[0, 1]), &m).unwrap();
    assert_eq!(s, Form::basis(4, &[2, 3]));
    let one = Form::from_comps(4, 0, vec![1.0]).unwrap();
    assert_eq!(hodge_star(&one, &m).unwrap(), m.volume_form());
    let a = Form::from_comps(4, 2, vec![1.0, -2.0, 0.5, 3.0, 0.25, -1.5]).unwrap();
    let ss = hodge_star(&hodge_star(&a, &m).unwrap(), &m).unwrap();
    assert!(ss.sub(&a).unwrap().sup_norm() < 1e-15);
}

#[test]
fn sharp_action_examples() {
    let a = Form::from_comps(5, 3, (0..10).map(|i| i as f64 - 4.5).collect()).unwrap();
    let id = TensorPoint::identity(5);
    let out = sharp_action(&id, &a).unwrap();
    assert!(out.sub(&a.scale(3.0)).unwrap().sup_norm() < 1e-14);
    let mut p = TensorPoint::identity(5);
    p.data_mut().iter_mut().for_each(|x| *x *= 0.7 * 1.5);
    let out = sharp_action(&p, &a).unwrap();
    assert!(out.sub(&a.scale(3.0 * 0.7 * 1.5)).unwrap().sup_norm() < 1e-13);
    let bad = TensorPoint::zeros(5, vec![Variance::Lower, Variance::Lower]);
    assert!(sharp_action(&bad, &a).is_err());
}

fn arb_form(n: usize, k: usize) -> impl Strategy<Value = Form> {
    let len = combos(n, k).len();
    prop::collection::vec(-2.0f64..2.0, len).prop_map(move |c| Form::from_comps(n, k, c).unwrap())
}

fn arb_metric(n: usize) -> impl Strategy<Value = MetricAtPoint> {
    prop::collection::vec(-1.0f64..1.0, 3).prop_map(move |s| random_spd(n, &s))
}

proptest! {
    #[test]
    fn form_dot_symmetric_positive(a in arb_form(4, 2), b in arb_form(4, 2), m in arb_metric(4)) {
        let ab = form_dot(&a, &b, &m).unwrap();
        let ba = form_dot(&b, &a, &m).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab.abs()));
        let aa = form_dot(&a, &a, &m).unwrap();
        prop_assert!(aa >= -1e-12);
    }

    #[test]
    fn hodge_star_is_isometry(a in arb_form(4, 1), b in arb_form(4, 1), m in arb_metric(4)) {
        let sa = hodge_star(&a, &m).unwrap();
        let sb = hodge_star(&b, &m).unwrap();
        let lhs = form_dot(&sa, &sb, &m).unwrap();
        let rhs = form_dot(&a, &b, &m).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        // α ∧ ⋆β = (α·β) vol
        let w = a.wedge(&sb);
        let v = m.volume_form().scale(rhs);
        prop_assert!(w.sub(&v).unwrap().sup_norm() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn sharp_is_derivation(a in arb_form(5, 1), b in arb_form(5, 2),
                           e in prop::collection::vec(-1.0f64..1.0, 25)) {
        let lhs = sharp_action_raw(&e, &a.wedge(&b));
        let rhs = sharp_action_raw(&e, &a).wedge(&b)
            .add(&a.wedge(&sharp_action_raw(&e, &b))).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().sup_norm() <= 1e-12);
    }

    #[test]
    fn contraction_commutes_with_raising(data in prop::collection::vec(-1.0f64..1.0, 27),
                                        m in arb_metric(3)) {
        let t = TensorPoint::from_data(3, vec![Variance::Upper, Variance::Lower, Variance::Lower], data).unwrap();
        let a = t.contract(0, 1, None).unwrap().raise(0, &m).unwrap();
        let b = t.raise(2, &m).unwrap().contract(0, 1, None).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12);
    }
}
