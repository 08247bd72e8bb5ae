use std::f64::consts::PI;
use std::sync::Arc;

use qlab_core::formgrid::sphere::{sh_index, SphereGrid};
use qlab_core::formgrid::*;
use qlab_core::qfunc::*;
use qlab_core::trig::TrigPoly;
use qlab_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

fn sphere(n: usize) -> GaussQuantity {
    GaussQuantity::new(Arc::new(SphereGrid::new(n)))
}

fn random_coeffs(grid: &SphereGrid, rng: &mut ChaCha8Rng, lmax: usize, amp: f64) -> Vec<f64> {
    let mut c = vec![0.0; grid.n_coeffs()];
    for l in 1..=lmax {
        for m in -(l as i64)..=(l as i64) {
            c[sh_index(l, m)] = amp * rng.gen_range(-1.0..1.0) / (l * l) as f64;
        }
    }
    c
}

fn random_scale_s2(q: &GaussQuantity, rng: &mut ChaCha8Rng) -> Scale {
    let c = random_coeffs(q.grid(), rng, 4, 0.3);
    Scale::new(q.grid().synthesis(&c))
}

fn pair_quantity(n: usize) -> PairQuantity {
    let grid = TorusGrid::cubic(4, n);
    // ξ = dx¹ + d(0.3 sin x₂), η = dx² + d(0.2 sin x₁)
    let xi = FormField::from_fn(&grid, 1, 1, |x, c, _| match c {
        0 => 1.0,
        1 => 0.3 * x[1].cos(),
        _ => 0.0,
    });
    let eta = FormField::from_fn(&grid, 1, 1, |x, c, _| match c {
        0 => 0.2 * x[0].cos(),
        1 => 1.0,
        _ => 0.0,
    });
    PairQuantity::new(xi, eta).unwrap()
}

fn random_scale_t4(q: &PairQuantity, rng: &mut ChaCha8Rng) -> Scale {
    let p = TrigPoly::random(rng, 4, &[0, 1, 2, 3], 1, 3, 0.2);
    Scale::new(q.grid().sample(|x| p.eval(x)))
}

fn law_residual<Q: QQuantity>(q: &Q, g: &Scale, hat: &Scale) -> f64 {
    let w = log_ratio(hat, g).unwrap();
    let qg = q.q(&g.omega).unwrap();
    let qh = q.q(&hat.omega).unwrap();
    let l = q.l(&g.omega, &w).unwrap();
    let n = q.dim() as f64;
    (0..w.len())
        .map(|i| ((n * w[i]).exp() * qh[i] - qg[i] - l[i]).abs())
        .fold(0.0, f64::max)
}

fn self_adjoint_residual<Q: QQuantity>(q: &Q, g: &Scale, f: &[f64], h: &[f64]) -> f64 {
    let lf = q.l(&g.omega, f).unwrap();
    let lh = q.l(&g.omega, h).unwrap();
    let a = q.integrate(&g.omega, &f.iter().zip(&lh).map(|(x, y)| x * y).collect::<Vec<_>>());
    let b = q.integrate(&g.omega, &h.iter().zip(&lf).map(|(x, y)| x * y).collect::<Vec<_>>());
    (a - b).abs() / a.abs().max(1.0)
}

#[test]
fn gauss_contract() {
    let q = sphere(32);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g0 = Scale::base(q.nodes());
    assert!(q.q(&g0.omega).unwrap().iter().all(|k| (k - 1.0).abs() < 1e-13));
    let g = random_scale_s2(&q, &mut rng);
    let hat = random_scale_s2(&q, &mut rng);
    assert!(law_residual(&q, &g, &hat) < 1e-8);
    let f = random_scale_s2(&q, &mut rng).omega;
    let h = random_scale_s2(&q, &mut rng).omega;
    assert!(self_adjoint_residual(&q, &g, &f, &h) < 1e-9);
    assert!((q.total(&g.omega).unwrap() - 4.0 * PI).abs() < 1e-10);
}

#[test]
fn pair_contract() {
    let q = pair_quantity(16);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = random_scale_t4(&q, &mut rng);
    let hat = random_scale_t4(&q, &mut rng);
    assert!(law_residual(&q, &g, &hat) < 1e-8);
    let f = random_scale_t4(&q, &mut rng).omega;
    let h = random_scale_t4(&q, &mut rng).omega;
    assert!(self_adjoint_residual(&q, &g, &f, &h) < 1e-9);
    let c0 = q.total(&g.omega).unwrap();
    let c1 = q.total(&hat.omega).unwrap();
    assert!((c0 - c1).abs() < 1e-8 * c0.abs().max(1.0));
}

fn cocycle_checks<Q: QQuantity>(q: &Q, scales: &[Scale]) {
    let (a, b, c) = (&scales[0], &scales[1], &scales[2]);
    assert!(functional_k(q, a, a).unwrap().abs() < 1e-14);
    let kab = functional_k(q, a, b).unwrap();
    assert!((kab + functional_k(q, b, a).unwrap()).abs() < 1e-10 * kab.abs().max(1.0));
    let k = functional_k(q, c, b).unwrap() + functional_k(q, b, a).unwrap() - functional_k(q, c, a).unwrap();
    assert!(k.abs() < 1e-8 * kab.abs().max(1.0), "𝒦 cocycle {k}");
    let m = functional_m(q, c, b).unwrap() + functional_m(q, b, a).unwrap() - functional_m(q, c, a).unwrap();
    assert!(m.abs() < 1e-8 * kab.abs().max(1.0), "ℳ cocycle {m}");
    assert!(functional_m(q, a, a).unwrap().abs() < 1e-14);
    let shifted = functional_m(q, &c.shifted(0.37), a).unwrap();
    assert!((shifted - functional_m(q, c, a).unwrap()).abs() < 1e-9);
}

#[test]
fn cocycles_for_both_quantities() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = sphere(24);
    for _ in 0..5 {
        let scales: Vec<Scale> = (0..3).map(|_| random_scale_s2(&s, &mut rng)).collect();
        cocycle_checks(&s, &scales);
    }
    let t = pair_quantity(12);
    for _ in 0..2 {
        let scales: Vec<Scale> = (0..3).map(|_| random_scale_t4(&t, &mut rng)).collect();
        cocycle_checks(&t, &scales);
    }
}

#[test]
fn constant_shift_gives_c_times_shift() {
    let q = sphere(16);
    let g = Scale::base(q.nodes());
    let k = functional_k(&q, &g.shifted(0.4), &g).unwrap();
    assert!((k - 0.4 * 4.0 * PI).abs() < 1e-12);
}

#[test]
fn first_variation_matches_difference_quotient() {
    let q = sphere(24);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g0 = Scale::base(q.nodes());
    let g = random_scale_s2(&q, &mut rng);
    let mut beta = random_scale_s2(&q, &mut rng).omega;
    let mean = q.integrate(&g.omega, &beta) / q.volume(&g.omega);
    beta.iter_mut().for_each(|b| *b -= mean);
    let at = |t: f64| {
        let s = Scale::new(g.omega.iter().zip(&beta).map(|(w, b)| w + t * b).collect());
        functional_m(&q, &s, &g0).unwrap()
    };
    let h = 1e-4;
    let fd = (at(h) - at(-h)) / (2.0 * h);
    let qg = q.q(&g.omega).unwrap();
    let exact = q.integrate(&g.omega, &beta.iter().zip(&qg).map(|(b, k)| b * k).collect::<Vec<_>>());
    assert!((fd - exact).abs() < 1e-6, "{fd} {exact}");
}

#[test]
fn h_functional_and_toward_mt() {
    let q = sphere(24);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g0 = Scale::base(q.nodes());
    assert!(functional_h(&q, &g0, &g0).unwrap().abs() < 1e-14);
    for _ in 0..3 {
        let g = random_scale_s2(&q, &mut rng);
        let h = functional_h(&q, &g, &g0).unwrap();
        let mt = toward_mt(&q, &g, &g0).unwrap();
        assert!((h - mt).abs() < 1e-8, "{h} {mt}");
        assert!(h >= -1e-12);
    }
    let bumpy = random_scale_s2(&q, &mut rng);
    assert!(matches!(functional_h(&q, &g0, &bumpy), Err(Error::QNotConstant(_))));
}

#[test]
fn mobius_maps() {
    let q = sphere(64);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rho = random_coeffs(q.grid(), &mut rng, 4, 0.3);
    assert!(mobius_invariance_residual(&q, &Mobius::identity(), &rho).unwrap() < 1e-12);
    let rot = Mobius::rotation(Complex64::new(0.6, 0.3), Complex64::new(-0.2, 0.7));
    assert!(mobius_invariance_residual(&q, &rot, &rho).unwrap() < 1e-9);
    let dil = Mobius::dilation(1.3);
    let r = mobius_invariance_residual(&q, &dil, &rho).unwrap();
    assert!(r < 1e-6, "{r}");
    let zero = Complex64::new(0.0, 0.0);
    assert!(matches!(Mobius::new(zero, zero, zero, zero), Err(Error::SingularMobius)));
}

#[test]
fn mobius_points_stay_on_the_sphere() {
    let h = Mobius::rotation(Complex64::new(0.1, 0.9), Complex64::new(0.4, -0.2));
    let p = [0.48, -0.6, 0.64];
    let image = h.apply(p);
    let norm: f64 = image.iter().map(|x| x * x).sum();
    assert!((norm - 1.0).abs() < 1e-14);
    let back = h.inverse().apply(image);
    for i in 0..3 {
        assert!((back[i] - p[i]).abs() < 1e-13);
    }
    assert!(h.log_conformal_factor(p).abs() < 1e-13);
}

#[test]
fn prescription_on_forced_cases() {
    let q = sphere(48);
    let ones = vec![1.0; q.nodes()];
    let zero = vec![0.0; q.nodes()];
    assert!(prescription_residual(&q, &zero, &ones).unwrap().iter().all(|r| r.abs() < 1e-14));
    // σ of a dilation is the conformal factor of another round metric
    let h = Mobius::dilation(1.4);
    let sigma: Vec<f64> = (0..q.nodes()).map(|k| h.log_conformal_factor(q.grid().point(k))).collect();
    let k_hat = q.q(&sigma).unwrap();
    assert!(k_hat.iter().all(|k| (k - 1.0).abs() < 1e-8));
    let r = prescription_residual(&q, &sigma, &ones).unwrap();
    assert!(r.iter().all(|v| v.abs() < 1e-8));

    let t = pair_quantity(16);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let w = random_scale_t4(&t, &mut rng).omega;
    let target = t.q(&w).unwrap();
    let r = prescription_residual(&t, &w, &target).unwrap();
    assert!(r.iter().all(|v| v.abs() < 1e-8));
}

#[test]
fn descent_on_the_sphere() {
    let q = sphere(24);
    let round = descent_at(&q, &vec![0.0; q.nodes()]);
    assert_eq!(round.iterations, 0);
    let init = q.grid().sample(|p| 0.2 * (2.0 * p[0]).sin() * p[2] + 0.1 * p[1]);
    let r = descent_at(&q, &init);
    assert!(r.converged, "residual {}", r.residual);
    assert!(r.iterations <= 500);
    assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-14));
    let kf = q.q(&r.omega).unwrap();
    let target = 4.0 * PI / q.volume(&r.omega);
    assert!(kf.iter().all(|k| (k - target).abs() <= 1e-4));
}

#[test]
fn descent_on_the_torus() {
    let grid = TorusGrid::cubic(4, 8);
    let dx = FormField::from_fn(&grid, 1, 1, |_, c, _| if c == 0 { 1.0 } else { 0.0 });
    let t = PairQuantity::new(dx.clone(), dx).unwrap();
    assert_eq!(t.total(&vec![0.0; t.nodes()]).unwrap(), 0.0);
    let init = t.grid().sample(|x| 0.1 * (x[1] + x[2]).sin() + 0.05 * x[3].cos());
    let r = descent_at(&t, &init);
    assert!(r.converged, "residual {}", r.residual);
    assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-14));
}

fn descent_at<Q: QQuantity>(q: &Q, init: &[f64]) -> DescentResult {
    constant_q_descent(q, init, &DescentOptions::default()).unwrap()
}

#[test]
fn theta_zero_is_euler_characteristic() {
    let q = sphere(24);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let round = vec![0.0; q.nodes()];
    let bumpy = random_scale_s2(&q, &mut rng).omega;
    let d = theta_zero(&[(&q, &round), (&q, &bumpy)]).unwrap();
    for v in d {
        assert!((v - 4.0 * PI).abs() < 1e-8 * 4.0 * PI);
    }
}
