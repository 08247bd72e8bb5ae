use std::sync::Arc;

use nalgebra::DMatrix;
use qlab_core::formgrid::*;
use qlab_core::harmonics::*;
use qlab_core::qops::QContext;
use qlab_core::trig::TrigPoly;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const VOL: f64 = 1558.5454565440386; // (2π)⁴

fn scale(grid: &Arc<TorusGrid>, seed: u64, amp: f64) -> QContext {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = TrigPoly::random(&mut rng, 4, &[0, 1, 2, 3], 1, 3, amp);
    QContext::from_omega(grid, grid.sample(|x| p.eval(x)))
}

#[test]
fn pcg_solves_a_small_system() {
    let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
    let b = [1.0, 2.0, 3.0];
    let apply = |x: &[f64]| (0..3).map(|i| (0..3).map(|j| a[(i, j)] * x[j]).sum()).collect();
    let (x, report) = pcg(apply, |r: &[f64]| r.to_vec(), &b, SolverOptions::default()).unwrap();
    let exact = a.lu().solve(&nalgebra::DVector::from_row_slice(&b)).unwrap();
    for i in 0..3 {
        assert!((x[i] - exact[i]).abs() < 1e-10);
    }
    assert!(report.iterations <= 3);
}

#[test]
fn flat_harmonics_are_constant_forms() {
    let grid = TorusGrid::cubic(4, 8);
    let ctx = QContext::flat(&grid);
    for k in [1, 2] {
        let basis = conformal_harmonics(k, &ctx, SolverOptions::default()).unwrap();
        assert_eq!(basis.forms.len(), if k == 1 { 4 } else { 6 });
        assert!(basis.harmonic_residuals.iter().all(|r| *r < 1e-13));
        assert!(basis.iterations.iter().all(|i| *i == 0));
    }
    let basis = conformal_harmonics(1, &ctx, SolverOptions::default()).unwrap();
    let th = theta(&basis, &ctx).unwrap();
    assert!(th.amax() < 1e-10);
}

#[test]
fn middle_degree_is_the_metric_pairing() {
    let grid = TorusGrid::cubic(4, 12);
    let ctx = QContext::from_omega(&grid, grid.sample(|x| 0.2 * x[0].sin()));
    let basis = conformal_harmonics(2, &ctx, SolverOptions::default()).unwrap();
    assert!(basis.harmonic_residuals.iter().all(|r| *r < 1e-12));
    let th = theta(&basis, &ctx).unwrap();
    let expected = DMatrix::<f64>::identity(6, 6) * VOL;
    assert!((&th - expected).amax() < 1e-8 * VOL);
    let eig = moments_eigen(&th, &gram(&basis, &ctx).unwrap()).unwrap();
    assert!(eig.values.iter().all(|v| (v - 1.0).abs() < 1e-8));
}

#[test]
fn theta_one_vanishes_and_is_symmetric() {
    let grid = TorusGrid::cubic(4, 16);
    let opts = SolverOptions { tol: 1e-10, max_iter: 500 };
    for seed in [1, 2] {
        let ctx = scale(&grid, seed, 0.2);
        let basis = conformal_harmonics(1, &ctx, opts).unwrap();
        assert!(basis.solver_residuals.iter().all(|r| *r <= 1e-8), "{:?}", basis.solver_residuals);
        assert!(basis.harmonic_residuals.iter().all(|r| *r < 1e-6), "{:?}", basis.harmonic_residuals);
        let th = theta(&basis, &ctx).unwrap();
        assert!(th.amax() < 1e-6, "{th}");
        assert!((&th - th.transpose()).amax() < 1e-9);
    }
}

#[test]
fn theta_is_independent_of_representative() {
    let grid = TorusGrid::cubic(4, 16);
    let ctx = scale(&grid, 5, 0.2);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in [1, 2] {
        let basis = conformal_harmonics(k, &ctx, SolverOptions::default()).unwrap();
        let th = theta(&basis, &ctx).unwrap();
        let perturbed: Vec<FormField> = basis
            .forms
            .iter()
            .map(|f| {
                let count = qlab_core::tensor::combos(4, k - 1).len();
                let polys: Vec<TrigPoly> =
                    (0..count).map(|_| TrigPoly::random(&mut rng, 4, &[0, 1, 2, 3], 2, 2, 0.3)).collect();
                let potential = FormField::from_fn(&grid, k - 1, 1, |x, c, _| polys[c].eval(x));
                f.add(&exterior_d(&potential).unwrap()).unwrap()
            })
            .collect();
        let mixed = pairing_matrix(&perturbed, &basis.forms, &ctx).unwrap();
        assert!((&mixed - &th).amax() < 1e-8 * th.amax().max(1.0), "k = {k}");
    }
}

#[test]
fn period_subspace_is_lagrangian() {
    let grid = TorusGrid::cubic(4, 12);
    let ctx = scale(&grid, 9, 0.2);
    let b2 = conformal_harmonics(2, &ctx, SolverOptions::default()).unwrap();
    let rep = period_subspace(&b2, &ctx).unwrap();
    assert_eq!(rep.dimension, 6);
    assert!(rep.isotropy_residual < 1e-9);
    assert!(rep.symplectic_residual < 1e-8 * VOL);

    let b1 = conformal_harmonics(1, &ctx, SolverOptions::default()).unwrap();
    let rep = period_subspace(&b1, &ctx).unwrap();
    assert_eq!(rep.dimension, 4);
    assert!(rep.dual_coords.amax() < 1e-6);
    assert!((&rep.class_coords - DMatrix::<f64>::identity(4, 4)).amax() < 1e-10);
}

#[test]
fn moments_of_degree_one_vanish() {
    let grid = TorusGrid::cubic(4, 12);
    let ctx = scale(&grid, 13, 0.2);
    let basis = conformal_harmonics(1, &ctx, SolverOptions::default()).unwrap();
    let g = gram(&basis, &ctx).unwrap();
    let eig = moments_eigen(&theta(&basis, &ctx).unwrap(), &g).unwrap();
    assert!(eig.gram_min_eigenvalue > 0.0);
    assert!(eig.values.iter().all(|v| v.abs() < 1e-6));
    let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(moments_eigen(&bad, &bad).is_err());
}
