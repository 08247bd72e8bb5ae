use std::f64::consts::TAU;
use std::sync::Arc;

use qlab_core::formgrid::*;
use qlab_core::tensor::{combos, Form};
use qlab_core::trig::TrigPoly;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_form(grid: &Arc<TorusGrid>, rng: &mut ChaCha8Rng, degree: usize, fiber: usize, freq: i32) -> FormField {
    let n = grid.dim();
    let active: Vec<usize> = (0..n).filter(|&a| grid.shape()[a] > 1).collect();
    let nc = combos(n, degree).len();
    let polys: Vec<TrigPoly> = (0..nc * fiber).map(|_| TrigPoly::random(rng, n, &active, freq, 3, 1.0)).collect();
    FormField::from_fn(grid, degree, fiber, |x, c, f| polys[c * fiber + f].eval(x))
}

fn random_omega(grid: &Arc<TorusGrid>, rng: &mut ChaCha8Rng, amp: f64) -> ConformalMetric {
    let active: Vec<usize> = (0..grid.dim()).filter(|&a| grid.shape()[a] > 1).collect();
    let w = TrigPoly::random(rng, grid.dim(), &active, 2, 3, amp);
    ConformalMetric::new(grid, grid.sample(|x| w.eval(x)))
}

fn random_connection(grid: &Arc<TorusGrid>, rng: &mut ChaCha8Rng, rank: usize, skew: bool, action: Action) -> ConnectionField {
    let n = grid.dim();
    let active: Vec<usize> = (0..n).filter(|&a| grid.shape()[a] > 1).collect();
    let entries = (0..n)
        .map(|_| {
            let mut e = vec![vec![0.0; grid.len()]; rank * rank];
            for i in 0..rank {
                for j in 0..rank {
                    if skew && j <= i {
                        continue;
                    }
                    let p = TrigPoly::random(rng, n, &active, 2, 3, 0.5);
                    e[i * rank + j] = grid.sample(|x| p.eval(x) + 0.2);
                    if skew {
                        e[j * rank + i] = e[i * rank + j].iter().map(|t| -t).collect();
                    }
                }
            }
            e
        })
        .collect();
    ConnectionField::new(grid, rank, action, entries).unwrap()
}

#[test]
fn d_of_constant_and_hand_example() {
    let grid = TorusGrid::cubic(4, 16);
    let c = FormField::scalar(&grid, vec![3.0; grid.len()]);
    assert!(exterior_d(&c).unwrap().sup_norm() < 1e-14);
    // d(sin x₁ dx²) = cos x₁ dx¹∧dx²
    let a = FormField::from_fn(&grid, 1, 1, |x, c, _| if c == 1 { x[0].sin() } else { 0.0 });
    let da = exterior_d(&a).unwrap();
    let expect = FormField::from_fn(&grid, 2, 1, |x, c, _| if c == 0 { x[0].cos() } else { 0.0 });
    assert!(da.sub(&expect).unwrap().sup_norm() < 1e-12);
}

#[test]
fn d_squared_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let grid = TorusGrid::cubic(4, 16);
    for k in 0..3 {
        let a = random_form(&grid, &mut rng, k, 1, 3);
        let dd = exterior_d(&exterior_d(&a).unwrap()).unwrap();
        assert!(dd.sup_norm() < 1e-11 * a.sup_norm().max(1.0), "k={k}");
    }
    let top = random_form(&grid, &mut rng, 4, 1, 2);
    assert!(exterior_d(&top).is_err());
}

#[test]
fn flat_laplacian_of_sine() {
    let grid = TorusGrid::cubic(4, 8);
    let f = FormField::scalar(&grid, grid.sample(|x| x[0].sin()));
    let m = ConformalMetric::flat(&grid);
    let lap = coderivative(&exterior_d(&f).unwrap(), &m).unwrap();
    assert!(lap.sub(&f).unwrap().sup_norm() < 1e-12);
    assert!(coderivative(&f, &m).is_err());
    let vol = FormField::constant(&grid, &Form::basis(4, &[0, 1, 2, 3]));
    assert!(coderivative(&vol, &m).unwrap().sup_norm() < 1e-14);
}

#[test]
fn quadrature_and_volume() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let grid = TorusGrid::cubic(4, 8);
    let flat = ConformalMetric::flat(&grid);
    assert!((integrate_density(&vec![1.0; grid.len()], &flat) - TAU.powi(4)).abs() < 1e-9);
    let m = random_omega(&grid, &mut rng, 0.3);
    let e4: Vec<f64> = m.weight(4.0);
    let direct = integrate_density(&vec![1.0; grid.len()], &m);
    assert!((direct - flat.grid().integrate(&e4)).abs() < 1e-10 * direct);
    // trig monomial below the resolution integrates to zero
    let f = grid.sample(|x| (3.0 * x[0] - 2.0 * x[3]).cos());
    assert!(grid.integrate(&f).abs() < 1e-12);
}

#[test]
fn coderivative_is_adjoint_of_d() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = TorusGrid::cubic(4, 16);
    let m = random_omega(&grid, &mut rng, 0.2);
    for k in 0..3 {
        let beta = random_form(&grid, &mut rng, k, 1, 2);
        let alpha = random_form(&grid, &mut rng, k + 1, 1, 2);
        let lhs = inner_product(&exterior_d(&beta).unwrap(), &alpha, &m).unwrap();
        let rhs = inner_product(&beta, &coderivative(&alpha, &m).unwrap(), &m).unwrap();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0), "k={k}: {lhs} vs {rhs}");
    }
}

#[test]
fn middle_degree_coderivative_scales() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = TorusGrid::cubic(4, 16);
    let m = random_omega(&grid, &mut rng, 0.3);
    let flat = ConformalMetric::flat(&grid);
    let beta = random_form(&grid, &mut rng, 2, 1, 2);
    let a = coderivative(&beta, &m).unwrap();
    let b = coderivative(&beta, &flat).unwrap().mul_function(&m.weight(-2.0));
    assert!(a.sub(&b).unwrap().sup_norm() < 1e-11);
}

#[test]
fn coupled_operators_reduce_and_satisfy_curvature_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let grid = TorusGrid::cubic(4, 16);
    let m = random_omega(&grid, &mut rng, 0.2);
    let s = random_form(&grid, &mut rng, 0, 2, 2);
    let trivial = ConnectionField::trivial(&grid, 2, Action::Fundamental);
    let m2 = random_form(&grid, &mut rng, 2, 4, 2);
    let triv_adj = trivial.with_action(Action::Adjoint);
    let a = coupled_delta(&m2, &m, &triv_adj).unwrap();
    assert!(a.sub(&coderivative(&m2, &m).unwrap()).unwrap().sup_norm() < 1e-14);
    assert!(coupled_d(&s, &trivial).unwrap().sub(&exterior_d(&s).unwrap()).unwrap().sup_norm() < 1e-14);

    let conn = random_connection(&grid, &mut rng, 2, false, Action::Fundamental);
    let f = conn.curvature();
    let dds = coupled_d(&coupled_d(&s, &conn).unwrap(), &conn).unwrap();
    // (F·s)_{ab,i} = F_{ab,ij} s_j
    let mut fs = FormField::zeros(&grid, 2, 2);
    for c in 0..6 {
        for i in 0..2 {
            let o = fs.comp_mut(c, i);
            for j in 0..2 {
                for p in 0..grid.len() {
                    o[p] += f.comp(c, i * 2 + j)[p] * s.comp(0, j)[p];
                }
            }
        }
    }
    assert!(dds.sub(&fs).unwrap().sup_norm() < 1e-9 * fs.sup_norm().max(1.0));

    let adj = conn.with_action(Action::Adjoint);
    let bianchi = coupled_d(&f, &adj).unwrap();
    assert!(bianchi.sup_norm() < 1e-8 * f.sup_norm());

    let conn = random_connection(&grid, &mut rng, 3, true, Action::Fundamental);
    let beta = random_form(&grid, &mut rng, 1, 3, 2);
    let alpha = random_form(&grid, &mut rng, 2, 3, 2);
    let lhs = inner_product(&coupled_d(&beta, &conn).unwrap(), &alpha, &m).unwrap();
    let rhs = inner_product(&beta, &coupled_delta(&alpha, &m, &conn).unwrap(), &m).unwrap();
    assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
}

#[test]
fn degenerate_axes_behave_as_constant_directions() {
    let grid = TorusGrid::new(&[8, 8, 1, 1]);
    let f = FormField::scalar(&grid, grid.sample(|x| (x[0] + 2.0 * x[1]).sin()));
    let df = exterior_d(&f).unwrap();
    assert!(df.comp(2, 0).iter().all(|&v| v == 0.0));
    assert!((grid.integrate(&vec![1.0; grid.len()]) - TAU.powi(4)).abs() < 1e-9);
}
