//! Conformal harmonics on `T⁴`, the quadratic forms `Θ_k` on cohomology, the
//! period subspace and the moment eigenproblem.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::formgrid::{coderivative, exterior_d, inner_product, FormField};
use crate::qops::{q_top, QContext};
use crate::tensor::combos;
use crate::{Error, Result};

/// Stopping rule for [`pcg`].
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500 }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖Ax − b‖ / ‖b‖` (absolute when `b = 0`).
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients for a symmetric positive
/// semi-definite `apply`, with `b` in its range.
pub fn pcg(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precondition: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    opts: SolverOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; b.len()];
    if bnorm == 0.0 {
        return Ok((x, SolveReport { iterations: 0, residual: 0.0 }));
    }
    let mut r = b.to_vec();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=opts.max_iter {
        let ap = apply(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = dot(&r, &r).sqrt() / bnorm;
        if res <= opts.tol {
            // recompute the true residual
            let ax = apply(&x);
            let true_res = ax.iter().zip(b).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt() / bnorm;
            return Ok((
                x,
                SolveReport {
                    iterations: it,
                    residual: true_res,
                },
            ));
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    let ax = apply(&x);
    let residual = ax.iter().zip(b).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt() / bnorm;
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// One harmonic representative per generator `dx^I` of `H^k(T⁴)`.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub degree: usize,
    pub forms: Vec<FormField>,
    /// Relative linear residual of each solve.
    pub solver_residuals: Vec<f64>,
    pub iterations: Vec<usize>,
    /// `‖δ^ĝQ^ĝξ_i‖_∞` of each representative.
    pub harmonic_residuals: Vec<f64>,
}

fn constant_form(ctx: &QContext, degree: usize, index: usize) -> FormField {
    FormField::from_fn(ctx.grid(), degree, 1, |_, c, _| if c == index { 1.0 } else { 0.0 })
}

/// `Q_k` for the two implemented degrees on `T⁴`: `Q₁ = dδ − 4P♯ + 2J` and
/// `Q₂ = 1`.
pub fn q_k(xi: &FormField, ctx: &QContext) -> Result<FormField> {
    match (ctx.dim(), xi.degree()) {
        (4, 1) => q_top(xi, ctx),
        (4, 2) => Ok(xi.clone()),
        (n, k) => Err(Error::Unsupported(format!("Q_k for k = {k} in dimension {n}"))),
    }
}

fn delta_q(xi: &FormField, ctx: &QContext) -> Result<FormField> {
    coderivative(&q_k(xi, ctx)?, ctx.metric())
}

/// Solves `δ^ĝQ_k^ĝ(dx^I + dθ) = 0` for every generator. For `k = 1` the
/// scalar equation is symmetric in the `ĝ` volume and is solved by PCG with
/// the inverse flat bi-Laplacian as preconditioner; for `k = 2` the constant
/// forms are already `ĝ`-harmonic.
pub fn conformal_harmonics(k: usize, ctx: &QContext, opts: SolverOptions) -> Result<HarmonicBasis> {
    if ctx.dim() != 4 || !(1..=2).contains(&k) {
        return Err(Error::Unsupported(format!("conformal harmonics for k = {k} in dimension {}", ctx.dim())));
    }
    let grid = ctx.grid().clone();
    let count = combos(4, k).len();
    let mut basis = HarmonicBasis {
        degree: k,
        forms: Vec::with_capacity(count),
        solver_residuals: Vec::with_capacity(count),
        iterations: Vec::with_capacity(count),
        harmonic_residuals: Vec::with_capacity(count),
    };
    let density = ctx.metric().weight(4.0);
    // the operator is symmetric on mean-free, fully resolved fields
    let project = |v: &[f64]| grid.apply_resolved_symbol(v, |k| if k.iter().all(|m| *m == 0) { 0.0 } else { 1.0 });
    for index in 0..count {
        let rep = constant_form(ctx, k, index);
        let (form, report) = if k == 1 {
            // B f = e^{4ω}δ̂Q̂df is symmetric in the flat L² product
            let apply = |f: &[f64]| -> Vec<f64> {
                let df = exterior_d(&FormField::scalar(&grid, f.to_vec())).expect("scalar");
                let out = delta_q(&df, ctx).expect("degree one").into_values();
                let v: Vec<f64> = out.iter().zip(&density).map(|(a, w)| a * w).collect();
                project(&v)
            };
            let b: Vec<f64> = delta_q(&rep, ctx)?
                .into_values()
                .iter()
                .zip(&density)
                .map(|(a, w)| -a * w)
                .collect();
            let b = project(&b);
            let precondition = |r: &[f64]| -> Vec<f64> {
                grid.apply_resolved_symbol(r, |k| {
                    let s: i64 = k.iter().map(|m| m * m).sum();
                    if s == 0 {
                        0.0
                    } else {
                        1.0 / (s * s) as f64
                    }
                })
            };
            let (f, report) = pcg(apply, precondition, &b, opts)?;
            let df = exterior_d(&FormField::scalar(&grid, f))?;
            (rep.add(&df)?, report)
        } else {
            (rep, SolveReport { iterations: 0, residual: 0.0 })
        };
        basis.harmonic_residuals.push(delta_q(&form, ctx)?.sup_norm());
        basis.solver_residuals.push(report.residual);
        basis.iterations.push(report.iterations);
        basis.forms.push(form);
    }
    Ok(basis)
}

/// `Θ_{ij} = ∫ ξ_i·Q_kη_j dv_ĝ`.
pub fn pairing_matrix(xs: &[FormField], ys: &[FormField], ctx: &QContext) -> Result<DMatrix<f64>> {
    let qy: Vec<FormField> = ys.iter().map(|y| q_k(y, ctx)).collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(xs.len(), ys.len());
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in qy.iter().enumerate() {
            m[(i, j)] = inner_product(x, y, ctx.metric())?;
        }
    }
    Ok(m)
}

/// `Θ_k` on the harmonic basis.
pub fn theta(basis: &HarmonicBasis, ctx: &QContext) -> Result<DMatrix<f64>> {
    pairing_matrix(&basis.forms, &basis.forms, ctx)
}

/// `ĝ`-Gram matrix `∫ ξ_i·ξ_j dv_ĝ`.
pub fn gram(basis: &HarmonicBasis, ctx: &QContext) -> Result<DMatrix<f64>> {
    let n = basis.forms.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = inner_product(&basis.forms[i], &basis.forms[j], ctx.metric())?;
        }
    }
    Ok(m)
}

/// The range of `φ ↦ ([φ], [Q_kφ])` in `H^k ⊕ H_k` on the harmonic basis.
#[derive(Debug, Clone)]
pub struct PeriodReport {
    pub degree: usize,
    pub dimension: usize,
    pub betti: usize,
    /// Rows: `[ξ_i]` in the basis `dx^I` of `H^k`.
    pub class_coords: DMatrix<f64>,
    /// Rows: `[Q_kξ_i]` in the basis of `H_k` dual to `dx^I`.
    pub dual_coords: DMatrix<f64>,
    /// `max_{ij} |Θ_{ij} − Θ_{ji}|`.
    pub isotropy_residual: f64,
    /// Largest value of the canonical pairing between two spanning vectors.
    pub symplectic_residual: f64,
}

/// Classes are read off by pairing against the constant forms `dx^I`: the
/// flat mean of `ξ_i` gives `[ξ_i]` and `∫ Q_kξ_i·dx^I dv_ĝ` gives the
/// dual coordinates of `[Q_kξ_i]`.
pub fn period_subspace(basis: &HarmonicBasis, ctx: &QContext) -> Result<PeriodReport> {
    let k = basis.degree;
    let count = combos(4, k).len();
    let generators: Vec<FormField> = (0..count).map(|i| constant_form(ctx, k, i)).collect();
    let grid = ctx.grid();
    let b = basis.forms.len();
    let mut class_coords = DMatrix::zeros(b, count);
    for (i, xi) in basis.forms.iter().enumerate() {
        for j in 0..count {
            class_coords[(i, j)] = grid.integrate(xi.comp(j, 0)) / grid.volume();
        }
    }
    let dual_coords = pairing_matrix(&generators, &basis.forms, ctx)?.transpose();
    let th = theta(basis, ctx)?;
    let isotropy_residual = (&th - th.transpose()).amax();
    // ⟨(a, α), (b, β)⟩ = α(b) − β(a)
    let cross = &dual_coords * class_coords.transpose();
    let symplectic_residual = (&cross - cross.transpose()).amax();
    let mut stacked = DMatrix::zeros(b, 2 * count);
    stacked.view_mut((0, 0), (b, count)).copy_from(&class_coords);
    stacked.view_mut((0, count), (b, count)).copy_from(&dual_coords);
    let sv = stacked.singular_values();
    let top = sv.max();
    let dimension = sv.iter().filter(|s| **s > 1e-8 * top.max(1.0)).count();
    Ok(PeriodReport {
        degree: k,
        dimension,
        betti: count,
        class_coords,
        dual_coords,
        isotropy_residual,
        symplectic_residual,
    })
}

/// Solution of `Θv = λGv`.
#[derive(Debug, Clone)]
pub struct MomentEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are `G`-orthonormal eigenvectors.
    pub vectors: DMatrix<f64>,
    pub gram_min_eigenvalue: f64,
}

/// Generalized symmetric eigenproblem through the Cholesky factor of `G`.
pub fn moments_eigen(theta: &DMatrix<f64>, gram: &DMatrix<f64>) -> Result<MomentEigen> {
    let sym_theta = (theta + theta.transpose()) * 0.5;
    let sym_gram = (gram + gram.transpose()) * 0.5;
    let gram_min_eigenvalue = SymmetricEigen::new(sym_gram.clone()).eigenvalues.min();
    if gram_min_eigenvalue <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let chol = sym_gram.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let m = &l_inv * sym_theta * l_inv.transpose();
    let eig = SymmetricEigen::new((&m + m.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let back = l_inv.transpose();
    let mut vectors = DMatrix::zeros(m.nrows(), m.ncols());
    for (c, &i) in order.iter().enumerate() {
        let v: DVector<f64> = &back * eig.eigenvectors.column(i);
        vectors.set_column(c, &v);
    }
    Ok(MomentEigen {
        values,
        vectors,
        gram_min_eigenvalue,
    })
}
