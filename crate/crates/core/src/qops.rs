//! Q-operators `Q_{n/2−1} = dδ − 4P♯ + 2J` on conformally flat tori, their
//! coupled versions, the `Q_{ξ,η}` densities with their operators `L_{ξ,η}`,
//! the contraction-formed operator on one-forms in dimension four, and a
//! pointwise jet evaluation for arbitrary metrics.

use std::sync::Arc;

use crate::charforms::{pontrjagin_one_jets, JetForm};
use crate::formgrid::{
    coderivative, coupled_d, coupled_delta, exterior_d, pointwise_dot, ConformalMetric, ConnectionField, FormField,
    TorusGrid,
};
use crate::jet::{Jet, JetSpace};
use crate::metrics::{pack_from_jets, CurvatureJets, MetricJet, MetricSpec};
use crate::tensor::{combos, form_dot, permutation_sign, sharp_action_raw, Form};
use crate::{Error, Result};

/// A conformally flat torus scale `ĝ = e^{2ω}δ` with its Schouten tensor
/// and `J` sampled at every node.
#[derive(Debug, Clone)]
pub struct QContext {
    metric: ConformalMetric,
    schouten: Vec<Vec<f64>>,
    j: Vec<f64>,
}

impl QContext {
    pub fn new(metric: ConformalMetric) -> Self {
        let schouten = metric.schouten();
        let j = metric.j(&schouten);
        Self { metric, schouten, j }
    }

    pub fn from_omega(grid: &Arc<TorusGrid>, omega: Vec<f64>) -> Self {
        Self::new(ConformalMetric::new(grid, omega))
    }

    pub fn flat(grid: &Arc<TorusGrid>) -> Self {
        Self::new(ConformalMetric::flat(grid))
    }

    pub fn metric(&self) -> &ConformalMetric {
        &self.metric
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.metric.grid()
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn omega(&self) -> &[f64] {
        self.metric.omega()
    }

    /// Coordinate components `P_{ab}`, indexed `[a * n + b]`.
    pub fn schouten(&self) -> &[Vec<f64>] {
        &self.schouten
    }

    pub fn j(&self) -> &[f64] {
        &self.j
    }

    /// Largest deviation of `J − ĝ^{ab}P_{ab}` over the nodes.
    pub fn trace_defect(&self) -> f64 {
        let n = self.dim();
        let w = self.metric.weight(-2.0);
        (0..self.grid().len())
            .map(|i| {
                let tr: f64 = (0..n).map(|a| self.schouten[a * n + a][i]).sum();
                (self.j[i] - w[i] * tr).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Derivation action of `P♯`, `P^b{}_a = ĝ^{bc}P_{ca}`, on every fiber
    /// slot.
    pub fn sharp(&self, alpha: &FormField) -> FormField {
        let n = self.dim();
        let k = alpha.degree();
        let cc = combos(n, k);
        let w = self.metric.weight(-2.0);
        let mut out = FormField::zeros(self.grid(), k, alpha.fiber());
        let mut idx = vec![0; k];
        let mut sorted = vec![0; k];
        for (o, target) in cc.list.iter().enumerate() {
            for s in 0..k {
                for b in 0..n {
                    idx.copy_from_slice(target);
                    idx[s] = b;
                    if b != target[s] && target.contains(&b) {
                        continue;
                    }
                    sorted.copy_from_slice(&idx);
                    sorted.sort_unstable();
                    let sign = permutation_sign(&idx);
                    let src = cc.index(&sorted);
                    let e = &self.schouten[target[s] * n + b];
                    for slot in 0..alpha.fiber() {
                        let input = alpha.comp(src, slot);
                        let dst = out.comp_mut(o, slot);
                        for i in 0..dst.len() {
                            dst[i] += sign * w[i] * e[i] * input[i];
                        }
                    }
                }
            }
        }
        out
    }

    fn zeroth_order(&self, kappa: &FormField) -> FormField {
        let mut out = self.sharp(kappa).scale(-4.0);
        out.axpy(2.0, &kappa.mul_function(&self.j)).expect("same shape");
        out
    }
}

fn check_top_degree(kappa: &FormField) -> Result<()> {
    let n = kappa.dim();
    if n % 2 != 0 || n < 2 || kappa.degree() != n / 2 - 1 {
        return Err(Error::DegreeMismatch {
            left: kappa.degree(),
            right: n / 2 - 1,
        });
    }
    Ok(())
}

fn closedness_tolerance(kappa: &FormField) -> f64 {
    let nmax = kappa.grid().shape().iter().copied().max().unwrap_or(1) as f64;
    1e-9 * (1.0 + kappa.sup_norm()) * nmax
}

fn check_closed(kappa: &FormField, conn: Option<&ConnectionField>) -> Result<()> {
    let d = match conn {
        Some(c) => coupled_d(kappa, c)?,
        None => exterior_d(kappa)?,
    };
    let residual = d.sup_norm();
    if residual > closedness_tolerance(kappa) {
        return Err(Error::NotClosed { residual });
    }
    Ok(())
}

/// `Q_{n/2−1}κ = dδκ − 4P♯κ + 2Jκ`.
pub fn q_top(kappa: &FormField, ctx: &QContext) -> Result<FormField> {
    check_top_degree(kappa)?;
    let dd = exterior_d(&coderivative(kappa, ctx.metric())?)?;
    dd.add(&ctx.zeroth_order(kappa))
}

/// `d^Dδ^Dκ − 4P♯κ + 2Jκ` for bundle-valued `κ`.
pub fn q_top_coupled(kappa: &FormField, conn: &ConnectionField, ctx: &QContext) -> Result<FormField> {
    check_top_degree(kappa)?;
    let dd = coupled_d(&coupled_delta(kappa, ctx.metric(), conn)?, conn)?;
    dd.add(&ctx.zeroth_order(kappa))
}

fn log_ratio(base: &QContext, target: &QContext) -> Result<Vec<f64>> {
    if **base.grid() != **target.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(target.omega().iter().zip(base.omega()).map(|(a, b)| a - b).collect())
}

/// `‖e^{2ω}Q^{ĝ}κ − Q^gκ − 2δ^g d(ωκ)‖_∞` for closed `κ`, where
/// `ĝ = e^{2ω}g`.
pub fn q_transform_residual(kappa: &FormField, base: &QContext, target: &QContext) -> Result<f64> {
    check_top_degree(kappa)?;
    check_closed(kappa, None)?;
    let omega = log_ratio(base, target)?;
    let weight: Vec<f64> = omega.iter().map(|w| (2.0 * w).exp()).collect();
    let hat = q_top(kappa, target)?.mul_function(&weight);
    let plain = q_top(kappa, base)?;
    let correction = coderivative(&exterior_d(&kappa.mul_function(&omega))?, base.metric())?;
    let mut r = hat.sub(&plain)?;
    r.axpy(-2.0, &correction)?;
    Ok(r.sup_norm())
}

/// Coupled analogue of [`q_transform_residual`] with `δ^D d^D`.
pub fn q_coupled_transform_residual(
    kappa: &FormField,
    conn: &ConnectionField,
    base: &QContext,
    target: &QContext,
) -> Result<f64> {
    check_top_degree(kappa)?;
    check_closed(kappa, Some(conn))?;
    let omega = log_ratio(base, target)?;
    let weight: Vec<f64> = omega.iter().map(|w| (2.0 * w).exp()).collect();
    let hat = q_top_coupled(kappa, conn, target)?.mul_function(&weight);
    let plain = q_top_coupled(kappa, conn, base)?;
    let correction = coupled_delta(&coupled_d(&kappa.mul_function(&omega), conn)?, base.metric(), conn)?;
    let mut r = hat.sub(&plain)?;
    r.axpy(-2.0, &correction)?;
    Ok(r.sup_norm())
}

fn check_pair(xi: &FormField, eta: &FormField) -> Result<()> {
    check_top_degree(xi)?;
    check_top_degree(eta)?;
    check_closed(xi, None)?;
    check_closed(eta, None)
}

/// `Q_{ξ,η} = ½(ξ·Q η + η·Q ξ)`, a density in the trivialization of `ctx`.
pub fn q_pair_density(xi: &FormField, eta: &FormField, ctx: &QContext) -> Result<Vec<f64>> {
    check_pair(xi, eta)?;
    let a = pointwise_dot(xi, &q_top(eta, ctx)?, ctx.metric())?;
    let b = pointwise_dot(eta, &q_top(xi, ctx)?, ctx.metric())?;
    Ok(a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect())
}

/// `L_{ξ,η}f = ξ·δd(fη) + η·δd(fξ)`, so that
/// `e^{nω}Q^{ĝ}_{ξ,η} = Q^g_{ξ,η} + L_{ξ,η}ω`.
pub fn l_pair(xi: &FormField, eta: &FormField, f: &[f64], ctx: &QContext) -> Result<Vec<f64>> {
    check_pair(xi, eta)?;
    let m = ctx.metric();
    let a = pointwise_dot(xi, &coderivative(&exterior_d(&eta.mul_function(f))?, m)?, m)?;
    let b = pointwise_dot(eta, &coderivative(&exterior_d(&xi.mul_function(f))?, m)?, m)?;
    Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect())
}

/// Contraction of `Q_2 = 1` on two-forms in dimension four against closed
/// one-forms, acting on one-forms:
/// `ρ ↦ (ξ·η)ρ − ½((ξ·ρ)η + (η·ρ)ξ)`.
pub fn q_contraction_former(
    xi: &FormField,
    eta: &FormField,
    rho: &FormField,
    ctx: &QContext,
    ell: usize,
) -> Result<FormField> {
    let n = ctx.dim();
    if n != 4 || ell != 1 || xi.degree() != 1 || eta.degree() != 1 || rho.degree() != 1 {
        return Err(Error::Unsupported(format!(
            "contraction former implemented for n = 4, k = 2, ℓ = 1 (got n = {n}, ℓ = {ell})"
        )));
    }
    check_closed(xi, None)?;
    check_closed(eta, None)?;
    let m = ctx.metric();
    let xe = pointwise_dot(xi, eta, m)?;
    let xr = pointwise_dot(xi, rho, m)?;
    let er = pointwise_dot(eta, rho, m)?;
    let mut out = rho.mul_function(&xe);
    out.axpy(-0.5, &eta.mul_function(&xr))?;
    out.axpy(-0.5, &xi.mul_function(&er))?;
    Ok(out)
}

type JetComps = Vec<Jet>;

fn form_entry(comps: &JetComps, n: usize, idx: &[usize]) -> Option<(f64, usize)> {
    let mut sorted = idx.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    let c = combos(n, idx.len());
    debug_assert_eq!(c.len(), comps.len());
    Some((permutation_sign(idx), c.index(&sorted)))
}

/// Codifferential `(δκ)_B = −g^{ae}∇_eκ_{aB}` of a jet form, one order lower.
fn jet_codifferential(kappa: &JetForm, g_inv: &[Jet], gamma: &[Jet]) -> JetForm {
    let n = kappa.dim;
    let k = kappa.degree;
    let out_c = combos(n, k - 1);
    let order = kappa.comps[0].order().min(gamma[0].order() + 1) - 1;
    let space = kappa.comps[0].space().clone();
    let comps = &kappa.comps;
    let term = |e: usize, idx: &[usize]| -> Jet {
        // ∇_e κ_idx
        let mut acc = match form_entry(comps, n, idx) {
            Some((s, j)) => comps[j].derivative(e).truncate(order).scale(s),
            None => Jet::zero(&space, order),
        };
        let mut moved = idx.to_vec();
        for slot in 0..k {
            for f in 0..n {
                moved[slot] = f;
                if let Some((s, j)) = form_entry(comps, n, &moved) {
                    let t = &gamma[(f * n + e) * n + idx[slot]] * &comps[j].truncate(order);
                    acc.axpy(-s, &t.truncate(order));
                }
            }
            moved[slot] = idx[slot];
        }
        acc
    };
    let out = out_c
        .list
        .iter()
        .map(|b| {
            let mut total = Jet::zero(&space, order);
            let mut idx = vec![0; k];
            idx[1..].copy_from_slice(b);
            for a in 0..n {
                if b.contains(&a) {
                    continue;
                }
                idx[0] = a;
                for e in 0..n {
                    let ginv = &g_inv[a * n + e];
                    if ginv.is_zero() {
                        continue;
                    }
                    let t = ginv.truncate(order) * term(e, &idx);
                    total.axpy(-1.0, &t);
                }
            }
            total
        })
        .collect();
    JetForm {
        dim: n,
        degree: k - 1,
        comps: out,
    }
}

/// Value of `dβ` at the base point for a jet form of order at least one.
fn jet_exterior_d_value(beta: &JetForm) -> Form {
    let n = beta.dim;
    let k = beta.degree + 1;
    let c = combos(n, k);
    let lower = combos(n, beta.degree);
    let mut out = Form::zero(n, k);
    let mut rest = Vec::with_capacity(k - 1);
    for (o, idx) in c.list.iter().enumerate() {
        let mut acc = 0.0;
        for (j, &a) in idx.iter().enumerate() {
            rest.clear();
            rest.extend(idx.iter().copied().filter(|&x| x != a));
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let mut e = vec![0u8; n];
            e[a] = 1;
            acc += sign * beta.comps[lower.index(&rest)].partial(&e);
        }
        out.comps_mut()[o] = acc;
    }
    out
}

/// `Q_{n/2−1}κ` at the base point of a metric jet, with `κ` given as a jet
/// form of degree `n/2 − 1`. The metric jet needs order two and `κ` order
/// two for the second derivatives in `dδκ`.
pub fn pointwise_q_top(jet: &MetricJet, kappa: &JetForm) -> Result<Form> {
    let n = jet.dim();
    if n % 2 != 0 || kappa.dim != n || kappa.degree + 1 != n / 2 {
        return Err(Error::DegreeMismatch {
            left: kappa.degree,
            right: n / 2 - 1,
        });
    }
    let k_order = kappa.comps[0].order();
    if jet.order() < 2 || k_order < 2 {
        return Err(Error::InsufficientJetOrder {
            needed: 2,
            have: jet.order().min(k_order),
        });
    }
    let cj = CurvatureJets::compute(jet, 0)?;
    let pack = pack_from_jets(&cj, jet);
    let delta = jet_codifferential(kappa, &cj.g_inv, &cj.gamma);
    let dd = jet_exterior_d_value(&delta);
    let value = kappa.value();
    let e = pack.schouten_endomorphism();
    let sharp = sharp_action_raw(e.data(), &value);
    let mut out = dd;
    for ((o, s), v) in out.comps_mut().iter_mut().zip(sharp.comps()).zip(value.comps()) {
        *o += -4.0 * s + 2.0 * pack.j * v;
    }
    Ok(out)
}

/// Pointwise data of `Q₄κ` on `CP² × N⁶` for the Pontrjagin form `κ` of the
/// first factor, where `N⁶` is flat (`ν = 0`) or a round sphere of scalar
/// curvature `ν`.
#[derive(Debug, Clone)]
pub struct ProductEigen {
    pub nu: f64,
    pub expected: f64,
    /// `⟨Q₄κ, κ⟩ / |κ|²`.
    pub lambda: f64,
    /// `sup|Q₄κ − expected·κ| / sup|κ|`.
    pub residual: f64,
    /// `κ·Q₄κ`.
    pub density: f64,
    pub kappa_norm_sq: f64,
}

/// The factor `N⁶` of scalar curvature `ν ≥ 0`.
pub fn six_factor(nu: f64) -> MetricSpec {
    if nu == 0.0 {
        MetricSpec::FlatTorus { dim: 6 }
    } else {
        MetricSpec::RoundSphere {
            dim: 6,
            radius: (30.0 / nu).sqrt(),
        }
    }
}

/// Evaluates `Q₄κ` at a point of `CP² × N⁶`; `point` has ten coordinates.
pub fn cp2_product_eigen(nu: f64, point: &[f64]) -> Result<ProductEigen> {
    if point.len() != 10 {
        return Err(Error::DimensionMismatch {
            expected: 10,
            got: point.len(),
        });
    }
    let cp2 = MetricSpec::FubiniStudyCp2.jet(&point[..4], 4)?;
    let kappa4 = pontrjagin_one_jets(&CurvatureJets::compute(&cp2, 0)?);
    let product = MetricSpec::product(MetricSpec::FubiniStudyCp2, six_factor(nu));
    let space: Arc<JetSpace> = JetSpace::new(10, 2);
    let jet = product.jet_in(&space, point)?;
    let kappa = kappa4.embed(&space, &[0, 1, 2, 3], 10);
    let q = pointwise_q_top(&jet, &kappa)?;
    let value = kappa.value();
    let m = jet.at_point();
    let kappa_norm_sq = form_dot(&value, &value, &m)?;
    let density = form_dot(&value, &q, &m)?;
    let expected = 2.0 * (nu - 30.0) / 9.0;
    let diff = q.sub(&value.scale(expected))?;
    Ok(ProductEigen {
        nu,
        expected,
        lambda: density / kappa_norm_sq,
        residual: diff.sup_norm() / value.sup_norm(),
        density,
        kappa_norm_sq,
    })
}
