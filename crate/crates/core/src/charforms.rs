//! Chern–Weil layer: invariant polynomials of endomorphism-valued forms,
//! Pontrjagin character forms, the standard tractor connection and its
//! curvature, and the dimension-6 tractor invariant.
//!
//! Tractors are written in the splitting `(σ, μ_b, ρ)` determined by the
//! working scale, with metric `h = σρ' + ρσ' + g^{bc}μ_b μ'_c` and connection
//! `∇_a(σ, μ_b, ρ) = (∇_aσ − μ_a, ∇_aμ_b + g_{ab}ρ + P_{ab}σ, ∇_aρ − P_a{}^b μ_b)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::metrics::{CurvatureJets, CurvaturePack, Dim4Specials, MetricJet};
use crate::tensor::{combos, form_dot, Form, MetricAtPoint, TensorPoint};

/// A square matrix whose entries are `p`-forms at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct EndoFormMatrix {
    rank: usize,
    dim: usize,
    degree: usize,
    entries: Vec<Form>,
}

impl EndoFormMatrix {
    pub fn zero(rank: usize, dim: usize, degree: usize) -> Self {
        Self {
            rank,
            dim,
            degree,
            entries: vec![Form::zero(dim, degree); rank * rank],
        }
    }

    pub fn from_fn(rank: usize, dim: usize, degree: usize, mut f: impl FnMut(usize, usize) -> Form) -> Self {
        let entries = (0..rank * rank).map(|k| f(k / rank, k % rank)).collect();
        Self {
            rank,
            dim,
            degree,
            entries,
        }
    }

    /// `F^a{}_b = g^{ae} T_{ebcd}` viewed as 2-forms in `cd`.
    pub fn from_curvature(t: &TensorPoint, m: &MetricAtPoint) -> Self {
        let n = m.dim();
        let gi = m.g_inv();
        let pairs = combos(n, 2);
        Self::from_fn(n, n, 2, |a, b| {
            let comps = pairs
                .list
                .iter()
                .map(|cd| (0..n).map(|e| gi[a * n + e] * t.get(&[e, b, cd[0], cd[1]])).sum())
                .collect();
            Form::from_comps(n, 2, comps).expect("size")
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, i: usize, j: usize) -> &Form {
        &self.entries[i * self.rank + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: Form) {
        self.entries[i * self.rank + j] = f;
    }

    /// Matrix product with entries multiplied by the wedge product.
    pub fn wedge_mul(&self, other: &EndoFormMatrix) -> EndoFormMatrix {
        let r = self.rank;
        Self::from_fn(r, self.dim, self.degree + other.degree, |i, j| {
            let mut acc = Form::zero(self.dim, self.degree + other.degree);
            for k in 0..r {
                let w = self.get(i, k).wedge(other.get(k, j));
                for (a, b) in acc.comps_mut().iter_mut().zip(w.comps()) {
                    *a += b;
                }
            }
            acc
        })
    }

    pub fn trace(&self) -> Form {
        let mut acc = Form::zero(self.dim, self.degree);
        for i in 0..self.rank {
            for (a, b) in acc.comps_mut().iter_mut().zip(self.get(i, i).comps()) {
                *a += b;
            }
        }
        acc
    }

    /// `G F G⁻¹` for a constant matrix `G` (row-major) with inverse `g_inv`.
    pub fn conjugate(&self, g: &[f64], g_inv: &[f64]) -> EndoFormMatrix {
        self.left_mul(g).right_mul(g_inv)
    }

    /// `M F` for a constant matrix `M`.
    pub fn left_mul(&self, m: &[f64]) -> EndoFormMatrix {
        let r = self.rank;
        Self::from_fn(r, self.dim, self.degree, |i, j| {
            let mut acc = Form::zero(self.dim, self.degree);
            for k in 0..r {
                let c = m[i * r + k];
                for (a, b) in acc.comps_mut().iter_mut().zip(self.get(k, j).comps()) {
                    *a += c * b;
                }
            }
            acc
        })
    }

    /// `F M` for a constant matrix `M`.
    pub fn right_mul(&self, m: &[f64]) -> EndoFormMatrix {
        let r = self.rank;
        Self::from_fn(r, self.dim, self.degree, |i, j| {
            let mut acc = Form::zero(self.dim, self.degree);
            for k in 0..r {
                let c = m[k * r + j];
                for (a, b) in acc.comps_mut().iter_mut().zip(self.get(i, k).comps()) {
                    *a += c * b;
                }
            }
            acc
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.entries.iter().map(Form::sup_norm).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &EndoFormMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .flat_map(|(a, b)| a.comps().iter().zip(b.comps()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Sup norm of the part of `h F` that fails to be skew, i.e. of
    /// `h F + (h F)ᵀ`.
    pub fn skew_defect(&self, h: &[f64]) -> f64 {
        let low = self.left_mul(h);
        let r = self.rank;
        let mut worst: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                for (a, b) in low.get(i, j).comps().iter().zip(low.get(j, i).comps()) {
                    worst = worst.max((a + b).abs());
                }
            }
        }
        worst
    }
}

/// `s_k(F) = Tr(F ∧ ⋯ ∧ F)` with `k` factors.
pub fn invariant_s(f: &EndoFormMatrix, k: usize) -> Result<Form> {
    if f.degree % 2 == 1 {
        return Err(Error::OddDegree(f.degree));
    }
    if k == 0 {
        return Ok(Form::from_comps(f.dim, 0, vec![f.rank as f64])?);
    }
    if k * f.degree > f.dim {
        return Err(Error::DegreeOutOfRange {
            degree: k * f.degree,
            dim: f.dim,
        });
    }
    let mut power = f.clone();
    for _ in 1..k {
        power = power.wedge_mul(f);
    }
    Ok(power.trace())
}

/// Which curvature feeds the Chern–Weil construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureSource {
    Riemann,
    Weyl,
}

/// `p_k = (1/(2k)!) s_{2k}(−F/2πi) = ((−1)^k / ((2k)! (2π)^{2k})) s_{2k}(F)`.
pub fn pontrjagin_of(f: &EndoFormMatrix, k: usize) -> Result<Form> {
    let s = invariant_s(f, 2 * k)?;
    let fact: f64 = (1..=2 * k).map(|j| j as f64).product();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Ok(s.scale(sign / (fact * (2.0 * PI).powi(2 * k as i32))))
}

pub fn pontrjagin_form(pack: &CurvaturePack, k: usize, source: CurvatureSource) -> Result<Form> {
    let n = pack.dim();
    if 4 * k > n {
        return Err(Error::DegreeOutOfRange { degree: 4 * k, dim: n });
    }
    let t = match source {
        CurvatureSource::Riemann => &pack.riemann,
        CurvatureSource::Weyl => &pack.weyl,
    };
    pontrjagin_of(&EndoFormMatrix::from_curvature(t, &pack.metric), k)
}

/// Sup-norm difference between `p₁` and `(|C₊|² − |C₋|²)/(96π²)` times the
/// volume form, in dimension 4.
pub fn pontclaim_check(pack: &CurvaturePack, specials: &Dim4Specials) -> Result<f64> {
    let p1 = pontrjagin_form(pack, 1, CurvatureSource::Riemann)?;
    let vol = pack.metric.volume_form();
    let expected = vol.scale((specials.weyl_plus_sq - specials.weyl_minus_sq) / (96.0 * PI * PI));
    Ok(p1.sub(&expected)?.sup_norm())
}

/// A form whose components (increasing multi-indices) are jets.
#[derive(Debug, Clone)]
pub struct JetForm {
    pub dim: usize,
    pub degree: usize,
    pub comps: Vec<Jet>,
}

impl JetForm {
    pub fn wedge(&self, other: &JetForm) -> JetForm {
        let n = self.dim;
        let k = self.degree + other.degree;
        let cc = combos(n, k);
        let order = self.comps[0].order().min(other.comps[0].order());
        let zero = Jet::zero(self.comps[0].space(), order);
        let mut comps = vec![zero; cc.len()];
        if k <= n {
            let ca = combos(n, self.degree);
            let cb = combos(n, other.degree);
            for (i, a) in ca.list.iter().enumerate() {
                if self.comps[i].is_zero() {
                    continue;
                }
                let ma = crate::tensor::mask_of(a);
                for (j, b) in cb.list.iter().enumerate() {
                    let mb = crate::tensor::mask_of(b);
                    if ma & mb != 0 || other.comps[j].is_zero() {
                        continue;
                    }
                    let s = crate::tensor::merge_sign(a, b);
                    let t = &self.comps[i] * &other.comps[j];
                    comps[cc.index_of_mask(ma | mb)].axpy(s, &t);
                }
            }
        }
        JetForm { dim: n, degree: k, comps }
    }

    pub fn value(&self) -> Form {
        Form::from_comps(self.dim, self.degree, self.comps.iter().map(Jet::value).collect()).expect("size")
    }

    /// Re-expands the components in a larger jet space, sending variable
    /// `i` to `var_map[i]`; form indices move the same way.
    pub fn embed(&self, target: &std::sync::Arc<crate::jet::JetSpace>, var_map: &[usize], new_dim: usize) -> JetForm {
        let src = combos(self.dim, self.degree);
        let dst = combos(new_dim, self.degree);
        let order = self.comps[0].order().min(target.order());
        let mut comps = vec![Jet::zero(target, order); dst.len()];
        for (i, idx) in src.list.iter().enumerate() {
            let mapped: Vec<usize> = idx.iter().map(|&a| var_map[a]).collect();
            let mut sorted = mapped.clone();
            sorted.sort_unstable();
            let sign = crate::tensor::permutation_sign(&mapped);
            comps[dst.index(&sorted)] = self.comps[i].truncate(order).embed(target, var_map).scale(sign);
        }
        JetForm {
            dim: new_dim,
            degree: self.degree,
            comps,
        }
    }
}

/// `p₁ = −Tr(R∧R)/8π²` with jet components, from the Riemann jets.
pub fn pontrjagin_one_jets(cj: &CurvatureJets) -> JetForm {
    let n = cj.dim;
    let pairs = combos(n, 2);
    // R^a{}_b as jet 2-forms
    let order = cj.riemann.order();
    let space = cj.g[0].space().clone();
    let r_form = |a: usize, b: usize| -> JetForm {
        let comps = pairs
            .list
            .iter()
            .map(|cd| {
                let mut acc = Jet::zero(&space, order);
                for e in 0..n {
                    acc.add_product(&cj.g_inv[a * n + e], cj.riemann.get(&[e, b, cd[0], cd[1]]));
                }
                acc
            })
            .collect();
        JetForm { dim: n, degree: 2, comps }
    };
    let forms: Vec<JetForm> = (0..n * n).map(|k| r_form(k / n, k % n)).collect();
    let c4 = combos(n, 4);
    let mut total = JetForm {
        dim: n,
        degree: 4,
        comps: vec![Jet::zero(&space, order); c4.len()],
    };
    for a in 0..n {
        for b in 0..n {
            let w = forms[a * n + b].wedge(&forms[b * n + a]);
            for (x, y) in total.comps.iter_mut().zip(&w.comps) {
                x.axpy(-1.0 / (8.0 * PI * PI), y);
            }
        }
    }
    total
}

/// Frame index of `σ`, `μ_b` and `ρ` in tractor matrices.
pub fn tractor_sigma() -> usize {
    0
}

pub fn tractor_mu(b: usize) -> usize {
    1 + b
}

pub fn tractor_rho(n: usize) -> usize {
    n + 1
}

/// Tractor metric in the splitting.
pub fn tractor_metric(m: &MetricAtPoint) -> Vec<f64> {
    let n = m.dim();
    let r = n + 2;
    let mut h = vec![0.0; r * r];
    h[tractor_rho(n)] = 1.0;
    h[tractor_rho(n) * r] = 1.0;
    for b in 0..n {
        for c in 0..n {
            h[tractor_mu(b) * r + tractor_mu(c)] = m.g_inv()[b * n + c];
        }
    }
    h
}

#[derive(Debug, Clone)]
pub struct TractorPack {
    pub dim: usize,
    pub h: Vec<f64>,
    /// `A_a` values at the point, one `(n+2)²` matrix per direction.
    pub connection: Vec<Vec<f64>>,
    pub omega: EndoFormMatrix,
}

type JetMat = Vec<Jet>;

fn jm_mul_acc(out: &mut JetMat, a: &JetMat, b: &JetMat, r: usize, s: f64) {
    let nz_b: Vec<bool> = b.iter().map(|x| !x.is_zero()).collect();
    for i in 0..r {
        for k in 0..r {
            let aik = &a[i * r + k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..r {
                if !nz_b[k * r + j] {
                    continue;
                }
                let t = aik * &b[k * r + j];
                out[i * r + j].axpy(s, &t);
            }
        }
    }
}

fn jm_commutator_acc(out: &mut JetMat, a: &JetMat, b: &JetMat, r: usize, s: f64) {
    jm_mul_acc(out, a, b, r, s);
    jm_mul_acc(out, b, a, r, -s);
}

/// The connection matrices `A_a` (as jets) with `∇_a T = ∂_a T + A_a T`.
pub fn tractor_connection_jets(cj: &CurvatureJets) -> Result<Vec<JetMat>> {
    let n = cj.dim;
    let p = cj
        .schouten
        .as_ref()
        .ok_or_else(|| Error::Unsupported("tractor connection needs n ≥ 3".into()))?;
    let r = n + 2;
    let space = cj.g[0].space().clone();
    let order = p.order();
    let zero = Jet::zero(&space, order);
    let rho = tractor_rho(n);
    let mut p_up = vec![zero.clone(); n * n];
    for c in 0..n {
        for a in 0..n {
            let mut acc = zero.clone();
            for e in 0..n {
                acc.add_product(&cj.g_inv[c * n + e], p.get(&[e, a]));
            }
            p_up[c * n + a] = acc;
        }
    }
    Ok((0..n)
        .map(|a| {
            let mut m = vec![zero.clone(); r * r];
            m[tractor_mu(a)] = Jet::constant(&space, order, -1.0);
            for b in 0..n {
                let row = tractor_mu(b) * r;
                m[row] = p.get(&[a, b]).clone();
                for c in 0..n {
                    m[row + tractor_mu(c)] = -&cj.gamma[(c * n + a) * n + b];
                }
                m[row + rho] = cj.g[a * n + b].truncate(order);
                // ρ row: −P_a{}^c
                m[rho * r + tractor_mu(b)] = -&p_up[b * n + a];
            }
            m
        })
        .collect())
}

/// `Ω_{ab} = ∂_a A_b − ∂_b A_a + [A_a, A_b]` as jets, for `a < b` in
/// combination order.
pub fn tractor_curvature_jets(conn: &[JetMat]) -> Vec<JetMat> {
    let n = conn.len();
    let r = n + 2;
    combos(n, 2)
        .list
        .iter()
        .map(|ab| {
            let (a, b) = (ab[0], ab[1]);
            let mut f: JetMat = (0..r * r)
                .map(|k| &conn[b][k].derivative(a) - &conn[a][k].derivative(b))
                .collect();
            jm_commutator_acc(&mut f, &conn[a], &conn[b], r, 1.0);
            f
        })
        .collect()
}

fn endo_from_pair_jets(pairs: &[JetMat], n: usize) -> EndoFormMatrix {
    let r = n + 2;
    EndoFormMatrix::from_fn(r, n, 2, |i, j| {
        let comps = pairs.iter().map(|m| m[i * r + j].value()).collect();
        Form::from_comps(n, 2, comps).expect("size")
    })
}

/// Tractor curvature from the commutator of the connection.
pub fn tractor_curvature(jet: &MetricJet) -> Result<TractorPack> {
    if jet.order() < 3 {
        return Err(Error::InsufficientJetOrder {
            needed: 3,
            have: jet.order(),
        });
    }
    let cj = CurvatureJets::compute(jet, 0)?;
    let conn = tractor_connection_jets(&cj)?;
    let omega = endo_from_pair_jets(&tractor_curvature_jets(&conn), jet.dim());
    let m = jet.at_point();
    Ok(TractorPack {
        dim: jet.dim(),
        h: tractor_metric(&m),
        connection: conn.iter().map(|a| a.iter().map(Jet::value).collect()).collect(),
        omega,
    })
}

/// The closed-form tractor curvature: Weyl in the middle block and
/// `2∇_{[a}P_{b]c}` in the off blocks. `sigma_sign` multiplies the block
/// taking `σ` to `μ`; `+1` gives the metric-preserving curvature.
pub fn tractor_omega_formula(pack: &CurvaturePack, sigma_sign: f64) -> Result<EndoFormMatrix> {
    let np = pack
        .nabla_p
        .as_ref()
        .ok_or_else(|| Error::Unsupported("tractor curvature needs ∇P (depth ≥ 1)".into()))?;
    let n = pack.dim();
    let r = n + 2;
    let gi = pack.metric.g_inv();
    let pairs = combos(n, 2);
    let mut out = EndoFormMatrix::zero(r, n, 2);
    let curl = |a: usize, b: usize, c: usize| np.get(&[a, b, c]) - np.get(&[b, a, c]);
    for c in 0..n {
        for d in 0..n {
            // μ_c ← μ_d: −C^d{}_{c ab}
            let comps = pairs
                .list
                .iter()
                .map(|ab| -(0..n).map(|e| gi[d * n + e] * pack.weyl.get(&[e, c, ab[0], ab[1]])).sum::<f64>())
                .collect();
            out.set(tractor_mu(c), tractor_mu(d), Form::from_comps(n, 2, comps)?);
        }
        let comps = pairs.list.iter().map(|ab| sigma_sign * curl(ab[0], ab[1], c)).collect();
        out.set(tractor_mu(c), tractor_sigma(), Form::from_comps(n, 2, comps)?);
        let comps = pairs
            .list
            .iter()
            .map(|ab| -(0..n).map(|f| gi[c * n + f] * curl(ab[0], ab[1], f)).sum::<f64>())
            .collect();
        out.set(tractor_rho(n), tractor_mu(c), Form::from_comps(n, 2, comps)?);
    }
    Ok(out)
}

/// Classical dimension-6 scalars entering the tractor identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dim6Invariants {
    /// `|W|² − 16(C,U) + 16|A|²`.
    pub i: f64,
    /// `δd|C|²`.
    pub g: f64,
    /// `−C_{abcd}C^{abce}P^d{}_e + |A|² + ¼|C|²J`.
    pub h: f64,
    /// `C_{abcd}C^{ab}{}_{ef}C^{cdef}`.
    pub c3_pairs: f64,
    /// `C_{abcd}C^a{}_e{}^c{}_f C^{bedf}`.
    pub c3_cross: f64,
}

impl Dim6Invariants {
    /// Right-hand side `¼I + ⅛G − 2H − ¼C³ − C³'` as its individual terms.
    pub fn rhs_terms(&self) -> [f64; 5] {
        [
            0.25 * self.i,
            0.125 * self.g,
            -2.0 * self.h,
            -0.25 * self.c3_pairs,
            -self.c3_cross,
        ]
    }

    pub fn rhs(&self) -> f64 {
        self.rhs_terms().iter().sum()
    }
}

/// All indices raised with `g⁻¹`.
fn raise_all(t: &TensorPoint, m: &MetricAtPoint) -> TensorPoint {
    let mut out = t.clone();
    for s in 0..t.rank() {
        out = out.raise(s, m).expect("lower slot");
    }
    out
}

fn full_dot(a: &TensorPoint, b_up: &TensorPoint) -> f64 {
    a.data().iter().zip(b_up.data()).map(|(x, y)| x * y).sum()
}

pub fn dim6_invariants(pack: &CurvaturePack) -> Result<Dim6Invariants> {
    let n = pack.dim();
    if n != 6 {
        return Err(Error::DimensionMismatch { expected: 6, got: n });
    }
    let missing = || Error::Unsupported("dimension-6 invariants need depth 2".into());
    let nc = pack.nabla_c.as_ref().ok_or_else(missing)?;
    let n2c = pack.nabla2_c.as_ref().ok_or_else(missing)?;
    let a = pack.cotton.as_ref().ok_or_else(missing)?;
    let na = pack.nabla_a.as_ref().ok_or_else(missing)?;
    let m = &pack.metric;
    let g = m.g();
    let c = &pack.weyl;
    let p_end = pack.schouten_endomorphism();

    // W_{abcde} = ∇_e C_{abcd} + g_{ea}A_{bcd} − g_{eb}A_{acd} + g_{ec}A_{dab} − g_{ed}A_{cab}
    let mut w = TensorPoint::zeros(n, vec![crate::tensor::Variance::Lower; 5]);
    let mut u = TensorPoint::zeros(n, vec![crate::tensor::Variance::Lower; 4]);
    for i0 in 0..n {
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    for e in 0..n {
                        let v = nc.get(&[e, i0, i1, i2, i3])
                            + g[e * n + i0] * a.get(&[i1, i2, i3])
                            - g[e * n + i1] * a.get(&[i0, i2, i3])
                            + g[e * n + i2] * a.get(&[i3, i0, i1])
                            - g[e * n + i3] * a.get(&[i2, i0, i1]);
                        w.set(&[i0, i1, i2, i3, e], v);
                    }
                    // U_{abcd} = ∇_a A_{bcd} − P_a{}^e C_{ebcd}
                    let pc: f64 = (0..n).map(|e| p_end.get(&[e, i0]) * c.get(&[e, i1, i2, i3])).sum();
                    u.set(&[i0, i1, i2, i3], na.get(&[i0, i1, i2, i3]) - pc);
                }
            }
        }
    }
    let c_up = raise_all(c, m);
    let c_sq = full_dot(c, &c_up);
    let a_sq = a.norm_squared(m);
    let i = w.norm_squared(m) - 16.0 * full_dot(&u, &c_up) + 16.0 * a_sq;

    // δd|C|² = −g^{ab}∇_a∇_b|C|² = −2 g^{ab}(∇_a∇_b C · C + ∇_a C · ∇_b C)
    let gi = m.g_inv();
    let block = n.pow(4);
    let nc_up: Vec<TensorPoint> = (0..n)
        .map(|e| {
            let data = nc.data()[e * block..(e + 1) * block].to_vec();
            let t = TensorPoint::from_data(n, vec![crate::tensor::Variance::Lower; 4], data).expect("size");
            raise_all(&t, m)
        })
        .collect();
    let mut lap = 0.0;
    for x in 0..n {
        for y in 0..n {
            let gxy = gi[x * n + y];
            if gxy == 0.0 {
                continue;
            }
            let off = (x * n + y) * block;
            let second: f64 = n2c.data()[off..off + block].iter().zip(c_up.data()).map(|(p, q)| p * q).sum();
            let first: f64 = nc.data()[x * block..(x + 1) * block]
                .iter()
                .zip(nc_up[y].data())
                .map(|(p, q)| p * q)
                .sum();
            lap += gxy * (second + first);
        }
    }
    let g_inv_val = -2.0 * lap;

    // C_{abcd}C^{abce}P^d{}_e
    let mut ccp = 0.0;
    for i0 in 0..n {
        for i1 in 0..n {
            for i2 in 0..n {
                for d in 0..n {
                    let cv = c.get(&[i0, i1, i2, d]);
                    if cv == 0.0 {
                        continue;
                    }
                    for e in 0..n {
                        ccp += cv * c_up.get(&[i0, i1, i2, e]) * p_end.get(&[d, e]);
                    }
                }
            }
        }
    }
    let h = -ccp + a_sq + 0.25 * c_sq * pack.j;

    // C_{ab}{}^{ef} with the second pair raised, and C^a{}_e{}^c{}_f.
    let c_mixed = c.raise(2, m)?.raise(3, m)?;
    let mut c3_pairs = 0.0;
    for i0 in 0..n {
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    let cv = c_up.get(&[i0, i1, i2, i3]);
                    if cv == 0.0 {
                        continue;
                    }
                    let mut s = 0.0;
                    for e in 0..n {
                        for f in 0..n {
                            s += c_mixed.get(&[i0, i1, e, f]) * c.get(&[i2, i3, e, f]);
                        }
                    }
                    c3_pairs += cv * s;
                }
            }
        }
    }
    let c_13 = c.raise(0, m)?.raise(2, m)?;
    let mut c3_cross = 0.0;
    for i0 in 0..n {
        for i1 in 0..n {
            for i2 in 0..n {
                for i3 in 0..n {
                    let cv = c.get(&[i0, i1, i2, i3]);
                    if cv == 0.0 {
                        continue;
                    }
                    let mut s = 0.0;
                    for e in 0..n {
                        for f in 0..n {
                            s += c_13.get(&[i0, e, i2, f]) * c_up.get(&[i1, e, i3, f]);
                        }
                    }
                    c3_cross += cv * s;
                }
            }
        }
    }
    Ok(Dim6Invariants {
        i,
        g: g_inv_val,
        h,
        c3_pairs,
        c3_cross,
    })
}

/// Both sides of the dimension-6 tractor identity at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dim6Identity {
    pub lhs: f64,
    pub invariants: Dim6Invariants,
}

impl Dim6Identity {
    pub fn rhs(&self) -> f64 {
        self.invariants.rhs()
    }

    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs()).abs()
    }
}

/// `Ω^A{}_B · (Q^∇₂ Ω)^B{}_A` with `Q^∇₂ = d^∇δ^∇ − 4P♯ + 2J` acting on
/// End(T)-valued 2-forms, evaluated through jets.
pub fn omega_q2_omega(jet: &MetricJet) -> Result<f64> {
    let n = jet.dim();
    if jet.order() < 5 {
        return Err(Error::InsufficientJetOrder {
            needed: 5,
            have: jet.order(),
        });
    }
    let r = n + 2;
    let cj = CurvatureJets::compute(jet, 0)?;
    let conn = tractor_connection_jets(&cj)?;
    let pairs = combos(n, 2);
    let omega_pairs = tractor_curvature_jets(&conn);
    let space = jet.space().clone();
    let om_order = omega_pairs[0][0].order();
    // Full antisymmetric access Ω_{ab}.
    let zero_mat: JetMat = vec![Jet::zero(&space, om_order); r * r];
    let mut neg_pairs: Vec<JetMat> = Vec::with_capacity(omega_pairs.len());
    for m in &omega_pairs {
        neg_pairs.push(m.iter().map(|x| -x).collect());
    }
    let omega = |a: usize, b: usize| -> &JetMat {
        if a == b {
            &zero_mat
        } else if a < b {
            &omega_pairs[pairs.index(&[a, b])]
        } else {
            &neg_pairs[pairs.index(&[b, a])]
        }
    };

    // (δ^∇Ω)_b = −g^{ac} ∇_c Ω_{ab}
    let gamma = &cj.gamma;
    let gm = |a: usize, b: usize, c: usize| &gamma[(a * n + b) * n + c];
    let beta: Vec<JetMat> = (0..n)
        .map(|b| {
            let mut acc: JetMat = vec![Jet::zero(&space, om_order - 1); r * r];
            for c in 0..n {
                // ∇_c Ω_{ab} contracted with g^{ac}
                let mut nab: JetMat = vec![Jet::zero(&space, om_order - 1); r * r];
                for a in 0..n {
                    let gac = &cj.g_inv[a * n + c];
                    let mut t: JetMat = omega(a, b).iter().map(|x| x.derivative(c)).collect();
                    for e in 0..n {
                        let g1 = gm(e, c, a);
                        let g2 = gm(e, c, b);
                        for k in 0..r * r {
                            let x = &(g1 * &omega(e, b)[k]) + &(g2 * &omega(a, e)[k]);
                            t[k].axpy(-1.0, &x);
                        }
                    }
                    jm_commutator_acc(&mut t, &conn[c], omega(a, b), r, 1.0);
                    for k in 0..r * r {
                        let x = gac * &t[k];
                        nab[k].axpy(1.0, &x);
                    }
                }
                for k in 0..r * r {
                    acc[k].axpy(-1.0, &nab[k]);
                }
            }
            acc
        })
        .collect();

    // (d^∇β)_{ab} = ∂_aβ_b − ∂_bβ_a + [A_a, β_b] − [A_b, β_a]
    let p = cj.schouten.as_ref().expect("n ≥ 3");
    let m = jet.at_point();
    let gi = m.g_inv();
    let p_end: Vec<f64> = (0..n * n)
        .map(|k| {
            let (e, a) = (k / n, k % n);
            (0..n).map(|f| gi[e * n + f] * p.get(&[f, a]).value()).sum()
        })
        .collect();
    let j = cj.j.as_ref().expect("n ≥ 3").value();
    let val = |mat: &JetMat| -> Vec<f64> { mat.iter().map(Jet::value).collect() };
    let omega_val: Vec<Vec<f64>> = (0..n * n).map(|k| val(omega(k / n, k % n))).collect();

    let mut q_pairs: Vec<Vec<f64>> = Vec::with_capacity(pairs.len());
    for ab in &pairs.list {
        let (a, b) = (ab[0], ab[1]);
        let mut q: JetMat = (0..r * r)
            .map(|k| &beta[b][k].derivative(a) - &beta[a][k].derivative(b))
            .collect();
        jm_commutator_acc(&mut q, &conn[a], &beta[b], r, 1.0);
        jm_commutator_acc(&mut q, &conn[b], &beta[a], r, -1.0);
        let mut qv = val(&q);
        // −4P♯Ω + 2JΩ with (P♯Ω)_{ab} = P^e{}_a Ω_{eb} + P^e{}_b Ω_{ae}
        for (k, out) in qv.iter_mut().enumerate() {
            let mut sharp = 0.0;
            for e in 0..n {
                sharp += p_end[e * n + a] * omega_val[e * n + b][k] + p_end[e * n + b] * omega_val[a * n + e][k];
            }
            *out += -4.0 * sharp + 2.0 * j * omega_val[a * n + b][k];
        }
        q_pairs.push(qv);
    }
    let to_endo = |src: &dyn Fn(usize, usize) -> f64| {
        EndoFormMatrix::from_fn(r, n, 2, |i, k| {
            let comps = (0..pairs.len()).map(|pi| src(pi, i * r + k)).collect();
            Form::from_comps(n, 2, comps).expect("size")
        })
    };
    let om = to_endo(&|pi, k| omega_pairs[pi][k].value());
    let qo = to_endo(&|pi, k| q_pairs[pi][k]);
    let mut total = 0.0;
    for x in 0..r {
        for y in 0..r {
            total += form_dot(om.get(x, y), qo.get(y, x), &m)?;
        }
    }
    Ok(total)
}

/// Evaluates both sides of the dimension-6 tractor identity.
pub fn dim6_tractor_identity(jet: &MetricJet) -> Result<Dim6Identity> {
    if jet.dim() != 6 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            got: jet.dim(),
        });
    }
    let lhs = omega_q2_omega(jet)?;
    let pack = crate::metrics::curvature(jet, 2)?;
    Ok(Dim6Identity {
        lhs,
        invariants: dim6_invariants(&pack)?,
    })
}
