//! Pointwise dense tensor algebra: contraction, index gymnastics, exterior
//! algebra with the `1/k!` form inner product, Hodge star and the derivation
//! action of endomorphisms on forms.

use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    Upper,
    Lower,
}

impl Variance {
    fn name(self) -> &'static str {
        match self {
            Variance::Upper => "upper",
            Variance::Lower => "lower",
        }
    }

    fn flip(self) -> Self {
        match self {
            Variance::Upper => Variance::Lower,
            Variance::Lower => Variance::Upper,
        }
    }
}

/// Dense tensor at a point, components stored row-major in slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorPoint {
    dim: usize,
    variance: Vec<Variance>,
    data: Vec<f64>,
}

impl TensorPoint {
    pub fn zeros(dim: usize, variance: Vec<Variance>) -> Self {
        let len = dim.pow(variance.len() as u32);
        Self {
            dim,
            variance,
            data: vec![0.0; len],
        }
    }

    pub fn from_data(dim: usize, variance: Vec<Variance>, data: Vec<f64>) -> Result<Self> {
        let len = dim.pow(variance.len() as u32);
        if data.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: data.len(),
            });
        }
        Ok(Self {
            dim,
            variance,
            data,
        })
    }

    pub fn scalar(dim: usize, v: f64) -> Self {
        Self {
            dim,
            variance: Vec::new(),
            data: vec![v],
        }
    }

    /// The identity endomorphism `δ^a_b`.
    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(dim, vec![Variance::Upper, Variance::Lower]);
        for i in 0..dim {
            t.data[i * dim + i] = 1.0;
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for s in (0..out.len()).rev() {
            out[s] = flat % self.dim;
            flat /= self.dim;
        }
    }

    /// Trace over two slots. Slots of equal variance are first reconciled
    /// with `metric` by raising or lowering `slot_j`.
    pub fn contract(
        &self,
        slot_i: usize,
        slot_j: usize,
        metric: Option<&MetricAtPoint>,
    ) -> Result<TensorPoint> {
        let rank = self.rank();
        for s in [slot_i, slot_j] {
            if s >= rank {
                return Err(Error::SlotOutOfRange { slot: s, rank });
            }
        }
        if slot_i == slot_j {
            return Err(Error::SlotOutOfRange {
                slot: slot_j,
                rank,
            });
        }
        let adjusted;
        let src = if self.variance[slot_i] == self.variance[slot_j] {
            let m = metric.ok_or(Error::SameVariance(self.variance[slot_i].name()))?;
            adjusted = match self.variance[slot_j] {
                Variance::Upper => self.lower(slot_j, m)?,
                Variance::Lower => self.raise(slot_j, m)?,
            };
            &adjusted
        } else {
            self
        };
        let keep: Vec<usize> = (0..rank).filter(|&s| s != slot_i && s != slot_j).collect();
        let variance = keep.iter().map(|&s| src.variance[s]).collect();
        let mut out = TensorPoint::zeros(self.dim, variance);
        let mut idx = vec![0; rank];
        let mut oidx = vec![0; keep.len()];
        for flat in 0..out.data.len() {
            out.unravel(flat, &mut oidx);
            for (k, &s) in keep.iter().enumerate() {
                idx[s] = oidx[k];
            }
            let mut acc = 0.0;
            for a in 0..self.dim {
                idx[slot_i] = a;
                idx[slot_j] = a;
                acc += src.get(&idx);
            }
            out.data[flat] = acc;
        }
        Ok(out)
    }

    fn transform_slot(&self, slot: usize, mat: &[f64], to: Variance) -> Result<TensorPoint> {
        let rank = self.rank();
        if slot >= rank {
            return Err(Error::SlotOutOfRange { slot, rank });
        }
        let mut variance = self.variance.clone();
        variance[slot] = to;
        let mut out = TensorPoint::zeros(self.dim, variance);
        let mut idx = vec![0; rank];
        for flat in 0..self.data.len() {
            self.unravel(flat, &mut idx);
            let v = self.data[flat];
            if v == 0.0 {
                continue;
            }
            let a = idx[slot];
            for b in 0..self.dim {
                idx[slot] = b;
                let o = out.offset(&idx);
                out.data[o] += mat[b * self.dim + a] * v;
            }
            idx[slot] = a;
        }
        Ok(out)
    }

    pub fn lower(&self, slot: usize, m: &MetricAtPoint) -> Result<TensorPoint> {
        if self.variance.get(slot) != Some(&Variance::Upper) {
            return Err(Error::VarianceMismatch("lowering needs an upper slot"));
        }
        self.transform_slot(slot, &m.g, Variance::Lower)
    }

    pub fn raise(&self, slot: usize, m: &MetricAtPoint) -> Result<TensorPoint> {
        if self.variance.get(slot) != Some(&Variance::Lower) {
            return Err(Error::VarianceMismatch("raising needs a lower slot"));
        }
        self.transform_slot(slot, &m.g_inv, Variance::Upper)
    }

    pub fn outer(&self, other: &TensorPoint) -> TensorPoint {
        let mut variance = self.variance.clone();
        variance.extend_from_slice(&other.variance);
        let data = self
            .data
            .iter()
            .flat_map(|a| other.data.iter().map(move |b| a * b))
            .collect();
        TensorPoint {
            dim: self.dim,
            variance,
            data,
        }
    }

    /// Full contraction `T_{…}T^{…}` with no factorial, every slot
    /// converted with the metric.
    pub fn norm_squared(&self, m: &MetricAtPoint) -> f64 {
        let mut raised = self.clone();
        for s in 0..self.rank() {
            raised = match raised.variance[s] {
                Variance::Lower => raised.transform_slot(s, &m.g_inv, Variance::Upper),
                Variance::Upper => raised.transform_slot(s, &m.g, Variance::Lower),
            }
            .expect("slot in range");
        }
        self.data.iter().zip(&raised.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diff(&self, other: &TensorPoint) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Flip the variance of a slot with the metric.
    pub fn toggle(&self, slot: usize, m: &MetricAtPoint) -> Result<TensorPoint> {
        match self.variance.get(slot) {
            Some(Variance::Upper) => self.lower(slot, m),
            Some(Variance::Lower) => self.raise(slot, m),
            None => Err(Error::SlotOutOfRange {
                slot,
                rank: self.rank(),
            }),
        }
    }

    pub fn flipped_variance(&self, slot: usize) -> Variance {
        self.variance[slot].flip()
    }
}

/// Metric data at a point: `g`, `g⁻¹`, determinant and an explicit
/// orientation sign.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAtPoint {
    dim: usize,
    g: Vec<f64>,
    g_inv: Vec<f64>,
    det: f64,
    orientation: f64,
}

impl MetricAtPoint {
    pub fn new(dim: usize, g: Vec<f64>, orientation: f64) -> Result<Self> {
        if g.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: g.len(),
            });
        }
        let m = DMatrix::from_row_slice(dim, dim, &g);
        let det = m.determinant();
        let inv = m
            .try_inverse()
            .ok_or(Error::Unsupported("degenerate metric".into()))?;
        let g_inv = (0..dim * dim).map(|k| inv[(k / dim, k % dim)]).collect();
        Ok(Self {
            dim,
            g,
            g_inv,
            det,
            orientation: orientation.signum(),
        })
    }

    pub fn euclidean(dim: usize) -> Self {
        let mut g = vec![0.0; dim * dim];
        for i in 0..dim {
            g[i * dim + i] = 1.0;
        }
        Self::new(dim, g, 1.0).expect("identity is invertible")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn g_inv(&self) -> &[f64] {
        &self.g_inv
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn with_orientation(&self, orientation: f64) -> Self {
        Self {
            orientation: orientation.signum(),
            ..self.clone()
        }
    }

    pub fn metric_tensor(&self) -> TensorPoint {
        TensorPoint {
            dim: self.dim,
            variance: vec![Variance::Lower, Variance::Lower],
            data: self.g.clone(),
        }
    }

    pub fn inverse_tensor(&self) -> TensorPoint {
        TensorPoint {
            dim: self.dim,
            variance: vec![Variance::Upper, Variance::Upper],
            data: self.g_inv.clone(),
        }
    }

    /// `±√|det g| dx¹∧…∧dxⁿ`.
    pub fn volume_form(&self) -> Form {
        let mut f = Form::zero(self.dim, self.dim);
        f.comps[0] = self.orientation * self.det.abs().sqrt();
        f
    }
}

/// Strictly increasing index tuples of length `k` from `0..n`, in
/// lexicographic order, with a bitmask lookup.
#[derive(Debug)]
pub struct Combos {
    pub n: usize,
    pub k: usize,
    pub list: Vec<Vec<usize>>,
    by_mask: Vec<u32>,
}

impl Combos {
    fn build(n: usize, k: usize) -> Self {
        let mut list = Vec::new();
        let mut cur = Vec::with_capacity(k);
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        rec(0, n, k, &mut cur, &mut list);
        let mut by_mask = vec![u32::MAX; 1 << n];
        for (i, c) in list.iter().enumerate() {
            by_mask[mask_of(c)] = i as u32;
        }
        Self {
            n,
            k,
            list,
            by_mask,
        }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn index(&self, sorted: &[usize]) -> usize {
        self.by_mask[mask_of(sorted)] as usize
    }

    pub fn index_of_mask(&self, mask: usize) -> usize {
        self.by_mask[mask] as usize
    }
}

pub fn mask_of(idx: &[usize]) -> usize {
    idx.iter().fold(0, |m, &i| m | (1 << i))
}

/// Cached combination tables; dimensions up to 12.
pub fn combos(n: usize, k: usize) -> Arc<Combos> {
    static CACHE: OnceLock<Mutex<Vec<Option<Arc<Combos>>>>> = OnceLock::new();
    assert!(n <= 12 && k <= n, "combos({n},{k}) unsupported");
    let cache = CACHE.get_or_init(|| Mutex::new(vec![None; 13 * 13]));
    let mut guard = cache.lock().expect("combos cache poisoned");
    guard[n * 13 + k]
        .get_or_insert_with(|| Arc::new(Combos::build(n, k)))
        .clone()
}

/// Sign of the permutation sorting `idx` (0 if an index repeats).
pub fn permutation_sign(idx: &[usize]) -> f64 {
    let mut sign = 1.0;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] == idx[j] {
                return 0.0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// A k-form at a point, one component per increasing index tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    dim: usize,
    degree: usize,
    comps: Vec<f64>,
}

impl Form {
    pub fn zero(dim: usize, degree: usize) -> Self {
        let len = combos(dim, degree).len();
        Self {
            dim,
            degree,
            comps: vec![0.0; len],
        }
    }

    pub fn from_comps(dim: usize, degree: usize, comps: Vec<f64>) -> Result<Self> {
        if degree > dim {
            return Err(Error::DegreeOutOfRange { degree, dim });
        }
        let len = combos(dim, degree).len();
        if comps.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                got: comps.len(),
            });
        }
        Ok(Self { dim, degree, comps })
    }

    /// `dx^{i₁}∧…∧dx^{i_k}` for an arbitrary index list.
    pub fn basis(dim: usize, idx: &[usize]) -> Self {
        let mut f = Self::zero(dim, idx.len());
        let s = permutation_sign(idx);
        if s != 0.0 {
            let mut sorted = idx.to_vec();
            sorted.sort_unstable();
            let c = combos(dim, idx.len());
            f.comps[c.index(&sorted)] = s;
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn comps(&self) -> &[f64] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [f64] {
        &mut self.comps
    }

    /// Component for an arbitrary (not necessarily sorted) index tuple.
    pub fn get(&self, idx: &[usize]) -> f64 {
        let s = permutation_sign(idx);
        if s == 0.0 {
            return 0.0;
        }
        let mut sorted = idx.to_vec();
        sorted.sort_unstable();
        s * self.comps[combos(self.dim, self.degree).index(&sorted)]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            comps: self.comps.iter().map(|c| c * s).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Form) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Form) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    fn check_same(&self, other: &Form) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    pub fn wedge(&self, other: &Form) -> Form {
        let k = self.degree + other.degree;
        let mut out = Form::zero(self.dim, k);
        if k > self.dim {
            return out;
        }
        let ca = combos(self.dim, self.degree);
        let cb = combos(self.dim, other.degree);
        let cc = combos(self.dim, k);
        for (i, a) in ca.list.iter().enumerate() {
            let va = self.comps[i];
            if va == 0.0 {
                continue;
            }
            let ma = mask_of(a);
            for (j, b) in cb.list.iter().enumerate() {
                let vb = other.comps[j];
                if vb == 0.0 || ma & mask_of(b) != 0 {
                    continue;
                }
                let s = merge_sign(a, b);
                out.comps[cc.index_of_mask(ma | mask_of(b))] += s * va * vb;
            }
        }
        out
    }

    /// Fully antisymmetric covariant tensor with `T_{i₁…i_k} = α_{i₁…i_k}`.
    pub fn to_tensor(&self) -> TensorPoint {
        let mut t = TensorPoint::zeros(self.dim, vec![Variance::Lower; self.degree]);
        let mut idx = vec![0; self.degree];
        for flat in 0..t.data.len() {
            t.unravel(flat, &mut idx);
            t.data[flat] = self.get(&idx);
        }
        t
    }

    /// Reads the increasing-index components of an antisymmetric tensor.
    pub fn from_tensor(t: &TensorPoint) -> Result<Self> {
        if t.variance.iter().any(|&v| v != Variance::Lower) {
            return Err(Error::VarianceMismatch("forms are covariant"));
        }
        let c = combos(t.dim, t.rank());
        let comps = c.list.iter().map(|idx| t.get(idx)).collect();
        Ok(Self {
            dim: t.dim,
            degree: t.rank(),
            comps,
        })
    }

    /// Components with every index raised, increasing-tuple order.
    pub fn raised(&self, m: &MetricAtPoint) -> Vec<f64> {
        let c = combos(self.dim, self.degree);
        c.list
            .iter()
            .map(|i| {
                c.list
                    .iter()
                    .zip(&self.comps)
                    .map(|(j, &v)| if v == 0.0 { 0.0 } else { minor(m.g_inv(), self.dim, i, j) * v })
                    .sum()
            })
            .collect()
    }
}

/// `det(M[rows, cols])` for a row-major `n × n` matrix.
pub fn minor(mat: &[f64], n: usize, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    match k {
        0 => 1.0,
        1 => mat[rows[0] * n + cols[0]],
        2 => {
            mat[rows[0] * n + cols[0]] * mat[rows[1] * n + cols[1]]
                - mat[rows[0] * n + cols[1]] * mat[rows[1] * n + cols[0]]
        }
        _ => {
            let sub = DMatrix::from_fn(k, k, |r, c| mat[rows[r] * n + cols[c]]);
            sub.determinant()
        }
    }
}

/// Sign of the shuffle placing sorted `a` followed by sorted `b` in order.
pub fn merge_sign(a: &[usize], b: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for &x in a {
        inversions += b.iter().filter(|&&y| y < x).count();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(1/k!) α_{a₁…a_k} β^{a₁…a_k}`.
pub fn form_dot(alpha: &Form, beta: &Form, m: &MetricAtPoint) -> Result<f64> {
    alpha.check_same(beta)?;
    if alpha.dim != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: alpha.dim,
        });
    }
    let raised = beta.raised(m);
    Ok(alpha.comps.iter().zip(&raised).map(|(a, b)| a * b).sum())
}

pub fn hodge_star(alpha: &Form, m: &MetricAtPoint) -> Result<Form> {
    let n = m.dim();
    if alpha.dim != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: alpha.dim,
        });
    }
    let k = alpha.degree;
    let raised = alpha.raised(m);
    let vol = m.orientation() * m.det().abs().sqrt();
    let ci = combos(n, k);
    let cj = combos(n, n - k);
    let full = (1usize << n) - 1;
    let mut out = Form::zero(n, n - k);
    for (i, idx) in ci.list.iter().enumerate() {
        if raised[i] == 0.0 {
            continue;
        }
        let mi = mask_of(idx);
        let j = cj.index_of_mask(full & !mi);
        let sign = merge_sign(idx, &cj.list[j]);
        out.comps[j] += vol * sign * raised[i];
    }
    Ok(out)
}

/// Derivation action `(E♯α)_{a₁…a_k} = Σ_s E^b{}_{a_s} α_{a₁…b…a_k}` of an
/// endomorphism given as a `(1,1)` tensor `E^b{}_a` (upper slot first).
pub fn sharp_action(e: &TensorPoint, alpha: &Form) -> Result<Form> {
    if e.variance() != [Variance::Upper, Variance::Lower] {
        return Err(Error::VarianceMismatch("endomorphism must be (upper, lower)"));
    }
    let n = alpha.dim;
    if e.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: e.dim(),
        });
    }
    Ok(sharp_action_raw(e.data(), alpha))
}

/// As [`sharp_action`] with `E^b{}_a` given row-major as `e[b * n + a]`.
pub fn sharp_action_raw(e: &[f64], alpha: &Form) -> Form {
    let n = alpha.dim;
    let k = alpha.degree;
    let c = combos(n, k);
    let mut out = Form::zero(n, k);
    let mut idx = vec![0; k];
    for (o, target) in c.list.iter().enumerate() {
        let mut acc = 0.0;
        for s in 0..k {
            idx.copy_from_slice(target);
            for b in 0..n {
                let coef = e[b * n + target[s]];
                if coef == 0.0 {
                    continue;
                }
                idx[s] = b;
                acc += coef * alpha.get(&idx);
            }
        }
        out.comps[o] = acc;
    }
    out
}
