use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::tensor::{combos, Form};

/// Uniform periodic grid on `[0, 2π)^n`, row-major with the last axis
/// fastest. Axes of size 1 carry fields constant in that direction.
pub struct TorusGrid {
    shape: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
    plans: Vec<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    /// Modes with a Nyquist index on some axis.
    nyquist: Vec<bool>,
}

impl std::fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TorusGrid{:?}", self.shape)
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape
    }
}

impl TorusGrid {
    pub fn new(shape: &[usize]) -> Arc<Self> {
        assert!(!shape.is_empty() && shape.iter().all(|&s| s >= 1));
        let mut strides = vec![1; shape.len()];
        for a in (0..shape.len() - 1).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        let mut planner = FftPlanner::new();
        let plans = shape
            .iter()
            .map(|&s| (planner.plan_fft_forward(s), planner.plan_fft_inverse(s)))
            .collect();
        let len: usize = shape.iter().product();
        let nyquist = (0..len)
            .map(|m| (0..shape.len()).any(|a| Self::is_nyquist((m / strides[a]) % shape[a], shape[a])))
            .collect();
        Arc::new(Self {
            len,
            shape: shape.to_vec(),
            strides,
            plans,
            nyquist,
        })
    }

    pub fn cubic(dim: usize, n: usize) -> Arc<Self> {
        Self::new(&vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Total volume `(2π)^n`.
    pub fn volume(&self) -> f64 {
        TAU.powi(self.dim() as i32)
    }

    pub fn node_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.coords_into(node, &mut out);
        out
    }

    fn coords_into(&self, node: usize, out: &mut [f64]) {
        for a in 0..self.dim() {
            let i = (node / self.strides[a]) % self.shape[a];
            out[a] = TAU * i as f64 / self.shape[a] as f64;
        }
    }

    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        (0..self.len)
            .map(|node| {
                self.coords_into(node, &mut x);
                f(&x)
            })
            .collect()
    }

    /// Signed integer wavenumber of FFT bin `i` on an axis of size `n`.
    fn wavenumber(i: usize, n: usize) -> i64 {
        if i <= n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    fn is_nyquist(i: usize, n: usize) -> bool {
        n % 2 == 0 && i == n / 2
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        for a in 0..self.dim() {
            let n = self.shape[a];
            if n == 1 {
                continue;
            }
            let plan = if inverse { &self.plans[a].1 } else { &self.plans[a].0 };
            let stride = self.strides[a];
            let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            // Gather tiles of up to 16 neighbouring lines so reads stay contiguous.
            let tile = stride.min(16);
            let mut lines = vec![Complex64::new(0.0, 0.0); n * tile];
            for block in data.chunks_exact_mut(n * stride) {
                for start in (0..stride).step_by(tile) {
                    let tile = tile.min(stride - start);
                    let lines = &mut lines[..n * tile];
                    for j in 0..n {
                        let row = &block[j * stride + start..j * stride + start + tile];
                        for (t, v) in row.iter().enumerate() {
                            lines[t * n + j] = *v;
                        }
                    }
                    plan.process_with_scratch(lines, &mut scratch);
                    for j in 0..n {
                        let row = &mut block[j * stride + start..j * stride + start + tile];
                        for (t, v) in row.iter_mut().enumerate() {
                            *v = lines[t * n + j];
                        }
                    }
                }
            }
        }
    }

    pub fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.len);
        let mut data: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        let s = 1.0 / self.len as f64;
        data.iter_mut().for_each(|v| *v *= s);
        data
    }

    pub fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spec, true);
        spec.into_iter().map(|v| v.re).collect()
    }

    fn for_each_mode(&self, mut f: impl FnMut(usize, &[i64], bool)) {
        let dim = self.dim();
        let mut idx = vec![0usize; dim];
        let mut k = vec![0i64; dim];
        for m in 0..self.len {
            let nyq = (0..dim).any(|a| Self::is_nyquist(idx[a], self.shape[a]));
            f(m, &k, nyq);
            for a in (0..dim).rev() {
                idx[a] += 1;
                if idx[a] < self.shape[a] {
                    k[a] = Self::wavenumber(idx[a], self.shape[a]);
                    break;
                }
                idx[a] = 0;
                k[a] = 0;
            }
        }
    }

    /// `∂f/∂x_axis`; the Nyquist mode is discarded.
    pub fn derivative(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let spec = self.forward(f);
        self.derivative_from_spectrum(&spec, axis)
    }

    fn derivative_from_spectrum(&self, spec: &[Complex64], axis: usize) -> Vec<f64> {
        if self.shape[axis] == 1 {
            return vec![0.0; self.len];
        }
        let mut d = vec![Complex64::new(0.0, 0.0); self.len];
        self.add_derivative_spectrum(spec, axis, 1.0, &mut d);
        self.inverse(d)
    }

    /// `acc += sign · ∂_axis` applied to a spectrum, Nyquist modes dropped.
    fn add_derivative_spectrum(&self, spec: &[Complex64], axis: usize, sign: f64, acc: &mut [Complex64]) {
        let n = self.shape[axis];
        if n == 1 {
            return;
        }
        let s = self.strides[axis];
        for (o, block) in acc.chunks_exact_mut(n * s).enumerate() {
            let base = o * n * s;
            for j in 0..n {
                let f = sign * Self::wavenumber(j, n) as f64;
                let row = base + j * s;
                for (i, a) in block[j * s..(j + 1) * s].iter_mut().enumerate() {
                    if !self.nyquist[row + i] {
                        let v = spec[row + i];
                        *a += Complex64::new(-v.im * f, v.re * f);
                    }
                }
            }
        }
    }

    pub fn gradient(&self, f: &[f64]) -> Vec<Vec<f64>> {
        if f.iter().all(|&v| v == 0.0) {
            return vec![vec![0.0; self.len]; self.dim()];
        }
        let spec = self.forward(f);
        (0..self.dim()).map(|a| self.derivative_from_spectrum(&spec, a)).collect()
    }

    /// Second partials `∂_a∂_b f` indexed `[a * n + b]`, from one forward
    /// transform; Nyquist modes are discarded as in [`TorusGrid::derivative`].
    pub fn hessian(&self, f: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dim();
        if f.iter().all(|&v| v == 0.0) {
            return vec![vec![0.0; self.len]; n * n];
        }
        let spec = self.forward(f);
        let first: Vec<Vec<Complex64>> = (0..n)
            .map(|a| {
                let mut d = vec![Complex64::new(0.0, 0.0); self.len];
                self.add_derivative_spectrum(&spec, a, 1.0, &mut d);
                d
            })
            .collect();
        let mut out = vec![Vec::new(); n * n];
        for a in 0..n {
            for b in a..n {
                let h = if self.shape[a] == 1 || self.shape[b] == 1 {
                    vec![0.0; self.len]
                } else {
                    let mut d = vec![Complex64::new(0.0, 0.0); self.len];
                    self.add_derivative_spectrum(&first[a], b, 1.0, &mut d);
                    self.inverse(d)
                };
                if a != b {
                    out[b * n + a] = h.clone();
                }
                out[a * n + b] = h;
            }
        }
        out
    }

    /// Applies the Fourier multiplier `symbol(k)`; Nyquist modes use the
    /// nonnegative wavenumber `N/2`.
    pub fn apply_symbol(&self, f: &[f64], symbol: impl Fn(&[i64]) -> f64) -> Vec<f64> {
        let mut spec = self.forward(f);
        self.for_each_mode(|m, k, _| spec[m] *= symbol(k));
        self.inverse(spec)
    }

    /// As [`TorusGrid::apply_symbol`] with every Nyquist mode removed.
    pub fn apply_resolved_symbol(&self, f: &[f64], symbol: impl Fn(&[i64]) -> f64) -> Vec<f64> {
        let mut spec = self.forward(f);
        self.for_each_mode(|m, k, nyq| spec[m] *= if nyq { 0.0 } else { symbol(k) });
        self.inverse(spec)
    }

    /// Largest Fourier coefficient magnitude with some `|k_a| > kmax`,
    /// relative to the largest overall.
    pub fn band_excess(&self, f: &[f64], kmax: i64) -> f64 {
        let spec = self.forward(f);
        let mut total: f64 = 0.0;
        let mut outside: f64 = 0.0;
        self.for_each_mode(|m, k, _| {
            let v = spec[m].norm();
            total = total.max(v);
            if k.iter().any(|ka| ka.abs() > kmax) {
                outside = outside.max(v);
            }
        });
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }

    /// Flat quadrature `∫ f dx` (exact for trigonometric polynomials below
    /// the grid resolution).
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.volume() / self.len as f64
    }
}

/// How a matrix-valued connection acts on the fibre.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Fibre vectors of length `N`.
    Fundamental,
    /// Fibre `N × N` matrices acted on by commutators.
    Adjoint,
}

/// A (bundle-valued) `k`-form on a torus grid; components are stored per
/// increasing multi-index and fibre slot.
#[derive(Debug, Clone)]
pub struct FormField {
    grid: Arc<TorusGrid>,
    degree: usize,
    fiber: usize,
    comps: Vec<Vec<f64>>,
}

impl FormField {
    pub fn zeros(grid: &Arc<TorusGrid>, degree: usize, fiber: usize) -> Self {
        let nc = combos(grid.dim(), degree).len();
        Self {
            grid: grid.clone(),
            degree,
            fiber,
            comps: vec![vec![0.0; grid.len()]; nc * fiber],
        }
    }

    pub fn scalar(grid: &Arc<TorusGrid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            degree: 0,
            fiber: 1,
            comps: vec![values],
        }
    }

    /// Components `f(x, combo index, fibre slot)`.
    pub fn from_fn(
        grid: &Arc<TorusGrid>,
        degree: usize,
        fiber: usize,
        f: impl Fn(&[f64], usize, usize) -> f64,
    ) -> Self {
        let nc = combos(grid.dim(), degree).len();
        let comps = (0..nc * fiber)
            .map(|cf| grid.sample(|x| f(x, cf / fiber, cf % fiber)))
            .collect();
        Self {
            grid: grid.clone(),
            degree,
            fiber,
            comps,
        }
    }

    /// The constant-coefficient form equal to `form` everywhere.
    pub fn constant(grid: &Arc<TorusGrid>, form: &Form) -> Self {
        let comps = form.comps().iter().map(|&c| vec![c; grid.len()]).collect();
        Self {
            grid: grid.clone(),
            degree: form.degree(),
            fiber: 1,
            comps,
        }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn comp(&self, combo: usize, slot: usize) -> &[f64] {
        &self.comps[combo * self.fiber + slot]
    }

    pub fn comp_mut(&mut self, combo: usize, slot: usize) -> &mut Vec<f64> {
        &mut self.comps[combo * self.fiber + slot]
    }

    pub fn values(&self) -> &[f64] {
        assert!(self.degree == 0 && self.fiber == 1);
        &self.comps[0]
    }

    pub fn into_values(mut self) -> Vec<f64> {
        assert!(self.degree == 0 && self.fiber == 1);
        self.comps.swap_remove(0)
    }

    /// The form at a node.
    pub fn form_at(&self, node: usize, slot: usize) -> Form {
        let nc = combos(self.dim(), self.degree).len();
        let comps = (0..nc).map(|c| self.comp(c, slot)[node]).collect();
        Form::from_comps(self.dim(), self.degree, comps).expect("size")
    }

    fn check_compatible(&self, other: &FormField) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && *self.grid != *other.grid {
            return Err(Error::GridMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        if self.fiber != other.fiber {
            return Err(Error::DimensionMismatch {
                expected: self.fiber,
                got: other.fiber,
            });
        }
        Ok(())
    }

    /// `self += s · other`.
    pub fn axpy(&mut self, s: f64, other: &FormField) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &FormField) -> Result<FormField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &FormField) -> Result<FormField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> FormField {
        let mut out = self.clone();
        out.comps.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    /// Pointwise product with a scalar function.
    pub fn mul_function(&self, f: &[f64]) -> FormField {
        let mut out = self.clone();
        for c in &mut out.comps {
            for (x, y) in c.iter_mut().zip(f) {
                *x *= y;
            }
        }
        out
    }

    pub fn sup_norm(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum relative Fourier content above `kmax` over all components.
    pub fn band_excess(&self, kmax: i64) -> f64 {
        self.comps.iter().map(|c| self.grid.band_excess(c, kmax)).fold(0.0, f64::max)
    }
}

/// The conformally flat metric `ĝ = e^{2ω}δ` sampled on a torus grid,
/// together with the spectral derivatives of `ω`.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    grid: Arc<TorusGrid>,
    omega: Vec<f64>,
    d_omega: Vec<Vec<f64>>,
}

impl ConformalMetric {
    pub fn new(grid: &Arc<TorusGrid>, omega: Vec<f64>) -> Self {
        assert_eq!(omega.len(), grid.len());
        let d_omega = grid.gradient(&omega);
        Self {
            grid: grid.clone(),
            omega,
            d_omega,
        }
    }

    pub fn flat(grid: &Arc<TorusGrid>) -> Self {
        Self::new(grid, vec![0.0; grid.len()])
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn d_omega(&self) -> &[Vec<f64>] {
        &self.d_omega
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// `e^{sω}` at every node.
    pub fn weight(&self, s: f64) -> Vec<f64> {
        self.omega.iter().map(|w| (s * w).exp()).collect()
    }

    /// Schouten tensor `P̂_{ab} = −∂_a∂_bω + ∂_aω ∂_bω − ½|dω|²δ_{ab}`
    /// (coordinate components), indexed `[a * n + b]`.
    pub fn schouten(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let len = self.grid.len();
        let mut out = vec![vec![0.0; len]; n * n];
        let grad_sq: Vec<f64> = (0..len).map(|i| self.d_omega.iter().map(|d| d[i] * d[i]).sum()).collect();
        let hess = self.grid.hessian(&self.omega);
        for a in 0..n {
            for b in 0..n {
                let row = &mut out[a * n + b];
                for i in 0..len {
                    row[i] = -hess[a * n + b][i] + self.d_omega[a][i] * self.d_omega[b][i];
                    if a == b {
                        row[i] -= 0.5 * grad_sq[i];
                    }
                }
            }
        }
        out
    }

    /// `Ĵ = ĝ^{ab}P̂_{ab}`.
    pub fn j(&self, schouten: &[Vec<f64>]) -> Vec<f64> {
        let n = self.dim();
        let w = self.weight(-2.0);
        (0..self.grid.len())
            .map(|i| w[i] * (0..n).map(|a| schouten[a * n + a][i]).sum::<f64>())
            .collect()
    }
}

fn check_metric(alpha: &FormField, m: &ConformalMetric) -> Result<()> {
    if *alpha.grid != *m.grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Exterior derivative `(dα)_I = Σ_j (−1)^j ∂_{i_j} α_{I∖i_j}`.
pub fn exterior_d(alpha: &FormField) -> Result<FormField> {
    coupled_d_impl(alpha, None)
}

/// `d^D α = dα + A ∧ α`.
pub fn coupled_d(alpha: &FormField, conn: &ConnectionField) -> Result<FormField> {
    conn.check_fiber(alpha)?;
    coupled_d_impl(alpha, Some(conn))
}

fn coupled_d_impl(alpha: &FormField, conn: Option<&ConnectionField>) -> Result<FormField> {
    let n = alpha.dim();
    let k = alpha.degree;
    if k >= n {
        return Err(Error::DegreeOutOfRange { degree: k + 1, dim: n });
    }
    let src = combos(n, k);
    let dst = combos(n, k + 1);
    let grid = alpha.grid.clone();
    let mut out = FormField::zeros(&grid, k + 1, alpha.fiber);
    let mut sub = Vec::with_capacity(k);
    let fiber = alpha.fiber;
    let mut acc: Vec<Option<Vec<Complex64>>> = vec![None; dst.len() * fiber];
    for (ci, comb) in src.list.iter().enumerate() {
        for slot in 0..fiber {
            let c = alpha.comp(ci, slot);
            if c.iter().all(|&v| v == 0.0) {
                continue;
            }
            let spec = grid.forward(c);
            for a in 0..n {
                if comb.contains(&a) || grid.shape[a] == 1 {
                    continue;
                }
                let (target, sign) = insert_index(comb, a, &mut sub);
                let t = dst.index(&target);
                let slot_acc = acc[t * fiber + slot].get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); grid.len()]);
                grid.add_derivative_spectrum(&spec, a, sign, slot_acc);
            }
        }
    }
    for (i, spec) in acc.into_iter().enumerate() {
        if let Some(spec) = spec {
            out.comp_mut(i / fiber, i % fiber).copy_from_slice(&grid.inverse(spec));
        }
    }
    if let Some(conn) = conn {
        for (ci, comb) in src.list.iter().enumerate() {
            for a in 0..n {
                if comb.contains(&a) {
                    continue;
                }
                let (target, sign) = insert_index(comb, a, &mut sub);
                let t = dst.index(&target);
                conn.act_acc(a, alpha, ci, &mut out, t, sign);
            }
        }
    }
    Ok(out)
}

/// Sorted `comb ∪ {a}` and the sign of moving `a` to the front.
fn insert_index(comb: &[usize], a: usize, buf: &mut Vec<usize>) -> (Vec<usize>, f64) {
    buf.clear();
    let pos = comb.iter().filter(|&&c| c < a).count();
    buf.extend_from_slice(comb);
    buf.insert(pos, a);
    (buf.clone(), if pos % 2 == 0 { 1.0 } else { -1.0 })
}

/// Metric coderivative for `ĝ = e^{2ω}δ`:
/// `δ̂α_{b…} = −e^{(2k−2−n)ω} ∂_a(e^{(n−2k)ω} α_{ab…})`.
pub fn coderivative(alpha: &FormField, m: &ConformalMetric) -> Result<FormField> {
    coupled_delta_impl(alpha, m, None)
}

/// `δ^D α = δ̂α − e^{−2ω} A_a · α_{a…}`.
pub fn coupled_delta(alpha: &FormField, m: &ConformalMetric, conn: &ConnectionField) -> Result<FormField> {
    conn.check_fiber(alpha)?;
    coupled_delta_impl(alpha, m, Some(conn))
}

fn coupled_delta_impl(alpha: &FormField, m: &ConformalMetric, conn: Option<&ConnectionField>) -> Result<FormField> {
    check_metric(alpha, m)?;
    let n = alpha.dim();
    let k = alpha.degree;
    if k == 0 {
        return Err(Error::DegreeOutOfRange { degree: 0, dim: n });
    }
    let grid = alpha.grid.clone();
    let src = combos(n, k);
    let dst = combos(n, k - 1);
    let pre = m.weight((n as f64) - 2.0 * k as f64);
    let post = m.weight(2.0 * k as f64 - 2.0 - n as f64);
    let mut out = FormField::zeros(&grid, k - 1, alpha.fiber);
    // α_{a b…} = sign · α_{sorted}; the a-th slot is removed from the front.
    let fiber = alpha.fiber;
    let mut acc: Vec<Option<Vec<Complex64>>> = vec![None; dst.len() * fiber];
    for (ci, comb) in src.list.iter().enumerate() {
        for slot in 0..fiber {
            let c = alpha.comp(ci, slot);
            if c.iter().all(|&v| v == 0.0) {
                continue;
            }
            let weighted: Vec<f64> = c.iter().zip(&pre).map(|(x, w)| x * w).collect();
            let spec = grid.forward(&weighted);
            for (pos, &a) in comb.iter().enumerate() {
                if grid.shape[a] == 1 {
                    continue;
                }
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                let mut rest = comb.clone();
                rest.remove(pos);
                let t = dst.index(&rest);
                let slot_acc = acc[t * fiber + slot].get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); grid.len()]);
                grid.add_derivative_spectrum(&spec, a, -sign, slot_acc);
            }
        }
    }
    for (i, spec) in acc.into_iter().enumerate() {
        if let Some(spec) = spec {
            let d = grid.inverse(spec);
            let o = out.comp_mut(i / fiber, i % fiber);
            for j in 0..o.len() {
                o[j] = post[j] * d[j];
            }
        }
    }
    if let Some(conn) = conn {
        let w = m.weight(-2.0);
        let mut tmp = FormField::zeros(&grid, k - 1, alpha.fiber);
        for (ci, comb) in src.list.iter().enumerate() {
            for (pos, &a) in comb.iter().enumerate() {
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                let mut rest = comb.clone();
                rest.remove(pos);
                let t = dst.index(&rest);
                conn.act_acc(a, alpha, ci, &mut tmp, t, -sign);
            }
        }
        out.axpy(1.0, &tmp.mul_function(&w))?;
    }
    Ok(out)
}

/// Node-wise `ĝ`-inner product of forms (`1/k!` convention), summed over
/// fibre slots.
pub fn pointwise_dot(alpha: &FormField, beta: &FormField, m: &ConformalMetric) -> Result<Vec<f64>> {
    alpha.check_compatible(beta)?;
    check_metric(alpha, m)?;
    let w = m.weight(-2.0 * alpha.degree as f64);
    let mut out = vec![0.0; alpha.grid.len()];
    for (a, b) in alpha.comps.iter().zip(&beta.comps) {
        for i in 0..out.len() {
            out[i] += a[i] * b[i];
        }
    }
    for (o, wi) in out.iter_mut().zip(&w) {
        *o *= wi;
    }
    Ok(out)
}

/// `∫ u dv_ĝ`.
pub fn integrate_density(u: &[f64], m: &ConformalMetric) -> f64 {
    let w = m.weight(m.dim() as f64);
    let prod: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a * b).collect();
    m.grid.integrate(&prod)
}

/// `⟨α, β⟩ = ∫ α·β dv_ĝ`.
pub fn inner_product(alpha: &FormField, beta: &FormField, m: &ConformalMetric) -> Result<f64> {
    Ok(integrate_density(&pointwise_dot(alpha, beta, m)?, m))
}

/// A matrix-valued 1-form `A = A_a dx^a` on a torus grid; `A_a` entries
/// stored row-major per node.
#[derive(Debug, Clone)]
pub struct ConnectionField {
    grid: Arc<TorusGrid>,
    rank: usize,
    action: Action,
    a: Vec<Vec<Vec<f64>>>,
}

impl ConnectionField {
    /// `entries[axis][i * rank + j]` are node arrays.
    pub fn new(grid: &Arc<TorusGrid>, rank: usize, action: Action, entries: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if entries.len() != grid.dim() || entries.iter().any(|e| e.len() != rank * rank) {
            return Err(Error::DimensionMismatch {
                expected: grid.dim() * rank * rank,
                got: entries.iter().map(Vec::len).sum(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            rank,
            action,
            a: entries,
        })
    }

    pub fn trivial(grid: &Arc<TorusGrid>, rank: usize, action: Action) -> Self {
        let entries = vec![vec![vec![0.0; grid.len()]; rank * rank]; grid.dim()];
        Self::new(grid, rank, action, entries).expect("shape")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn action(&self) -> Action {
        self.action
    }

    pub fn with_action(&self, action: Action) -> Self {
        Self {
            action,
            ..self.clone()
        }
    }

    pub fn entries(&self) -> &[Vec<Vec<f64>>] {
        &self.a
    }

    pub fn fiber(&self) -> usize {
        match self.action {
            Action::Fundamental => self.rank,
            Action::Adjoint => self.rank * self.rank,
        }
    }

    fn check_fiber(&self, alpha: &FormField) -> Result<()> {
        if alpha.fiber != self.fiber() {
            return Err(Error::DimensionMismatch {
                expected: self.fiber(),
                got: alpha.fiber,
            });
        }
        if *alpha.grid != *self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `out[t] += sign · (A_axis acting on α[ci])`.
    fn act_acc(&self, axis: usize, alpha: &FormField, ci: usize, out: &mut FormField, t: usize, sign: f64) {
        let r = self.rank;
        let a = &self.a[axis];
        let len = self.grid.len();
        match self.action {
            Action::Fundamental => {
                for i in 0..r {
                    for j in 0..r {
                        let aij = &a[i * r + j];
                        let src = alpha.comp(ci, j);
                        let o = out.comp_mut(t, i);
                        for p in 0..len {
                            o[p] += sign * aij[p] * src[p];
                        }
                    }
                }
            }
            Action::Adjoint => {
                // [A, X]_{ij} = A_{il} X_{lj} − X_{il} A_{lj}
                for i in 0..r {
                    for j in 0..r {
                        for l in 0..r {
                            let ail = &a[i * r + l];
                            let alj = &a[l * r + j];
                            let xlj = alpha.comp(ci, l * r + j);
                            let xil = alpha.comp(ci, i * r + l);
                            let o = out.comp_mut(t, i * r + j);
                            for p in 0..len {
                                o[p] += sign * (ail[p] * xlj[p] - xil[p] * alj[p]);
                            }
                        }
                    }
                }
            }
        }
    }

    /// Curvature `F = dA + A∧A` as an `End`-valued 2-form (fibre `rank²`).
    pub fn curvature(&self) -> FormField {
        let n = self.grid.dim();
        let r = self.rank;
        let len = self.grid.len();
        let pairs = combos(n, 2);
        let mut f = FormField::zeros(&self.grid, 2, r * r);
        let grads: Vec<Vec<Vec<Vec<f64>>>> = self
            .a
            .iter()
            .map(|aa| aa.iter().map(|e| self.grid.gradient(e)).collect())
            .collect();
        for (pi, ab) in pairs.list.iter().enumerate() {
            let (a, b) = (ab[0], ab[1]);
            for i in 0..r {
                for j in 0..r {
                    let e = i * r + j;
                    let o = f.comp_mut(pi, e);
                    for p in 0..len {
                        o[p] = grads[b][e][a][p] - grads[a][e][b][p];
                    }
                    for l in 0..r {
                        let (x1, y1) = (&self.a[a][i * r + l], &self.a[b][l * r + j]);
                        let (x2, y2) = (&self.a[b][i * r + l], &self.a[a][l * r + j]);
                        for p in 0..len {
                            o[p] += x1[p] * y1[p] - x2[p] * y2[p];
                        }
                    }
                }
            }
        }
        f
    }
}
