//! Q-curvature type functionals: the cocycles `𝒦`, `𝒱`, `ℳ`, `ℋ` for a
//! registered quantity, Möbius invariance on `S²`, the exponential
//! prescription equation and descent to constant `Q`.

use std::sync::Arc;

pub use rustfft::num_complex::Complex64;

use crate::formgrid::sphere::SphereGrid;
use crate::formgrid::{FormField, TorusGrid};
use crate::qops::{l_pair, q_pair_density, QContext};
use crate::{Error, Result};

/// A scalar quantity with linear conformal change law
/// `e^{nω}Q^{ĝ} = Q^g + L^gω`. Scales are `g = e^{2ω}g₀` for a fixed base
/// `g₀`, given by node values of `ω`.
pub trait QQuantity {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn nodes(&self) -> usize;
    /// `∫ u dv_{g₀}`.
    fn integrate_base(&self, u: &[f64]) -> f64;
    /// The function `Q^g` at `g = e^{2ω}g₀`.
    fn q(&self, omega: &[f64]) -> Result<Vec<f64>>;
    /// `L^g f` at `g = e^{2ω}g₀`.
    fn l(&self, omega: &[f64], f: &[f64]) -> Result<Vec<f64>>;
    /// Approximate inverse of `1 + L^{g₀}`, used to precondition descent.
    fn smooth(&self, r: &[f64]) -> Vec<f64>;

    /// `∫ u dv_g` at `g = e^{2ω}g₀`.
    fn integrate(&self, omega: &[f64], u: &[f64]) -> f64 {
        let n = self.dim() as f64;
        let w: Vec<f64> = u.iter().zip(omega).map(|(x, o)| x * (n * o).exp()).collect();
        self.integrate_base(&w)
    }

    fn volume(&self, omega: &[f64]) -> f64 {
        self.integrate(omega, &vec![1.0; omega.len()])
    }

    /// `c = ∫Q`, the same at every scale.
    fn total(&self, omega: &[f64]) -> Result<f64> {
        Ok(self.integrate(omega, &self.q(omega)?))
    }
}

/// A metric `e^{2ω}g₀` of the conformal class on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Scale {
    pub omega: Vec<f64>,
}

impl Scale {
    pub fn new(omega: Vec<f64>) -> Self {
        Self { omega }
    }

    pub fn base(len: usize) -> Self {
        Self { omega: vec![0.0; len] }
    }

    /// `e^{2b}` times this metric.
    pub fn shifted(&self, b: f64) -> Self {
        Self::new(self.omega.iter().map(|w| w + b).collect())
    }
}

/// `ω(a, b)` with `a = e^{2ω(a,b)}b`.
pub fn log_ratio(a: &Scale, b: &Scale) -> Result<Vec<f64>> {
    if a.omega.len() != b.omega.len() {
        return Err(Error::GridMismatch);
    }
    Ok(a.omega.iter().zip(&b.omega).map(|(x, y)| x - y).collect())
}

fn check<Q: QQuantity + ?Sized>(q: &Q, s: &Scale) -> Result<()> {
    if s.omega.len() != q.nodes() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `𝒦(a, b) = ½∫ω(a,b)(Q^a + Q^b)`.
pub fn functional_k<Q: QQuantity + ?Sized>(q: &Q, a: &Scale, b: &Scale) -> Result<f64> {
    check(q, a)?;
    check(q, b)?;
    let w = log_ratio(a, b)?;
    let qa = q.q(&a.omega)?;
    let qb = q.q(&b.omega)?;
    let ia = q.integrate(&a.omega, &w.iter().zip(&qa).map(|(x, y)| x * y).collect::<Vec<_>>());
    let ib = q.integrate(&b.omega, &w.iter().zip(&qb).map(|(x, y)| x * y).collect::<Vec<_>>());
    Ok(0.5 * (ia + ib))
}

/// `𝒱(a, b) = −(c/n) log(vol(a)/vol(b))`.
pub fn functional_v<Q: QQuantity + ?Sized>(q: &Q, a: &Scale, b: &Scale) -> Result<f64> {
    check(q, a)?;
    check(q, b)?;
    let c = q.total(&b.omega)?;
    Ok(-(c / q.dim() as f64) * (q.volume(&a.omega) / q.volume(&b.omega)).ln())
}

/// `ℳ = 𝒱 + 𝒦`.
pub fn functional_m<Q: QQuantity + ?Sized>(q: &Q, a: &Scale, b: &Scale) -> Result<f64> {
    Ok(functional_v(q, a, b)? + functional_k(q, a, b)?)
}

fn q_oscillation<Q: QQuantity + ?Sized>(q: &Q, s: &Scale) -> Result<f64> {
    let values = q.q(&s.omega)?;
    let target = q.total(&s.omega)? / q.volume(&s.omega);
    Ok(values.iter().map(|v| (v - target).abs()).fold(0.0, f64::max))
}

/// `ℋ^{g₀}(g) = ℳ(g, g₀)`; `g₀` must have constant `Q`.
pub fn functional_h<Q: QQuantity + ?Sized>(q: &Q, g: &Scale, g0: &Scale) -> Result<f64> {
    let osc = q_oscillation(q, g0)?;
    if osc > 1e-8 {
        return Err(Error::QNotConstant(osc));
    }
    functional_m(q, g, g0)
}

/// `−(Q₀vol(g₀)/n) log(∫e^{n(ω−ω̄)}dv₀/vol(g₀)) + ½∫ωL₀ω dv₀`.
pub fn toward_mt<Q: QQuantity + ?Sized>(q: &Q, g: &Scale, g0: &Scale) -> Result<f64> {
    let osc = q_oscillation(q, g0)?;
    if osc > 1e-8 {
        return Err(Error::QNotConstant(osc));
    }
    let n = q.dim() as f64;
    let w = log_ratio(g, g0)?;
    let vol0 = q.volume(&g0.omega);
    let q0 = q.total(&g0.omega)? / vol0;
    let mean = q.integrate(&g0.omega, &w) / vol0;
    let e: Vec<f64> = w.iter().map(|x| (n * (x - mean)).exp()).collect();
    let lw = q.l(&g0.omega, &w)?;
    let quad = q.integrate(&g0.omega, &w.iter().zip(&lw).map(|(x, y)| x * y).collect::<Vec<_>>());
    Ok(-(q0 * vol0 / n) * (q.integrate(&g0.omega, &e) / vol0).ln() + 0.5 * quad)
}

/// `Pω + Q − Q̂e^{nω}` at every node, with `P = L^{g₀}`, `Q = Q^{g₀}` and
/// `Q̂` the prescribed function.
pub fn prescription_residual<Q: QQuantity + ?Sized>(q: &Q, omega: &[f64], target: &[f64]) -> Result<Vec<f64>> {
    let base = vec![0.0; omega.len()];
    let p = q.l(&base, omega)?;
    let q0 = q.q(&base)?;
    let n = q.dim() as f64;
    Ok((0..omega.len())
        .map(|i| p[i] + q0[i] - target[i] * (n * omega[i]).exp())
        .collect())
}

/// Gauss curvature on the round unit sphere: `K̂ = e^{−2ω}(1 + Δω)` with
/// `Δ = δd`, and `L = Δ`.
#[derive(Debug, Clone)]
pub struct GaussQuantity {
    grid: Arc<SphereGrid>,
}

impl GaussQuantity {
    pub fn new(grid: Arc<SphereGrid>) -> Self {
        Self { grid }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }
}

impl QQuantity for GaussQuantity {
    fn name(&self) -> &str {
        "gauss"
    }

    fn dim(&self) -> usize {
        2
    }

    fn nodes(&self) -> usize {
        self.grid.len()
    }

    fn integrate_base(&self, u: &[f64]) -> f64 {
        self.grid.integrate(u)
    }

    fn q(&self, omega: &[f64]) -> Result<Vec<f64>> {
        let lap = self.grid.laplacian(omega);
        Ok(omega.iter().zip(&lap).map(|(w, l)| (-2.0 * w).exp() * (1.0 + l)).collect())
    }

    fn l(&self, omega: &[f64], f: &[f64]) -> Result<Vec<f64>> {
        let lap = self.grid.laplacian(f);
        Ok(omega.iter().zip(&lap).map(|(w, l)| (-2.0 * w).exp() * l).collect())
    }

    fn smooth(&self, r: &[f64]) -> Vec<f64> {
        self.grid.apply_degree_symbol(r, |l| 1.0 / (1.0 + (l * (l + 1)) as f64))
    }
}

/// `Q_{ξ,η}` on a conformally flat `T⁴` for fixed closed one-forms `ξ, η`.
#[derive(Debug, Clone)]
pub struct PairQuantity {
    grid: Arc<TorusGrid>,
    xi: FormField,
    eta: FormField,
}

impl PairQuantity {
    pub fn new(xi: FormField, eta: FormField) -> Result<Self> {
        let grid = xi.grid().clone();
        if grid.dim() != 4 || xi.degree() != 1 || eta.degree() != 1 {
            return Err(Error::Unsupported("pair quantity needs one-forms on T⁴".into()));
        }
        Ok(Self { grid, xi, eta })
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }
}

impl QQuantity for PairQuantity {
    fn name(&self) -> &str {
        "q-xi-eta"
    }

    fn dim(&self) -> usize {
        4
    }

    fn nodes(&self) -> usize {
        self.grid.len()
    }

    fn integrate_base(&self, u: &[f64]) -> f64 {
        self.grid.integrate(u)
    }

    fn q(&self, omega: &[f64]) -> Result<Vec<f64>> {
        q_pair_density(&self.xi, &self.eta, &QContext::from_omega(&self.grid, omega.to_vec()))
    }

    fn l(&self, omega: &[f64], f: &[f64]) -> Result<Vec<f64>> {
        let ctx = QContext::from_omega(&self.grid, omega.to_vec());
        l_pair(&self.xi, &self.eta, f, &ctx)
    }

    fn smooth(&self, r: &[f64]) -> Vec<f64> {
        self.grid.apply_symbol(r, |k| 1.0 / (1.0 + 2.0 * k.iter().map(|m| (m * m) as f64).sum::<f64>()))
    }
}

/// A Möbius map `z ↦ (az + b)/(cz + d)` of the stereographic coordinate
/// `z = (x + iy)/(1 − x₃)`.
#[derive(Debug, Clone, Copy)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Mobius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        if (a * d - b * c).norm() < 1e-14 {
            return Err(Error::SingularMobius);
        }
        Ok(Self { a, b, c, d })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    /// `z ↦ λz`, fixing the poles.
    pub fn dilation(lambda: f64) -> Self {
        let mut m = Self::identity();
        m.a = Complex64::new(lambda, 0.0);
        m
    }

    /// Rotation given by unit quaternion-like parameters `(α, β)` with
    /// `|α|² + |β|² = 1`: `z ↦ (αz + β)/(−β̄z + ᾱ)`.
    pub fn rotation(alpha: Complex64, beta: Complex64) -> Self {
        let s = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        let (alpha, beta) = (alpha / s, beta / s);
        Self {
            a: alpha,
            b: beta,
            c: -beta.conj(),
            d: alpha.conj(),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    fn apply_z(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Image of a unit vector.
    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        from_stereo(self.apply_z(to_stereo(p)))
    }

    /// `σ` with `h*g₀ = e^{2σ}g₀` at `p`, for the round metric `g₀`.
    pub fn log_conformal_factor(&self, p: [f64; 3]) -> f64 {
        let z = to_stereo(p);
        let det = self.a * self.d - self.b * self.c;
        let den = self.c * z + self.d;
        let dh = det / (den * den);
        let w = self.apply_z(z);
        (dh.norm() * (1.0 + z.norm_sqr()) / (1.0 + w.norm_sqr())).ln()
    }
}

// the pole x₃ = 1 is sent to a large finite z; nodes never sit on it
fn to_stereo(p: [f64; 3]) -> Complex64 {
    let den = 1.0 - p[2];
    if den.abs() < 1e-300 {
        return Complex64::new(1e300, 0.0);
    }
    Complex64::new(p[0] / den, p[1] / den)
}

fn from_stereo(z: Complex64) -> [f64; 3] {
    if !z.re.is_finite() || z.norm() > 1e150 {
        return [0.0, 0.0, 1.0];
    }
    let r2 = z.norm_sqr();
    [2.0 * z.re / (r2 + 1.0), 2.0 * z.im / (r2 + 1.0), (r2 - 1.0) / (r2 + 1.0)]
}

/// Conformal factor of `h·g = (h⁻¹)*g` for `g = e^{2ρ}g₀`, with `ρ` given by
/// spherical harmonic coefficients and evaluated exactly at `h⁻¹(p)`.
pub fn push_forward(grid: &SphereGrid, h: &Mobius, rho_coeffs: &[f64]) -> Vec<f64> {
    let inv = h.inverse();
    (0..grid.len())
        .map(|k| {
            let p = grid.point(k);
            let q = inv.apply(p);
            let phi = q[1].atan2(q[0]);
            grid.evaluate(rho_coeffs, q[2], phi) + inv.log_conformal_factor(p)
        })
        .collect()
}

/// `|ℋ(h·g) − ℋ(g)|` on the round sphere for `g = e^{2ρ}g₀`.
pub fn mobius_invariance_residual(q: &GaussQuantity, h: &Mobius, rho_coeffs: &[f64]) -> Result<f64> {
    let grid = q.grid();
    let g0 = Scale::base(grid.len());
    let g = Scale::new(grid.synthesis(rho_coeffs));
    let moved = Scale::new(push_forward(grid, h, rho_coeffs));
    Ok((functional_h(q, &moved, &g0)? - functional_h(q, &g, &g0)?).abs())
}

#[derive(Debug, Clone)]
pub struct DescentOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self { tol: 1e-4, max_iter: 500 }
    }
}

#[derive(Debug, Clone)]
pub struct DescentResult {
    pub omega: Vec<f64>,
    /// `ℳ(g_i, g_init)` for every accepted iterate, starting at 0.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// `sup|Q^g − c/vol(g)|` at the final scale.
    pub residual: f64,
    pub converged: bool,
}

/// Preconditioned gradient descent on `ℳ(·, g_init)` with Armijo
/// backtracking. The `L²(dv_g)` gradient is `Q^g − c/vol(g)`.
pub fn constant_q_descent<Q: QQuantity + ?Sized>(
    q: &Q,
    init: &[f64],
    opts: &DescentOptions,
) -> Result<DescentResult> {
    let start = Scale::new(init.to_vec());
    let n = q.dim() as f64;
    let c = q.total(init)?;
    let mut omega = init.to_vec();
    let mut value = 0.0;
    let mut history = vec![value];
    let mut step: f64 = 1.0;
    let mut iterations = 0;
    loop {
        let qv = q.q(&omega)?;
        let target = c / q.volume(&omega);
        let residual = qv.iter().map(|v| (v - target).abs()).fold(0.0, f64::max);
        if residual <= opts.tol || iterations >= opts.max_iter {
            return Ok(DescentResult {
                omega,
                history,
                iterations,
                residual,
                converged: residual <= opts.tol,
            });
        }
        // gradient as a density of g₀
        let grad: Vec<f64> = qv
            .iter()
            .zip(&omega)
            .map(|(v, w)| (v - target) * (n * w).exp())
            .collect();
        let dir: Vec<f64> = q.smooth(&grad).iter().map(|x| -x).collect();
        let slope = q.integrate_base(&dir.iter().zip(&grad).map(|(a, b)| a * b).collect::<Vec<_>>());
        let mut t = (2.0 * step).min(1.0);
        loop {
            let trial: Vec<f64> = omega.iter().zip(&dir).map(|(w, d)| w + t * d).collect();
            let v = functional_m(q, &Scale::new(trial.clone()), &start)?;
            if v <= value + 1e-4 * t * slope {
                omega = trial;
                value = v;
                step = t;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                let residual = qv.iter().map(|v| (v - target).abs()).fold(0.0, f64::max);
                return Ok(DescentResult {
                    omega,
                    history,
                    iterations,
                    residual,
                    converged: false,
                });
            }
        }
        history.push(value);
        iterations += 1;
    }
}

/// `∫Q` over each component, the diagonal of `Θ₀`.
pub fn theta_zero(components: &[(&GaussQuantity, &[f64])]) -> Result<Vec<f64>> {
    components.iter().map(|(q, omega)| q.total(omega)).collect()
}
