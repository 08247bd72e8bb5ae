//! Unit round sphere sampled on Gauss–Legendre nodes in `cos θ` and a
//! uniform longitude grid, with an orthonormal real spherical-harmonic
//! transform. Coefficients are indexed `l² + l + m` for `−l ≤ m ≤ l`
//! (`m < 0` are the `sin |m|φ` harmonics).

use std::f64::consts::{PI, SQRT_2, TAU};

/// Gauss–Legendre nodes and weights on `[−1, 1]`, nodes increasing.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[n - 1 - i] = z;
        w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Orthonormal associated Legendre values `p̄_l^m(x)` for `0 ≤ m ≤ l ≤ lmax`
/// at index `l(l+1)/2 + m`, normalised so `∫_{−1}^{1} p̄² dx = 1/2π`.
pub fn legendre_table(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; (lmax + 1) * (lmax + 2) / 2];
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        out[tri(m, m)] = pmm;
        if m < lmax {
            out[tri(m + 1, m)] = x * ((2 * m + 3) as f64).sqrt() * pmm;
        }
        for l in (m + 2)..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            out[tri(l, m)] = a * (x * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
        }
    }
    out
}

pub fn sh_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

#[derive(Debug, Clone)]
pub struct SphereGrid {
    n_theta: usize,
    n_phi: usize,
    lmax: usize,
    cos_theta: Vec<f64>,
    weights: Vec<f64>,
    plm: Vec<Vec<f64>>,
    cos_tab: Vec<Vec<f64>>,
    sin_tab: Vec<Vec<f64>>,
}

impl SphereGrid {
    /// `n_theta` Gauss nodes, `2 n_theta` longitudes, band limit `n_theta − 1`.
    pub fn new(n_theta: usize) -> Self {
        assert!(n_theta >= 2);
        let n_phi = 2 * n_theta;
        let lmax = n_theta - 1;
        let (cos_theta, weights) = gauss_legendre(n_theta);
        let plm = cos_theta.iter().map(|&x| legendre_table(lmax, x)).collect();
        let cos_tab = (0..=lmax)
            .map(|m| (0..n_phi).map(|j| (m as f64 * TAU * j as f64 / n_phi as f64).cos()).collect())
            .collect();
        let sin_tab = (0..=lmax)
            .map(|m| (0..n_phi).map(|j| (m as f64 * TAU * j as f64 / n_phi as f64).sin()).collect())
            .collect();
        Self {
            n_theta,
            n_phi,
            lmax,
            cos_theta,
            weights,
            plm,
            cos_tab,
            sin_tab,
        }
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_coeffs(&self) -> usize {
        (self.lmax + 1) * (self.lmax + 1)
    }

    /// `(cos θ, φ)` of a node.
    pub fn node(&self, k: usize) -> (f64, f64) {
        let (i, j) = (k / self.n_phi, k % self.n_phi);
        (self.cos_theta[i], TAU * j as f64 / self.n_phi as f64)
    }

    /// Unit vector of a node in R³.
    pub fn point(&self, k: usize) -> [f64; 3] {
        let (x, phi) = self.node(k);
        let s = (1.0 - x * x).sqrt();
        [s * phi.cos(), s * phi.sin(), x]
    }

    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|k| f(self.point(k))).collect()
    }

    /// Quadrature weight of each node (sums to 4π).
    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k / self.n_phi] * TAU / self.n_phi as f64
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        let dphi = TAU / self.n_phi as f64;
        let mut total = 0.0;
        for i in 0..self.n_theta {
            let ring: f64 = f[i * self.n_phi..(i + 1) * self.n_phi].iter().sum();
            total += self.weights[i] * ring;
        }
        total * dphi
    }

    pub fn analysis(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.len());
        let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
        let dphi = TAU / self.n_phi as f64;
        let mut out = vec![0.0; self.n_coeffs()];
        for i in 0..self.n_theta {
            let ring = &f[i * self.n_phi..(i + 1) * self.n_phi];
            let w = self.weights[i] * dphi;
            for m in 0..=self.lmax {
                let c: f64 = ring.iter().zip(&self.cos_tab[m]).map(|(a, b)| a * b).sum();
                let s: f64 = ring.iter().zip(&self.sin_tab[m]).map(|(a, b)| a * b).sum();
                let scale = if m == 0 { 1.0 } else { SQRT_2 };
                for l in m..=self.lmax {
                    let p = self.plm[i][tri(l, m)] * w * scale;
                    out[l * l + l + m] += p * c;
                    if m > 0 {
                        out[l * l + l - m] += p * s;
                    }
                }
            }
        }
        out
    }

    pub fn synthesis(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.n_coeffs());
        let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
        let mut out = vec![0.0; self.len()];
        for i in 0..self.n_theta {
            let ring = &mut out[i * self.n_phi..(i + 1) * self.n_phi];
            for m in 0..=self.lmax {
                let scale = if m == 0 { 1.0 } else { SQRT_2 };
                let mut c = 0.0;
                let mut s = 0.0;
                for l in m..=self.lmax {
                    let p = self.plm[i][tri(l, m)] * scale;
                    c += p * coeffs[l * l + l + m];
                    if m > 0 {
                        s += p * coeffs[l * l + l - m];
                    }
                }
                for j in 0..self.n_phi {
                    ring[j] += c * self.cos_tab[m][j] + s * self.sin_tab[m][j];
                }
            }
        }
        out
    }

    /// Evaluates an expansion at an arbitrary point `(cos θ, φ)`.
    pub fn evaluate(&self, coeffs: &[f64], cos_theta: f64, phi: f64) -> f64 {
        let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
        let p = legendre_table(self.lmax, cos_theta.clamp(-1.0, 1.0));
        let mut total = 0.0;
        for m in 0..=self.lmax {
            let scale = if m == 0 { 1.0 } else { SQRT_2 };
            let (cm, sm) = ((m as f64 * phi).cos(), (m as f64 * phi).sin());
            for l in m..=self.lmax {
                let v = p[tri(l, m)] * scale;
                total += v * coeffs[l * l + l + m] * cm;
                if m > 0 {
                    total += v * coeffs[l * l + l - m] * sm;
                }
            }
        }
        total
    }

    /// Applies `g(l)` diagonally in harmonic space.
    pub fn apply_degree_symbol(&self, f: &[f64], g: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut c = self.analysis(f);
        for l in 0..=self.lmax {
            let gl = g(l);
            for v in &mut c[l * l..(l + 1) * (l + 1)] {
                *v *= gl;
            }
        }
        self.synthesis(&c)
    }

    /// `Δ = δd`, non-negative with eigenvalues `l(l+1)`.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        self.apply_degree_symbol(f, |l| (l * (l + 1)) as f64)
    }

    /// Relative coefficient mass above degree `l0`.
    pub fn tail(&self, f: &[f64], l0: usize) -> f64 {
        let c = self.analysis(f);
        let total: f64 = c.iter().map(|v| v * v).sum();
        let high: f64 = c[(l0 + 1) * (l0 + 1)..].iter().map(|v| v * v).sum();
        if total == 0.0 {
            0.0
        } else {
            (high / total).sqrt()
        }
    }
}
