//! Trigonometric polynomials on the 2π-periodic torus.

use rand::Rng;

use crate::jet::Jet;

#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub freq: Vec<i32>,
    pub phase: f64,
}

/// `Σ a_j cos(k_j·x + φ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn new(dim: usize, terms: Vec<TrigTerm>) -> Self {
        assert!(terms.iter().all(|t| t.freq.len() == dim));
        Self { dim, terms }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(
            dim,
            vec![TrigTerm {
                amplitude: c,
                freq: vec![0; dim],
                phase: 0.0,
            }],
        )
    }

    /// Single term `a cos(k·x + φ)`.
    pub fn mode(dim: usize, amplitude: f64, freq: &[i32], phase: f64) -> Self {
        Self::new(
            dim,
            vec![TrigTerm {
                amplitude,
                freq: freq.to_vec(),
                phase,
            }],
        )
    }

    /// `terms` random modes with integer frequencies in `[-max_freq, max_freq]`
    /// restricted to the axes in `active`, amplitudes scaled so the sup norm
    /// is at most `amplitude`.
    pub fn random<R: Rng>(
        rng: &mut R,
        dim: usize,
        active: &[usize],
        max_freq: i32,
        terms: usize,
        amplitude: f64,
    ) -> Self {
        let mut out = Vec::with_capacity(terms);
        for _ in 0..terms {
            let mut freq = vec![0; dim];
            while freq.iter().all(|&k| k == 0) {
                for &a in active {
                    freq[a] = rng.gen_range(-max_freq..=max_freq);
                }
            }
            out.push(TrigTerm {
                amplitude: rng.gen_range(-1.0..1.0) * amplitude / terms as f64,
                freq,
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            });
        }
        Self::new(dim, out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn max_freq(&self) -> i32 {
        self.terms
            .iter()
            .flat_map(|t| t.freq.iter().map(|k| k.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn plus(&self, other: &TrigPoly) -> TrigPoly {
        assert_eq!(self.dim, other.dim);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(self.dim, terms)
    }

    pub fn scaled(&self, s: f64) -> TrigPoly {
        let terms = self
            .terms
            .iter()
            .map(|t| TrigTerm {
                amplitude: t.amplitude * s,
                ..t.clone()
            })
            .collect();
        Self::new(self.dim, terms)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let arg: f64 = t.freq.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                t.amplitude * (arg + t.phase).cos()
            })
            .sum()
    }

    /// Partial derivative `∂^α` evaluated in closed form.
    pub fn eval_partial(&self, x: &[f64], exps: &[u8]) -> f64 {
        let order: usize = exps.iter().map(|&e| e as usize).sum();
        self.terms
            .iter()
            .map(|t| {
                let arg: f64 = t.freq.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                let coef: f64 = t
                    .freq
                    .iter()
                    .zip(exps)
                    .map(|(&k, &e)| (k as f64).powi(e as i32))
                    .product();
                // d^m/dθ^m cos θ = cos(θ + mπ/2)
                t.amplitude * coef * (arg + t.phase + order as f64 * std::f64::consts::FRAC_PI_2).cos()
            })
            .sum()
    }

    /// The polynomial evaluated on coordinate jets.
    pub fn jet(&self, x: &[Jet]) -> Jet {
        let space = x[0].space().clone();
        let order = x.iter().map(Jet::order).min().unwrap();
        let mut acc = Jet::zero(&space, order);
        for t in &self.terms {
            let mut arg = Jet::constant(&space, order, t.phase);
            for (&k, xi) in t.freq.iter().zip(x) {
                if k != 0 {
                    arg.axpy(k as f64, xi);
                }
            }
            acc.axpy(t.amplitude, &arg.cos());
        }
        acc
    }
}
