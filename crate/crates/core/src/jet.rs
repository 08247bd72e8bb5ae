//! Truncated multivariate Taylor series ("jets") about a chart point.
//!
//! A [`Jet`] of order `K` in `n` variables stores the Taylor coefficients
//! `c_α` of a smooth function `f(p + t) = Σ_{|α| ≤ K} c_α t^α`. Arithmetic and
//! elementary functions act on the truncated series, so every quantity built
//! from metric components (inverse metric, Christoffels, curvature and its
//! covariant derivatives) is carried with exact partial derivatives up to the
//! order that survives differentiation. Differentiating lowers the order by
//! one; products truncate to the smaller order of their factors.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

const NONE: u32 = u32::MAX;

/// Monomial tables shared by all jets with the same variable count and
/// maximal order.
pub struct JetSpace {
    nvars: usize,
    order: usize,
    exps: Vec<Vec<u8>>,
    degree_end: Vec<usize>,
    raise: Vec<Vec<u32>>,
    pairs: Vec<(u32, u32, u32)>,
    pair_end: Vec<usize>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("nvars", &self.nvars)
            .field("order", &self.order)
            .field("monomials", &self.exps.len())
            .finish()
    }
}

impl JetSpace {
    pub fn new(nvars: usize, order: usize) -> Arc<Self> {
        // Graded ordering: all monomials of degree d precede degree d+1, so a
        // truncation to order m is a prefix of the coefficient vector.
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut degree_end = Vec::with_capacity(order + 1);
        for d in 0..=order {
            let mut cur = vec![0u8; nvars];
            push_monomials(&mut exps, &mut cur, 0, d);
            degree_end.push(exps.len());
        }
        let index: HashMap<Vec<u8>, u32> = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i as u32))
            .collect();

        let mut raise = vec![vec![NONE; exps.len()]; nvars];
        for (m, e) in exps.iter().enumerate() {
            for (i, r) in raise.iter_mut().enumerate() {
                let mut up = e.clone();
                up[i] += 1;
                if let Some(&j) = index.get(&up) {
                    r[m] = j;
                }
            }
        }

        let deg = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();
        let mut pairs = Vec::new();
        for (a, ea) in exps.iter().enumerate() {
            for (b, eb) in exps.iter().enumerate() {
                if deg(ea) + deg(eb) > order {
                    continue;
                }
                let sum: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                pairs.push((a as u32, b as u32, index[&sum]));
            }
        }
        pairs.sort_by_key(|&(_, _, c)| c);
        let mut pair_end = Vec::with_capacity(order + 1);
        for d in 0..=order {
            let limit = degree_end[d] as u32;
            pair_end.push(pairs.partition_point(|&(_, _, c)| c < limit));
        }

        Arc::new(Self {
            nvars,
            order,
            exps,
            degree_end,
            raise,
            pairs,
            pair_end,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of Taylor coefficients of a jet truncated at `order`.
    pub fn len(&self, order: usize) -> usize {
        self.degree_end[order]
    }

    pub fn exponents(&self, m: usize) -> &[u8] {
        &self.exps[m]
    }

    fn index_of(&self, exps: &[u8]) -> Option<usize> {
        let d: usize = exps.iter().map(|&x| x as usize).sum();
        if d > self.order {
            return None;
        }
        let start = if d == 0 { 0 } else { self.degree_end[d - 1] };
        (start..self.degree_end[d]).find(|&m| self.exps[m] == exps)
    }
}

fn push_monomials(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, var: usize, remaining: usize) {
    if var + 1 == cur.len() {
        cur[var] = remaining as u8;
        out.push(cur.clone());
        cur[var] = 0;
        return;
    }
    if cur.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=remaining).rev() {
        cur[var] = k as u8;
        push_monomials(out, cur, var + 1, remaining - k);
    }
    cur[var] = 0;
}

/// A truncated Taylor series about a fixed point.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    coef: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("value", &self.value())
            .finish()
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, order: usize, value: f64) -> Self {
        assert!(order <= space.order, "jet order exceeds its space");
        let mut coef = vec![0.0; space.len(order)];
        coef[0] = value;
        Self {
            space: space.clone(),
            order,
            coef,
        }
    }

    pub fn zero(space: &Arc<JetSpace>, order: usize) -> Self {
        Self::constant(space, order, 0.0)
    }

    /// The coordinate function `x_i` expanded about `x_i = value`.
    pub fn variable(space: &Arc<JetSpace>, order: usize, i: usize, value: f64) -> Self {
        let mut j = Self::constant(space, order, value);
        if order >= 1 {
            j.coef[1 + i] = 1.0;
        }
        j
    }

    /// Coordinate jets `x_0 … x_{n-1}` about `point`.
    pub fn coordinates(space: &Arc<JetSpace>, order: usize, point: &[f64]) -> Vec<Self> {
        assert_eq!(point.len(), space.nvars);
        point
            .iter()
            .enumerate()
            .map(|(i, &p)| Self::variable(space, order, i, p))
            .collect()
    }

    /// Taylor coefficients in graded monomial order.
    pub fn from_coefficients(space: &Arc<JetSpace>, order: usize, coef: Vec<f64>) -> Self {
        assert_eq!(coef.len(), space.len(order));
        Self {
            space: space.clone(),
            order,
            coef,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coef.iter().all(|&c| c == 0.0)
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    /// The partial derivative `∂^α f` at the expansion point.
    pub fn partial(&self, exps: &[u8]) -> f64 {
        let m = self
            .space
            .index_of(exps)
            .filter(|&m| m < self.coef.len())
            .expect("derivative order exceeds jet order");
        let fact: f64 = exps.iter().map(|&k| factorial(k as usize)).product();
        self.coef[m] * fact
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self {
            space: self.space.clone(),
            order,
            coef: self.coef[..self.space.len(order)].to_vec(),
        }
    }

    /// `∂f/∂x_i`, one order lower.
    pub fn derivative(&self, i: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let len = self.space.len(order);
        let raise = &self.space.raise[i];
        let coef = (0..len)
            .map(|m| {
                let up = raise[m] as usize;
                (self.space.exps[m][i] as f64 + 1.0) * self.coef[up]
            })
            .collect();
        Self {
            space: self.space.clone(),
            order,
            coef,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            space: self.space.clone(),
            order: self.order,
            coef: self.coef.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coef[0] += s;
        out
    }

    /// `self += s * other`, truncating to the smaller order.
    pub fn axpy(&mut self, s: f64, other: &Jet) {
        if other.order < self.order {
            self.order = other.order;
            self.coef.truncate(self.space.len(self.order));
        }
        for (a, b) in self.coef.iter_mut().zip(&other.coef) {
            *a += s * b;
        }
    }

    /// `self += a * b`.
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        let order = self.order.min(a.order).min(b.order);
        if order < self.order {
            self.order = order;
            self.coef.truncate(self.space.len(order));
        }
        for &(i, j, k) in &self.space.pairs[..self.space.pair_end[order]] {
            self.coef[k as usize] += a.coef[i as usize] * b.coef[j as usize];
        }
    }

    fn binary(&self, other: &Jet, sign: f64) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space));
        let order = self.order.min(other.order);
        let len = self.space.len(order);
        let coef = (0..len).map(|m| self.coef[m] + sign * other.coef[m]).collect();
        Jet {
            space: self.space.clone(),
            order,
            coef,
        }
    }

    fn product(&self, other: &Jet) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space));
        let order = self.order.min(other.order);
        let mut coef = vec![0.0; self.space.len(order)];
        for &(i, j, k) in &self.space.pairs[..self.space.pair_end[order]] {
            coef[k as usize] += self.coef[i as usize] * other.coef[j as usize];
        }
        Jet {
            space: self.space.clone(),
            order,
            coef,
        }
    }

    /// Applies a scalar function given its derivatives `f, f', f'', …` at
    /// the value of `self` (at least `order + 1` of them).
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        assert!(derivs.len() > self.order);
        let mut h = self.clone();
        h.coef[0] = 0.0;
        let k = self.order;
        let mut acc = Jet::constant(&self.space, k, derivs[k] / factorial(k));
        for j in (0..k).rev() {
            acc = acc.product(&h).add_scalar(derivs[j] / factorial(j));
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }

    pub fn ln(&self) -> Jet {
        let x = self.value();
        let mut d = vec![x.ln()];
        for k in 1..=self.order {
            // d^k/dx^k ln x = (-1)^{k-1} (k-1)! / x^k
            let s = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(s * factorial(k - 1) / x.powi(k as i32));
        }
        self.compose(&d)
    }

    pub fn powf(&self, p: f64) -> Jet {
        let x = self.value();
        let mut d = Vec::with_capacity(self.order + 1);
        let mut falling = 1.0;
        for k in 0..=self.order {
            d.push(falling * x.powf(p - k as f64));
            falling *= p - k as f64;
        }
        self.compose(&d)
    }

    pub fn recip(&self) -> Jet {
        self.powf(-1.0)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let d: Vec<f64> = (0..=self.order).map(|k| [s, c, -s, -c][k % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let d: Vec<f64> = (0..=self.order).map(|k| [c, -s, -c, s][k % 4]).collect();
        self.compose(&d)
    }

    /// Re-expresses the jet in a larger space, sending variable `i` of this
    /// jet to variable `var_map[i]` of `target`.
    pub fn embed(&self, target: &Arc<JetSpace>, var_map: &[usize]) -> Jet {
        assert_eq!(var_map.len(), self.space.nvars);
        let order = self.order.min(target.order);
        let mut coef = vec![0.0; target.len(order)];
        let mut e = vec![0u8; target.nvars];
        for m in 0..self.space.len(order) {
            e.iter_mut().for_each(|x| *x = 0);
            for (i, &v) in var_map.iter().enumerate() {
                e[v] = self.space.exps[m][i];
            }
            let t = target.index_of(&e).expect("monomial outside target space");
            coef[t] = self.coef[m];
        }
        Jet {
            space: target.clone(),
            order,
            coef,
        }
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.binary(rhs, 1.0)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.binary(rhs, -1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

/// Determinant and inverse of a small square matrix of jets by Gaussian
/// elimination with pivoting on the constant terms.
pub fn inverse_and_det(m: &[Jet], n: usize) -> (Vec<Jet>, Jet) {
    assert_eq!(m.len(), n * n);
    let space = m[0].space().clone();
    let order = m.iter().map(Jet::order).min().unwrap_or(0);
    let mut a: Vec<Jet> = m.iter().map(|x| x.truncate(order)).collect();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| Jet::constant(&space, order, if k / n == k % n { 1.0 } else { 0.0 }))
        .collect();
    let mut det = Jet::constant(&space, order, 1.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| {
                a[r * n + col]
                    .value()
                    .abs()
                    .total_cmp(&a[s * n + col].value().abs())
            })
            .unwrap();
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
                inv.swap(pivot * n + k, col * n + k);
            }
            det = det.scale(-1.0);
        }
        let p = a[col * n + col].clone();
        det = &det * &p;
        let pinv = p.recip();
        for k in 0..n {
            a[col * n + k] = &a[col * n + k] * &pinv;
            inv[col * n + k] = &inv[col * n + k] * &pinv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col].clone();
            if f.coefficients().iter().all(|&c| c == 0.0) {
                continue;
            }
            for k in 0..n {
                let t = &f * &a[col * n + k];
                a[r * n + k] = &a[r * n + k] - &t;
                let t = &f * &inv[col * n + k];
                inv[r * n + k] = &inv[r * n + k] - &t;
            }
        }
    }
    (inv, det)
}
