//! Metric catalog with exact jets and the curvature pipeline
//! (Christoffel → Riemann → Ricci → Schouten → Weyl → Cotton and one more
//! level of covariant derivatives).
//!
//! Conventions: `R_{abcd} = g(R(∂_c, ∂_d)∂_b, ∂_a)` with
//! `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_{[X,Y]}`, `Ric_{bd} = R^a{}_{bad}`, so the unit
//! sphere has `R_{abcd} = g_{ac}g_{bd} − g_{ad}g_{bc}`. The first index pair
//! is the endomorphism pair and the second the 2-form pair; by pair symmetry
//! this agrees with writing the form indices first.
//! `J = Scal / 2(n−1)`, `P = (Ric − J g)/(n−2)`, `R = C + P ⊙ g`
//! (Kulkarni–Nomizu), Cotton `A_{abc} = ∇_c P_{ba} − ∇_b P_{ca}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::jet::{inverse_and_det, Jet, JetSpace};
use crate::tensor::{hodge_star, Form, MetricAtPoint, TensorPoint, Variance};
use crate::trig::TrigPoly;

pub type ScalarFn = Arc<dyn Fn(&[Jet]) -> Jet + Send + Sync>;

/// A conformal factor `ω` given as an analytic expression of the chart
/// coordinates, evaluated on jets.
#[derive(Clone)]
pub struct ConformalFactor {
    label: String,
    f: ScalarFn,
}

impl fmt::Debug for ConformalFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConformalFactor({})", self.label)
    }
}

impl ConformalFactor {
    pub fn new(label: impl Into<String>, f: ScalarFn) -> Self {
        Self {
            label: label.into(),
            f,
        }
    }

    pub fn trig(p: TrigPoly) -> Self {
        Self::new("trig", Arc::new(move |x: &[Jet]| p.jet(x)))
    }

    pub fn constant(c: f64) -> Self {
        Self::new(
            format!("const {c}"),
            Arc::new(move |x: &[Jet]| Jet::constant(x[0].space(), x[0].order(), c)),
        )
    }

    pub fn eval(&self, x: &[Jet]) -> Jet {
        (self.f)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Entries of the metric catalog.
#[derive(Debug, Clone)]
pub enum MetricSpec {
    FlatTorus { dim: usize },
    /// Round sphere of the given radius in the stereographic chart.
    RoundSphere { dim: usize, radius: f64 },
    /// Fubini–Study on the affine chart of C², normalised to Scal = 24.
    FubiniStudyCp2,
    /// Constant sectional curvature `curvature < 0` in the ball chart.
    Hyperbolic { dim: usize, curvature: f64 },
    Product(Box<MetricSpec>, Box<MetricSpec>),
    Conformal {
        base: Box<MetricSpec>,
        omega: ConformalFactor,
    },
}

/// Named catalog lookup with numeric parameters.
pub fn catalog(name: &str, params: &[f64]) -> Result<MetricSpec> {
    let dim = |i: usize| -> Result<usize> {
        params
            .get(i)
            .map(|&d| d as usize)
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::Unsupported(format!("{name} needs a dimension parameter")))
    };
    match name {
        "flat_torus" => Ok(MetricSpec::FlatTorus { dim: dim(0)? }),
        "round_sphere" => Ok(MetricSpec::RoundSphere {
            dim: dim(0)?,
            radius: params.get(1).copied().unwrap_or(1.0),
        }),
        "fubini_study_cp2" => Ok(MetricSpec::FubiniStudyCp2),
        "hyperbolic" => Ok(MetricSpec::Hyperbolic {
            dim: dim(0)?,
            curvature: params.get(1).copied().unwrap_or(-1.0),
        }),
        other => Err(Error::UnknownMetric(other.to_string())),
    }
}

impl MetricSpec {
    pub fn product(a: MetricSpec, b: MetricSpec) -> Self {
        MetricSpec::Product(Box::new(a), Box::new(b))
    }

    pub fn conformal(base: MetricSpec, omega: ConformalFactor) -> Self {
        MetricSpec::Conformal {
            base: Box::new(base),
            omega,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MetricSpec::FlatTorus { dim }
            | MetricSpec::RoundSphere { dim, .. }
            | MetricSpec::Hyperbolic { dim, .. } => *dim,
            MetricSpec::FubiniStudyCp2 => 4,
            MetricSpec::Product(a, b) => a.dim() + b.dim(),
            MetricSpec::Conformal { base, .. } => base.dim(),
        }
    }

    /// Total volume where the catalog knows it.
    pub fn volume(&self) -> Option<f64> {
        match self {
            MetricSpec::RoundSphere { dim, radius } => {
                Some(sphere_volume(*dim) * radius.powi(*dim as i32))
            }
            MetricSpec::FubiniStudyCp2 => Some(PI * PI / 2.0),
            MetricSpec::FlatTorus { dim } => Some((2.0 * PI).powi(*dim as i32)),
            MetricSpec::Product(a, b) => Some(a.volume()? * b.volume()?),
            _ => None,
        }
    }

    /// Metric components on coordinate jets.
    pub fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let space = x[0].space().clone();
        let order = x[0].order();
        let zero = Jet::zero(&space, order);
        let diag = |factor: Jet| -> Vec<Jet> {
            (0..n * n)
                .map(|k| if k / n == k % n { factor.clone() } else { zero.clone() })
                .collect()
        };
        let r2 = || {
            let mut acc = Jet::zero(&space, order);
            for xi in x {
                acc.add_product(xi, xi);
            }
            acc
        };
        match self {
            MetricSpec::FlatTorus { .. } => Ok(diag(Jet::constant(&space, order, 1.0))),
            MetricSpec::RoundSphere { radius, .. } => {
                // 4 r² / (1 + |x|²)²
                let q = r2().add_scalar(1.0).powf(-2.0).scale(4.0 * radius * radius);
                Ok(diag(q))
            }
            MetricSpec::Hyperbolic { curvature, .. } => {
                if *curvature >= 0.0 {
                    return Err(Error::Unsupported("hyperbolic curvature must be negative".into()));
                }
                let s = r2();
                if s.value() >= 1.0 {
                    return Err(Error::Unsupported("point outside the ball chart".into()));
                }
                let q = s.scale(-1.0).add_scalar(1.0).powf(-2.0).scale(-4.0 / curvature);
                Ok(diag(q))
            }
            MetricSpec::FubiniStudyCp2 => Ok(fubini_study(x)),
            MetricSpec::Product(a, b) => {
                let na = a.dim();
                let ga = a.components(&x[..na])?;
                let gb = b.components(&x[na..])?;
                let nb = n - na;
                let mut g = vec![zero.clone(); n * n];
                for i in 0..na {
                    for j in 0..na {
                        g[i * n + j] = ga[i * na + j].clone();
                    }
                }
                for i in 0..nb {
                    for j in 0..nb {
                        g[(na + i) * n + na + j] = gb[i * nb + j].clone();
                    }
                }
                Ok(g)
            }
            MetricSpec::Conformal { base, omega } => {
                let w = omega.eval(x).scale(2.0).exp();
                Ok(base.components(x)?.iter().map(|c| c * &w).collect())
            }
        }
    }

    /// The metric jet of the given order at `point`.
    pub fn jet(&self, point: &[f64], order: usize) -> Result<MetricJet> {
        let space = JetSpace::new(self.dim(), order);
        self.jet_in(&space, point)
    }

    pub fn jet_in(&self, space: &Arc<JetSpace>, point: &[f64]) -> Result<MetricJet> {
        let x = Jet::coordinates(space, space.order(), point);
        let g = self.components(&x)?;
        Ok(MetricJet {
            dim: self.dim(),
            point: point.to_vec(),
            g,
            orientation: 1.0,
        })
    }
}

/// Volume of the unit round sphere `S^n`.
pub fn sphere_volume(n: usize) -> f64 {
    // ϖ_n = 2 π^{(n+1)/2} / Γ((n+1)/2)
    let half = (n as f64 + 1.0) / 2.0;
    2.0 * PI.powf(half) / gamma_half_integer(half)
}

fn gamma_half_integer(x: f64) -> f64 {
    // Γ on positive integers and half-integers.
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as usize).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut t = 0.5;
        while t < x - 1e-12 {
            g *= t;
            t += 1.0;
        }
        g
    }
}

fn fubini_study(x: &[Jet]) -> Vec<Jet> {
    // Real coordinates (x₁, y₁, x₂, y₂), z_j = x_j + i y_j, Kähler potential
    // log(1 + |z|²); h_{jk̄} = ((1+|z|²)δ_{jk} − z̄_j z_k)/(1+|z|²)².
    let space = x[0].space().clone();
    let order = x[0].order();
    let re = [&x[0], &x[2]];
    let im = [&x[1], &x[3]];
    let mut r2 = Jet::zero(&space, order);
    for xi in x {
        r2.add_product(xi, xi);
    }
    let one_r2 = r2.add_scalar(1.0);
    let inv2 = one_r2.powf(-2.0);
    let mut g = vec![Jet::zero(&space, order); 16];
    for j in 0..2 {
        for k in 0..2 {
            // z̄_j z_k = (x_j x_k + y_j y_k) + i (x_j y_k − y_j x_k)
            let zz_re = &(re[j] * re[k]) + &(im[j] * im[k]);
            let zz_im = &(re[j] * im[k]) - &(im[j] * re[k]);
            let mut h_re = -&zz_re;
            if j == k {
                h_re = &h_re + &one_r2;
            }
            let h_re = &h_re * &inv2;
            let h_im = &(-&zz_im) * &inv2;
            let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
            g[xj * 4 + xk] = h_re.clone();
            g[yj * 4 + yk] = h_re;
            g[xj * 4 + yk] = h_im.clone();
            g[yj * 4 + xk] = -&h_im;
        }
    }
    g
}

/// Metric components with exact partial derivatives at a chart point.
#[derive(Debug, Clone)]
pub struct MetricJet {
    dim: usize,
    point: Vec<f64>,
    g: Vec<Jet>,
    orientation: f64,
}

impl MetricJet {
    pub fn from_components(point: Vec<f64>, g: Vec<Jet>) -> Result<Self> {
        let n = point.len();
        if g.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: g.len(),
            });
        }
        Ok(Self {
            dim: n,
            point,
            g,
            orientation: 1.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn order(&self) -> usize {
        self.g.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        self.g[0].space()
    }

    pub fn components(&self) -> &[Jet] {
        &self.g
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn with_orientation(mut self, orientation: f64) -> Self {
        self.orientation = orientation.signum();
        self
    }

    /// `∂_{i₁}…∂_{i_m} g_{ab}` flattened as `[a][b][i₁]…[i_m]`.
    pub fn partials(&self, m: usize) -> Result<Vec<f64>> {
        if m > self.order() {
            return Err(Error::InsufficientJetOrder {
                needed: m,
                have: self.order(),
            });
        }
        let n = self.dim;
        let count = n.pow(m as u32);
        let mut out = Vec::with_capacity(n * n * count);
        let mut exps = vec![0u8; n];
        for gab in &self.g {
            for flat in 0..count {
                exps.iter_mut().for_each(|e| *e = 0);
                let mut f = flat;
                for _ in 0..m {
                    exps[f % n] += 1;
                    f /= n;
                }
                out.push(gab.partial(&exps));
            }
        }
        Ok(out)
    }

    pub fn at_point(&self) -> MetricAtPoint {
        let g = self.g.iter().map(Jet::value).collect();
        MetricAtPoint::new(self.dim, g, self.orientation).expect("metric is non-degenerate")
    }
}

/// A metric jet at the origin equal to `δ` plus small random Taylor terms,
/// for probing pointwise identities away from special geometries.
pub fn random_metric_jet<R: Rng>(rng: &mut R, dim: usize, order: usize, amplitude: f64) -> MetricJet {
    let space = JetSpace::new(dim, order);
    let len = space.len(order);
    let mut g = vec![Jet::zero(&space, order); dim * dim];
    for a in 0..dim {
        for b in a..dim {
            let mut coef: Vec<f64> = (0..len).map(|_| amplitude * rng.gen_range(-1.0..1.0)).collect();
            coef[0] = if a == b { 1.0 } else { 0.0 };
            let j = Jet::from_coefficients(&space, order, coef);
            g[a * dim + b] = j.clone();
            g[b * dim + a] = j;
        }
    }
    MetricJet {
        dim,
        point: vec![0.0; dim],
        g,
        orientation: 1.0,
    }
}

/// `ĝ = e^{2ω} g` with ω given as a jet in the same space.
pub fn conformal_rescale(jet: &MetricJet, omega: &Jet) -> Result<MetricJet> {
    if omega.order() < jet.order() {
        return Err(Error::InsufficientJetOrder {
            needed: jet.order(),
            have: omega.order(),
        });
    }
    if !Arc::ptr_eq(omega.space(), jet.space()) {
        return Err(Error::DimensionMismatch {
            expected: jet.dim(),
            got: omega.space().nvars(),
        });
    }
    let w = omega.scale(2.0).exp();
    Ok(MetricJet {
        dim: jet.dim,
        point: jet.point.clone(),
        g: jet.g.iter().map(|c| c * &w).collect(),
        orientation: jet.orientation,
    })
}

/// Covariant tensor whose components are jets, row-major in slot order.
#[derive(Debug, Clone)]
pub struct JetTensor {
    dim: usize,
    rank: usize,
    data: Vec<Jet>,
}

impl JetTensor {
    pub fn from_fn(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> Jet) -> Self {
        let len = dim.pow(rank as u32);
        let mut idx = vec![0; rank];
        let data = (0..len)
            .map(|flat| {
                let mut r = flat;
                for s in (0..rank).rev() {
                    idx[s] = r % dim;
                    r /= dim;
                }
                f(&idx)
            })
            .collect();
        Self { dim, rank, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[Jet] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.data[idx.iter().fold(0, |acc, &i| acc * self.dim + i)]
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn value(&self) -> TensorPoint {
        TensorPoint::from_data(
            self.dim,
            vec![Variance::Lower; self.rank],
            self.data.iter().map(Jet::value).collect(),
        )
        .expect("consistent size")
    }

    /// `(∇_e T)_{a₁…a_r}` stored with the derivative index first.
    pub fn covariant_derivative(&self, gamma: &[Jet]) -> JetTensor {
        let n = self.dim;
        let r = self.rank;
        JetTensor::from_fn(n, r + 1, |idx| {
            let e = idx[0];
            let a = &idx[1..];
            let mut acc = self.get(a).derivative(e);
            let mut b = a.to_vec();
            for s in 0..r {
                for f in 0..n {
                    let gm = &gamma[(f * n + e) * n + a[s]];
                    if gm.coefficients().iter().all(|&c| c == 0.0) {
                        continue;
                    }
                    b[s] = f;
                    let t = gm * self.get(&b);
                    acc.axpy(-1.0, &t);
                }
                b[s] = a[s];
            }
            acc
        })
    }
}

/// Jet-valued curvature data; `order` of each field is the metric order
/// minus the number of derivatives it contains.
#[derive(Debug, Clone)]
pub struct CurvatureJets {
    pub dim: usize,
    pub g: Vec<Jet>,
    pub g_inv: Vec<Jet>,
    /// `Γ^a_{bc}` as `[a][b][c]`.
    pub gamma: Vec<Jet>,
    pub riemann: JetTensor,
    pub ricci: JetTensor,
    pub scal: Jet,
    /// Present for `n ≥ 3`.
    pub schouten: Option<JetTensor>,
    pub j: Option<Jet>,
    pub weyl: Option<JetTensor>,
    /// `∇_e P_{ab}` as `[e][a][b]`, for depth ≥ 1.
    pub nabla_p: Option<JetTensor>,
    pub nabla_c: Option<JetTensor>,
    pub cotton: Option<JetTensor>,
    /// Depth ≥ 2.
    pub nabla_a: Option<JetTensor>,
    pub nabla2_c: Option<JetTensor>,
    pub nabla2_p: Option<JetTensor>,
}

impl CurvatureJets {
    pub fn compute(jet: &MetricJet, depth: usize) -> Result<Self> {
        let n = jet.dim();
        let needed = depth + 2;
        if jet.order() < needed {
            return Err(Error::InsufficientJetOrder {
                needed,
                have: jet.order(),
            });
        }
        if depth > 0 && n < 3 {
            return Err(Error::Unsupported("Schouten tensor needs n ≥ 3".into()));
        }
        let g = jet.components().to_vec();
        let (g_inv, _) = inverse_and_det(&g, n);

        // Γ_{abc} = ½(∂_b g_{ac} + ∂_c g_{ab} − ∂_a g_{bc}); Γ^a_{bc} = g^{ad} Γ_{dbc}
        let dg: Vec<Vec<Jet>> = g
            .iter()
            .map(|gab| (0..n).map(|i| gab.derivative(i)).collect())
            .collect();
        let first: Vec<Jet> = (0..n * n * n)
            .map(|k| {
                let (a, b, c) = (k / (n * n), (k / n) % n, k % n);
                let t = &(&dg[a * n + c][b] + &dg[a * n + b][c]) - &dg[b * n + c][a];
                t.scale(0.5)
            })
            .collect();
        let gamma: Vec<Jet> = (0..n * n * n)
            .map(|k| {
                let (a, b, c) = (k / (n * n), (k / n) % n, k % n);
                let mut acc = Jet::zero(jet.space(), jet.order() - 1);
                for d in 0..n {
                    acc.add_product(&g_inv[a * n + d], &first[(d * n + b) * n + c]);
                }
                acc
            })
            .collect();
        let dgamma: Vec<Vec<Jet>> = gamma
            .iter()
            .map(|x| (0..n).map(|i| x.derivative(i)).collect())
            .collect();
        let gm = |a: usize, b: usize, c: usize| &gamma[(a * n + b) * n + c];

        // R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce} Γ^e_{db} − Γ^a_{de} Γ^e_{cb}
        let low = jet.order() - 2;
        let zero = Jet::zero(jet.space(), low);
        let mut rup = vec![zero.clone(); n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in (c + 1)..n {
                        let mut acc = &dgamma[(a * n + d) * n + b][c] - &dgamma[(a * n + c) * n + b][d];
                        for e in 0..n {
                            acc.add_product(gm(a, c, e), gm(e, d, b));
                            let t = gm(a, d, e) * gm(e, c, b);
                            acc.axpy(-1.0, &t);
                        }
                        rup[((a * n + b) * n + d) * n + c] = -&acc;
                        rup[((a * n + b) * n + c) * n + d] = acc;
                    }
                }
            }
        }
        let riemann = JetTensor::from_fn(n, 4, |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let mut acc = zero.clone();
            if c == d {
                return acc;
            }
            for e in 0..n {
                acc.add_product(&g[a * n + e], &rup[((e * n + b) * n + c) * n + d]);
            }
            acc
        });
        let ricci = JetTensor::from_fn(n, 2, |i| {
            let mut acc = zero.clone();
            for a in 0..n {
                acc = &acc + &rup[((a * n + i[0]) * n + a) * n + i[1]];
            }
            acc
        });
        let mut scal = zero.clone();
        for b in 0..n {
            for d in 0..n {
                scal.add_product(&g_inv[b * n + d], ricci.get(&[b, d]));
            }
        }

        let mut out = CurvatureJets {
            dim: n,
            g,
            g_inv,
            gamma,
            riemann,
            ricci,
            scal,
            schouten: None,
            j: None,
            weyl: None,
            nabla_p: None,
            nabla_c: None,
            cotton: None,
            nabla_a: None,
            nabla2_c: None,
            nabla2_p: None,
        };
        if n < 3 {
            return Ok(out);
        }

        let nf = n as f64;
        let j = out.scal.scale(1.0 / (2.0 * (nf - 1.0)));
        let schouten = JetTensor::from_fn(n, 2, |i| {
            let t = &out.ricci.get(i).clone() - &(&j * &out.g[i[0] * n + i[1]]);
            t.scale(1.0 / (nf - 2.0))
        });
        let weyl = JetTensor::from_fn(n, 4, |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let g = &out.g;
            let p = |x: usize, y: usize| schouten.get(&[x, y]);
            let mut acc = out.riemann.get(i).clone();
            acc.axpy(-1.0, &(&g[a * n + c] * p(b, d)));
            acc.axpy(1.0, &(&g[a * n + d] * p(b, c)));
            acc.axpy(-1.0, &(&g[b * n + d] * p(a, c)));
            acc.axpy(1.0, &(&g[b * n + c] * p(a, d)));
            acc
        });
        out.j = Some(j);

        if depth >= 1 {
            let np = schouten.covariant_derivative(&out.gamma);
            let nc = weyl.covariant_derivative(&out.gamma);
            // A_{abc} = ∇_c P_{ba} − ∇_b P_{ca}
            let cotton = JetTensor::from_fn(n, 3, |i| {
                let (a, b, c) = (i[0], i[1], i[2]);
                np.get(&[c, b, a]) - np.get(&[b, c, a])
            });
            if depth >= 2 {
                out.nabla_a = Some(cotton.covariant_derivative(&out.gamma));
                out.nabla2_c = Some(nc.covariant_derivative(&out.gamma));
                out.nabla2_p = Some(np.covariant_derivative(&out.gamma));
            }
            out.nabla_p = Some(np);
            out.nabla_c = Some(nc);
            out.cotton = Some(cotton);
        }
        out.schouten = Some(schouten);
        out.weyl = Some(weyl);
        Ok(out)
    }
}

/// Curvature data evaluated at the point.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub metric: MetricAtPoint,
    pub riemann: TensorPoint,
    pub ricci: TensorPoint,
    pub scal: f64,
    pub schouten: TensorPoint,
    pub j: f64,
    pub weyl: TensorPoint,
    pub cotton: Option<TensorPoint>,
    pub nabla_p: Option<TensorPoint>,
    pub nabla_c: Option<TensorPoint>,
    pub nabla_a: Option<TensorPoint>,
    pub nabla2_c: Option<TensorPoint>,
}

impl CurvaturePack {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// `P^a{}_b = g^{ac} P_{cb}` as an (upper, lower) tensor.
    pub fn schouten_endomorphism(&self) -> TensorPoint {
        self.schouten.raise(0, &self.metric).expect("rank-2 lower tensor")
    }
}

/// Runs the pipeline to the requested depth (0–2) and evaluates at the point.
pub fn curvature(jet: &MetricJet, depth: usize) -> Result<CurvaturePack> {
    if jet.dim() < 3 {
        return Err(Error::Unsupported("Schouten/Weyl need n ≥ 3".into()));
    }
    let cj = CurvatureJets::compute(jet, depth)?;
    Ok(pack_from_jets(&cj, jet))
}

pub fn pack_from_jets(cj: &CurvatureJets, jet: &MetricJet) -> CurvaturePack {
    let val = |t: &Option<JetTensor>| t.as_ref().map(JetTensor::value);
    CurvaturePack {
        metric: jet.at_point(),
        riemann: cj.riemann.value(),
        ricci: cj.ricci.value(),
        scal: cj.scal.value(),
        schouten: cj.schouten.as_ref().expect("n ≥ 3").value(),
        j: cj.j.as_ref().expect("n ≥ 3").value(),
        weyl: cj.weyl.as_ref().expect("n ≥ 3").value(),
        cotton: val(&cj.cotton),
        nabla_p: val(&cj.nabla_p),
        nabla_c: val(&cj.nabla_c),
        nabla_a: val(&cj.nabla_a),
        nabla2_c: val(&cj.nabla2_c),
    }
}

/// Scalar curvature for any dimension (including surfaces).
pub fn scalar_curvature(jet: &MetricJet) -> Result<f64> {
    Ok(CurvatureJets::compute(jet, 0)?.scal.value())
}

/// Self-dual/anti-self-dual split and the Euler and signature densities of
/// an oriented Riemannian 4-manifold.
#[derive(Debug, Clone)]
pub struct Dim4Specials {
    pub weyl_plus: TensorPoint,
    pub weyl_minus: TensorPoint,
    pub weyl_plus_sq: f64,
    pub weyl_minus_sq: f64,
    /// `(1/32π²)(|C|² − 8|S|² + 6J²)`, coefficient of the volume form.
    pub pfaffian: f64,
    /// `(1/48π²)(|C₊|² − |C₋|²)`.
    pub hirzebruch_l: f64,
}

/// Hodge star applied to the second (2-form) index pair of a 4-tensor.
pub fn star_second_pair(t: &TensorPoint, m: &MetricAtPoint) -> Result<TensorPoint> {
    let n = m.dim();
    let mut out = TensorPoint::zeros(n, vec![Variance::Lower; 4]);
    let pairs = crate::tensor::combos(n, 2);
    for a in 0..n {
        for b in 0..n {
            let comps = pairs.list.iter().map(|cd| t.get(&[a, b, cd[0], cd[1]])).collect();
            let f = hodge_star(&Form::from_comps(n, 2, comps)?, m)?;
            for (k, cd) in pairs.list.iter().enumerate() {
                out.set(&[a, b, cd[0], cd[1]], f.comps()[k]);
                out.set(&[a, b, cd[1], cd[0]], -f.comps()[k]);
            }
        }
    }
    Ok(out)
}

pub fn dim4_specials(pack: &CurvaturePack) -> Result<Dim4Specials> {
    let n = pack.dim();
    if n != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: n,
        });
    }
    let m = &pack.metric;
    let star = star_second_pair(&pack.weyl, m)?;
    let combine = |s: f64| {
        let data = pack
            .weyl
            .data()
            .iter()
            .zip(star.data())
            .map(|(c, sc)| 0.5 * (c + s * sc))
            .collect();
        TensorPoint::from_data(n, vec![Variance::Lower; 4], data).expect("size")
    };
    let weyl_plus = combine(1.0);
    let weyl_minus = combine(-1.0);
    let plus_sq = weyl_plus.norm_squared(m);
    let minus_sq = weyl_minus.norm_squared(m);
    let c_sq = pack.weyl.norm_squared(m);
    let mut s = pack.schouten.clone();
    for i in 0..n {
        for k in 0..n {
            let v = s.get(&[i, k]) - pack.j / n as f64 * m.g()[i * n + k];
            s.set(&[i, k], v);
        }
    }
    let s_sq = s.norm_squared(m);
    Ok(Dim4Specials {
        pfaffian: (c_sq - 8.0 * s_sq + 6.0 * pack.j * pack.j) / (32.0 * PI * PI),
        hirzebruch_l: (plus_sq - minus_sq) / (48.0 * PI * PI),
        weyl_plus,
        weyl_minus,
        weyl_plus_sq: plus_sq,
        weyl_minus_sq: minus_sq,
    })
}
