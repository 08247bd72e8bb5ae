//! Spectral exterior calculus on structured grids.
//!
//! [`TorusGrid`] carries periodic fields on `[0, 2π)^n` with per-axis
//! resolution and Fourier differentiation; metrics on it are conformally
//! flat, `ĝ = e^{2ω}δ`. [`sphere::SphereGrid`] is a Gauss–Legendre ×
//! uniform longitude grid with a real spherical-harmonic transform.

pub mod sphere;
mod torus;

pub use torus::{
    coupled_d, coupled_delta, coderivative, exterior_d, inner_product, integrate_density, pointwise_dot,
    Action, ConformalMetric, ConnectionField, FormField, TorusGrid,
};
