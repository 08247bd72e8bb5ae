//! Three interactive operations for the static page in `www/`.

use std::f64::consts::PI;
use std::sync::Arc;

use qlab_core::charforms::{pontrjagin_form, CurvatureSource};
use qlab_core::formgrid::sphere::SphereGrid;
use qlab_core::metrics::{curvature, dim4_specials, MetricSpec};
use qlab_core::qfunc::{functional_h, push_forward, GaussQuantity, Mobius, Scale};
use qlab_core::qops::cp2_product_eigen;
use wasm_bindgen::prelude::*;

fn js_err(e: qlab_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[ν, expected λ, computed λ, eigen residual, κ·Q₄κ]` for `CP² × N⁶`
/// with `Scal(N⁶) = ν`.
#[wasm_bindgen]
pub fn cp2_eigen(nu: f64) -> Result<Box<[f64]>, JsError> {
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(JsError::new("ν must be a nonnegative number"));
    }
    let e = cp2_product_eigen(nu, &[0.3, -0.2, 0.1, 0.25, 0.4, 1.1, 0.9, 1.3, 0.7, 1.2]).map_err(js_err)?;
    Ok(vec![e.nu, e.expected, e.lambda, e.residual, e.density].into_boxed_slice())
}

/// `[p₁/E·π², ∫p₁, ∫Pff, ∫L]` for Fubini-Study `CP²` at a chart point.
#[wasm_bindgen]
pub fn cp2_characteristic(x: f64, y: f64, z: f64, w: f64) -> Result<Box<[f64]>, JsError> {
    let cp2 = MetricSpec::FubiniStudyCp2;
    let vol = cp2.volume().unwrap_or(PI * PI / 2.0);
    let pack = curvature(&cp2.jet(&[x, y, z, w], 2).map_err(js_err)?, 0).map_err(js_err)?;
    let sp = dim4_specials(&pack).map_err(js_err)?;
    let p1 = pontrjagin_form(&pack, 1, CurvatureSource::Riemann).map_err(js_err)?;
    let ratio = p1.comps()[0] / pack.metric.volume_form().comps()[0];
    Ok(vec![ratio * PI * PI, ratio * vol, sp.pfaffian * vol, sp.hirzebruch_l * vol].into_boxed_slice())
}

/// Gauss curvature functional `ℋ` of `e^{2ρ}g₀` on `S²` before and after a
/// dilation by `lambda`, with `ρ = amp·(x₃ + 0.5 x₁x₂)`: `[ℋ(g), ℋ(h·g), difference]`.
#[wasm_bindgen]
pub fn onofri(lambda: f64, amp: f64) -> Result<Box<[f64]>, JsError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(JsError::new("λ must be positive"));
    }
    let grid = Arc::new(SphereGrid::new(32));
    let q = GaussQuantity::new(grid.clone());
    let rho = grid.sample(|p| amp * (p[2] + 0.5 * p[0] * p[1]));
    let coeffs = grid.analysis(&rho);
    let h = Mobius::dilation(lambda);
    let moved = push_forward(&grid, &h, &coeffs);
    let g0 = Scale::base(grid.len());
    let before = functional_h(&q, &Scale::new(grid.synthesis(&coeffs)), &g0).map_err(js_err)?;
    let after = functional_h(&q, &Scale::new(moved), &g0).map_err(js_err)?;
    Ok(vec![before, after, (after - before).abs()].into_boxed_slice())
}
