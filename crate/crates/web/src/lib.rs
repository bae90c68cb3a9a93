//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export is a thin wrapper over a plain Rust function so the logic is
//! testable natively.

use qebt::decompose::{decompose_constructive, decompose_numeric_seeded};
use qebt::region::{ebt_lens, trace_boundary, Point2};
use qebt::{channel_from_canonical, classify, to_canonical, Error};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const DEMO_CANDIDATES: usize = 300;
const DEMO_FIT_TOL: f64 = 1e-6;
const DEMO_SEED: u64 = 42;

pub fn classify_json(t: [f64; 3], lambda: [f64; 3], tol: f64) -> String {
    qebt::io::to_json(&classify(&channel_from_canonical(t, lambda), tol))
}

/// Boundary and lens of the `λ₊`-`λ₋` plane, flattened as `x0, y0, x1, y1, …`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plane {
    pub boundary: Vec<f64>,
    pub lens: Vec<f64>,
}

fn flatten(points: &[Point2]) -> Vec<f64> {
    points.iter().flat_map(|p| *p).collect()
}

pub fn plane(t: [f64; 3], lambda3: f64, rays: usize) -> Result<Plane, Error> {
    Ok(Plane { boundary: flatten(&trace_boundary(t, lambda3, rays)?), lens: flatten(&ebt_lens(t, lambda3, rays)?) })
}

#[derive(Serialize)]
struct DemoDecomposition {
    method: &'static str,
    #[serde(flatten)]
    decomposition: qebt::CqDecomposition,
}

pub fn decompose_json(t: [f64; 3], lambda: [f64; 3]) -> Result<String, Error> {
    let cf = to_canonical(&channel_from_canonical(t, lambda));
    let (method, decomposition) = match decompose_constructive(&cf) {
        Ok(d) => ("constructive", d),
        Err(Error::NotCovered) => ("numeric", decompose_numeric_seeded(&cf, DEMO_CANDIDATES, DEMO_FIT_TOL, DEMO_SEED)?),
        Err(e) => return Err(e),
    };
    Ok(qebt::io::to_json(&DemoDecomposition { method, decomposition }))
}

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = classify)]
pub fn classify_js(t1: f64, t2: f64, t3: f64, l1: f64, l2: f64, l3: f64) -> String {
    classify_json([t1, t2, t3], [l1, l2, l3], qebt::DEFAULT_TOL)
}

/// JSON `{"boundary": [..], "lens": [..]}` with flattened coordinates.
#[wasm_bindgen(js_name = plane)]
pub fn plane_js(t1: f64, t2: f64, t3: f64, l3: f64, rays: usize) -> Result<String, JsError> {
    plane([t1, t2, t3], l3, rays).map(|p| qebt::io::to_json(&p)).map_err(js_err)
}

#[wasm_bindgen(js_name = decompose)]
pub fn decompose_js(t1: f64, t2: f64, t3: f64, l1: f64, l2: f64, l3: f64) -> Result<String, JsError> {
    decompose_json([t1, t2, t3], [l1, l2, l3]).map_err(js_err)
}
