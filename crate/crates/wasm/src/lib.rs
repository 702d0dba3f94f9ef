//! Three browser operations on the Machina urns and a two-state capacity.
//!
//! Each export returns JSON. The plain functions in [`demo`] do the work and
//! are what the native tests call.

use wasm_bindgen::prelude::*;

pub mod demo;

fn js<T: serde::Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.map(|v| serde_json::to_string(&v).expect("demo output serializes")).map_err(|e| JsError::new(&e))
}

/// Values of f1..f4 in the 50–51 urn as the cost slope varies.
#[wasm_bindgen]
pub fn slope_sweep(from: f64, to: f64, steps: usize) -> Result<String, JsError> {
    js(demo::slope_sweep(from, to, steps))
}

/// Net objective over the (beta, gamma) box for one act.
#[wasm_bindgen]
pub fn objective_grid(example: &str, act: &str, slope: f64, n: usize) -> Result<String, JsError> {
    js(demo::objective_grid(example, act, slope, n))
}

/// Core and Choquet integral of a two-state capacity.
#[wasm_bindgen]
pub fn two_state_choquet(red: f64, blue: f64, pay_red: f64, pay_blue: f64) -> Result<String, JsError> {
    js(demo::two_state_choquet(red, blue, pay_red, pay_blue))
}
