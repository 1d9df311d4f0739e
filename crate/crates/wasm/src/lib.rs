//! Browser bindings: isoquants, path traces and divergence curves as JSON.
//!
//! The `*_json` functions are plain Rust and carry the logic; the
//! `#[wasm_bindgen]` exports only convert errors to JavaScript values.

use std::collections::BTreeMap;

use bregman_epf::lda::{lda_mean, WeightedInputs};
use bregman_epf::transition::trace_path;
use bregman_epf::{catalog_generator, Generator};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn generator(family: &str, params_json: &str) -> Result<Generator, String> {
    let params: BTreeMap<String, f64> = if params_json.trim().is_empty() {
        BTreeMap::new()
    } else {
        serde_json::from_str(params_json).map_err(|e| format!("invalid parameters: {e}"))?
    };
    catalog_generator(family, &params).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Isoquant {
    level: f64,
    points: Vec<[f64; 2]>,
}

/// Two-input bundles with `μ_φ(x₁, x₂) = level` for x₁ on `[lo, hi]`.
pub fn isoquant_json(family: &str, params_json: &str, gammas: &[f64], level: f64, lo: f64, hi: f64, samples: usize) -> Result<String, String> {
    let g = generator(family, params_json)?;
    if gammas.len() != 2 || gammas.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err("two positive weights are required".into());
    }
    if samples < 2 || !(lo < hi) {
        return Err("need lo < hi and at least 2 samples".into());
    }
    g.divergence(level, level).map_err(|e| e.to_string())?;
    let total = gammas[0] + gammas[1];
    let target = total * g.u(level);
    let mut points = Vec::new();
    for k in 0..samples {
        let x1 = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        if !g.domain().contains(x1) {
            continue;
        }
        let x2 = g.u_inverse((target - gammas[0] * g.u(x1)) / gammas[1]);
        if x2.is_finite() && g.domain().contains(x2) {
            points.push([x1, x2]);
        }
    }
    to_json(&Isoquant { level, points })
}

/// Path trace from `from` to `to` with unit weights.
pub fn path_json(family: &str, params_json: &str, from: &[f64], to: &[f64], samples: usize) -> Result<String, String> {
    let g = generator(family, params_json)?;
    let trace = trace_path(&g, from, to, None, samples).map_err(|e| e.to_string())?;
    to_json(&trace)
}

#[derive(Serialize)]
struct Curve {
    x: Vec<f64>,
    left: Vec<Option<f64>>,
    right: Vec<Option<f64>>,
    aggregate: Option<f64>,
}

/// `D(x‖y)` and `D(y‖x)` for x on `[lo, hi]`, plus the aggregate of `(lo, hi)`.
pub fn divergence_curve_json(family: &str, params_json: &str, y: f64, lo: f64, hi: f64, samples: usize) -> Result<String, String> {
    let g = generator(family, params_json)?;
    if samples < 2 || !(lo < hi) {
        return Err("need lo < hi and at least 2 samples".into());
    }
    g.divergence(y, y).map_err(|e| e.to_string())?;
    let x: Vec<f64> = (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect();
    let left = x.iter().map(|&v| g.divergence(v, y).ok()).collect();
    let right = x.iter().map(|&v| g.divergence(y, v).ok()).collect();
    let aggregate = WeightedInputs::uniform(vec![lo, hi])
        .ok()
        .and_then(|inp| lda_mean(&g, &inp).ok());
    to_json(&Curve { x, left, right, aggregate })
}

#[wasm_bindgen]
pub fn isoquant(family: &str, params_json: &str, gammas: Vec<f64>, level: f64, lo: f64, hi: f64, samples: usize) -> Result<String, JsValue> {
    isoquant_json(family, params_json, &gammas, level, lo, hi, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn path(family: &str, params_json: &str, from: Vec<f64>, to: Vec<f64>, samples: usize) -> Result<String, JsValue> {
    path_json(family, params_json, &from, &to, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn divergence_curve(family: &str, params_json: &str, y: f64, lo: f64, hi: f64, samples: usize) -> Result<String, JsValue> {
    divergence_curve_json(family, params_json, y, lo, hi, samples).map_err(|e| JsValue::from_str(&e))
}
