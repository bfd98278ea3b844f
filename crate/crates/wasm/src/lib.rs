//! Browser bindings for the demo page in `www/`. Every export takes a model
//! description as JSON, e.g. `{"family": "brown_resnick", "scale": 1.0}`,
//! and works on the one-dimensional window `[-radius, radius]`.

use maxstable_core::dehaan::{MaxStableSimulator, SeriesControl};
use maxstable_core::estimators::{br_lower_bound, theta_ratio};
use maxstable_core::mc;
use maxstable_core::spectral::ThetaSampler;
use maxstable_core::{McSpec, ModelSpec, SpectralRoute, Variogram, Window};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Largest accepted window radius and replicate count; the page runs on the
/// main thread.
pub const MAX_RADIUS: i64 = 200;
pub const MAX_REPLICATES: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DemoModel {
    BrownResnick {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        exponent: f64,
    },
    Sequence {
        coefficients: Vec<f64>,
    },
    Independent,
    Alternating,
}

fn one() -> f64 {
    1.0
}

impl DemoModel {
    pub fn parse(json: &str) -> Result<ModelSpec, String> {
        let m: DemoModel = serde_json::from_str(json).map_err(|e| e.to_string())?;
        let spec = match m {
            DemoModel::BrownResnick { scale, exponent } => {
                ModelSpec::brown_resnick(Variogram::Power { scale, exponent }, 1)
            }
            DemoModel::Sequence { coefficients } => {
                ModelSpec::sequence(&coefficients, 1.0).map_err(|e| e.to_string())?
            }
            DemoModel::Independent => ModelSpec::Independent { dim: 1 },
            DemoModel::Alternating => ModelSpec::Alternating,
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

fn window(radius: i64) -> Result<Window, String> {
    if !(1..=MAX_RADIUS).contains(&radius) {
        return Err(format!("radius must lie in [1, {MAX_RADIUS}]"));
    }
    Window::centered(1, radius).map_err(|e| e.to_string())
}

/// One draw of the tail field `Θ` on `[-radius, radius]`.
pub fn tail_path(model_json: &str, radius: i64, seed: u64) -> Result<Vec<f64>, String> {
    let model = DemoModel::parse(model_json)?;
    let w = window(radius)?;
    let sampler = ThetaSampler::new(&model, &w).map_err(|e| e.to_string())?;
    let mut out = vec![0.0; w.len()];
    sampler.sample(&mut mc::stream(seed, 0), &mut out);
    Ok(out)
}

/// One draw of the max-stable field `X` on `[-radius, radius]`.
pub fn max_stable_path(model_json: &str, radius: i64, seed: u64) -> Result<Vec<f64>, String> {
    let model = DemoModel::parse(model_json)?;
    let w = window(radius)?;
    let route = match model {
        ModelSpec::BrownResnick { .. } => SpectralRoute::Direct,
        _ => SpectralRoute::default(),
    };
    let sim = MaxStableSimulator::new(&model, &w, route, SeriesControl::default(), seed).map_err(|e| e.to_string())?;
    let mut out = vec![0.0; w.len()];
    sim.simulate_into(&mut mc::stream(seed, 1), &mut out);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub radius: i64,
    pub estimate: f64,
    pub stderr: f64,
    /// Brown-Resnick lower bound for θ; the window only splits it into an
    /// exact part and a tail bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
}

/// Ratio estimates of the extremal index for growing windows.
pub fn theta_points(model_json: &str, radii: &[i64], replicates: usize, seed: u64) -> Result<Vec<CurvePoint>, String> {
    let model = DemoModel::parse(model_json)?;
    if !(100..=MAX_REPLICATES).contains(&replicates) {
        return Err(format!("replicates must lie in [100, {MAX_REPLICATES}]"));
    }
    let spec = McSpec::new(replicates, seed);
    radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let w = window(r)?;
            let est = theta_ratio(&model, &w, &spec.derive(k as u64 + 1)).map_err(|e| e.to_string())?;
            let lower_bound = match &model {
                ModelSpec::BrownResnick { variogram, .. } => {
                    Some(br_lower_bound(variogram, &w).map_err(|e| e.to_string())?.0.value)
                }
                _ => None,
            };
            Ok(CurvePoint { radius: r, estimate: est.estimate, stderr: est.stderr, lower_bound })
        })
        .collect()
}

fn js_err(e: String) -> JsValue {
    JsValue::from_str(&e)
}

#[wasm_bindgen]
pub fn sample_tail_path(model_json: &str, radius: i32, seed: u32) -> Result<Vec<f64>, JsValue> {
    tail_path(model_json, radius as i64, seed as u64).map_err(js_err)
}

#[wasm_bindgen]
pub fn simulate_process(model_json: &str, radius: i32, seed: u32) -> Result<Vec<f64>, JsValue> {
    max_stable_path(model_json, radius as i64, seed as u64).map_err(js_err)
}

/// JSON array of `{radius, estimate, stderr, lower_bound?}`.
#[wasm_bindgen]
pub fn theta_curve(model_json: &str, radii: Vec<i32>, replicates: u32, seed: u32) -> Result<String, JsValue> {
    let radii: Vec<i64> = radii.into_iter().map(i64::from).collect();
    let pts = theta_points(model_json, &radii, replicates as usize, seed as u64).map_err(js_err)?;
    serde_json::to_string(&pts).map_err(|e| js_err(e.to_string()))
}
