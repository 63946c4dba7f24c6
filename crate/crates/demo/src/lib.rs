//! WebAssembly bindings behind `www/index.html`. Each exported function
//! takes plain numbers and returns a JSON string for the page to plot.
//!
//! The `*_json` functions hold the logic and are callable natively; the
//! `#[wasm_bindgen]` wrappers take 32-bit seeds so JS can pass plain
//! numbers, and turn errors into JS exceptions.

use qbrittle::protocol::{self, EnsembleConfig};
use qbrittle::pruning::{self, BrittlenessThresholds};
use qbrittle::report::{class_histogram, HistogramBin};
use qbrittle::stats::{self, ClassLabel};
use qbrittle::{generate_uniform, Error, GenerationParams, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Browser memory is the binding constraint, not the simulator.
pub const MAX_DEMO_QUBITS: usize = 14;

fn params(n: usize, alpha: f64, rho: f64, seed: u64) -> Result<GenerationParams> {
    if n > MAX_DEMO_QUBITS {
        return Err(Error::ResourceLimit {
            n,
            cap: MAX_DEMO_QUBITS,
        });
    }
    Ok(GenerationParams::new(n, alpha, rho, seed))
}

#[derive(Serialize)]
struct GatePoint {
    index: usize,
    kind: &'static str,
    axis: Option<&'static str>,
    theta: Option<f64>,
    importance: f64,
}

#[derive(Serialize)]
struct Scatter {
    gates: Vec<GatePoint>,
    r: Option<f64>,
    entropy: Option<f64>,
    gini: Option<f64>,
}

pub fn importance_json(n: usize, alpha: f64, rho: f64, seed: u64) -> Result<String> {
    let circuit = generate_uniform(&params(n, alpha, rho, seed)?)?;
    let profile = pruning::importance_profile(&circuit)?;
    let gates = circuit
        .gates()
        .iter()
        .zip(profile.scores())
        .enumerate()
        .map(|(index, (g, &importance))| GatePoint {
            index,
            kind: g.kind(),
            axis: g.axis().map(|a| a.as_str()),
            theta: g.theta(),
            importance,
        })
        .collect();
    let scatter = Scatter {
        gates,
        r: stats::angle_importance_r(&circuit, profile.scores()).ok(),
        entropy: profile.entropy().ok(),
        gini: profile.gini().ok(),
    };
    Ok(serde_json::to_string(&scatter)?)
}

#[derive(Serialize)]
struct Compression {
    gate_count: usize,
    removed_indices: Vec<usize>,
    fidelity: f64,
    label: ClassLabel,
    brittle: bool,
    mean_theta: f64,
    std_theta: f64,
    small_angle_ratio: f64,
}

pub fn compress_json(
    n: usize,
    alpha: f64,
    rho: f64,
    seed: u64,
    kappa: f64,
    aware: bool,
) -> Result<String> {
    let circuit = generate_uniform(&params(n, alpha, rho, seed)?)?;
    let thresholds = BrittlenessThresholds::for_qubits(n);
    let risk = pruning::risk_assess(&circuit, &thresholds)?;
    let result = if aware {
        pruning::aware_prune(&circuit, kappa, &thresholds)?
    } else {
        pruning::causal_prune(&circuit, kappa)?
    };
    let angles = stats::angle_stats(&circuit, stats::SMALL_ANGLE_THRESHOLD)?;
    Ok(serde_json::to_string(&Compression {
        gate_count: circuit.len(),
        removed_indices: result.removed_indices,
        fidelity: result.fidelity,
        label: stats::classify(result.fidelity, stats::ROBUST_THRESHOLD),
        brittle: risk.brittle,
        mean_theta: angles.mean_theta,
        std_theta: angles.std_theta,
        small_angle_ratio: angles.small_angle_ratio,
    })?)
}

#[derive(Serialize)]
struct Histogram {
    bins: Vec<HistogramBin>,
    robust: usize,
    fragile: usize,
    robust_mean: Option<f64>,
    fragile_mean: Option<f64>,
    gap: Option<f64>,
    cohens_d: Option<f64>,
}

pub fn ensemble_json(
    n: usize,
    alpha: f64,
    rho: f64,
    kappa: f64,
    count: usize,
    base_seed: u64,
    bins: usize,
) -> Result<String> {
    params(n, alpha, rho, base_seed)?;
    let config = EnsembleConfig {
        circuit_count: count,
        base_seed,
        ..EnsembleConfig::new(n, alpha, rho, kappa)
    };
    let report = protocol::run_ensemble(&config)?;
    let values: Vec<(f64, ClassLabel)> = report
        .records
        .iter()
        .map(|r| (r.fidelity, r.label))
        .collect();
    let cs = report.class_summary;
    Ok(serde_json::to_string(&Histogram {
        bins: class_histogram(&values, bins),
        robust: cs.robust.count,
        fragile: cs.fragile.count,
        robust_mean: cs.robust.mean_fidelity,
        fragile_mean: cs.fragile.mean_fidelity,
        gap: report.fidelity_gap,
        cohens_d: report.cohens_d_fidelity,
    })?)
}

fn js(r: Result<String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// Per-gate `(theta, importance)` points for one generated circuit.
#[wasm_bindgen]
pub fn importance_scatter(n: usize, alpha: f64, rho: f64, seed: u32) -> Result<String, JsError> {
    js(importance_json(n, alpha, rho, seed.into()))
}

/// Compress one circuit and report which gates went and the fidelity left.
#[wasm_bindgen]
pub fn compress(
    n: usize,
    alpha: f64,
    rho: f64,
    seed: u32,
    kappa: f64,
    aware: bool,
) -> Result<String, JsError> {
    js(compress_json(n, alpha, rho, seed.into(), kappa, aware))
}

/// Fidelity histogram of a small ensemble, split by class.
#[wasm_bindgen]
pub fn ensemble_histogram(
    n: usize,
    alpha: f64,
    rho: f64,
    kappa: f64,
    count: usize,
    base_seed: u32,
    bins: usize,
) -> Result<String, JsError> {
    js(ensemble_json(
        n,
        alpha,
        rho,
        kappa,
        count,
        base_seed.into(),
        bins,
    ))
}
