//! Browser bindings: JSON-in/JSON-out wrappers around the pipeline,
//! exported through wasm-bindgen for the static page in `www/`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use uca_prioritizer::ingest::{self, IngestError};
use uca_prioritizer::matrix::{self, MatrixOptions};
use uca_prioritizer::mcs::{RankedStats, SimulationConfig};
use uca_prioritizer::model::{Priority, PriorityRecord};
use uca_prioritizer::pipeline::{analyze_parsed, AnalysisOptions};

/// The bundled ten-UCA sample dataset, as a JSON bundle.
#[wasm_bindgen]
pub fn sample_dataset() -> String {
    include_str!("../../../data/dataset.json").to_string()
}

/// Checks a JSON dataset bundle; returns a JSON validation report.
#[wasm_bindgen]
pub fn validate_dataset(dataset_json: &str) -> Result<String, JsValue> {
    validate_impl(dataset_json).map_err(|e| JsValue::from_str(&e))
}

/// Runs the full pipeline on a JSON dataset bundle and returns a JSON
/// result carrying the placed records, the simulation summaries, the
/// priority counts, and an SVG rendering of the matrix.
#[wasm_bindgen]
pub fn compute(
    dataset_json: &str,
    simulations: u32,
    variation: f64,
    seed: u32,
) -> Result<String, JsValue> {
    compute_impl(dataset_json, simulations, variation, seed).map_err(|e| JsValue::from_str(&e))
}

#[derive(Serialize)]
struct ValidationReport {
    ok: bool,
    sub_losses: usize,
    controllers: usize,
    ucas: usize,
    violations: Vec<String>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct ComputeResult {
    warnings: Vec<String>,
    priority_counts: BTreeMap<Priority, usize>,
    stats: Vec<RankedStats>,
    records: Vec<PriorityRecord>,
    max_sif: u32,
    max_ej_inverted: f64,
    svg: String,
}

fn validate_impl(dataset_json: &str) -> Result<String, String> {
    let report = match ingest::parse_bundle_str(dataset_json, Path::new("dataset.json")) {
        Ok(parsed) => ValidationReport {
            ok: true,
            sub_losses: parsed.dataset.sub_losses().len(),
            controllers: parsed.dataset.controllers().len(),
            ucas: parsed.dataset.ucas().len(),
            violations: Vec::new(),
            warnings: parsed.warnings,
        },
        Err(IngestError::Invalid(violations)) => ValidationReport {
            ok: false,
            sub_losses: 0,
            controllers: 0,
            ucas: 0,
            violations: violations.0.iter().map(|v| v.to_string()).collect(),
            warnings: Vec::new(),
        },
        Err(err) => return Err(err.to_string()),
    };
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

fn compute_impl(
    dataset_json: &str,
    simulations: u32,
    variation: f64,
    seed: u32,
) -> Result<String, String> {
    let parsed = ingest::parse_bundle_str(dataset_json, Path::new("dataset.json"))
        .map_err(|e| e.to_string())?;
    let options = AnalysisOptions {
        simulation: SimulationConfig {
            num_simulations: simulations as usize,
            variation_range: variation,
            seed: u64::from(seed),
            ..SimulationConfig::default()
        },
        matrix: MatrixOptions::default(),
    };
    let analysis = analyze_parsed(&parsed, &options).map_err(|e| e.to_string())?;

    let result = ComputeResult {
        svg: matrix::render_svg(&analysis.matrix),
        warnings: analysis.warnings,
        priority_counts: analysis.counts,
        stats: analysis.ranked,
        records: analysis.records,
        max_sif: analysis.matrix.max_sif,
        max_ej_inverted: analysis.matrix.max_ej_inverted,
    };
    serde_json::to_string(&result).map_err(|e| e.to_string())
}
