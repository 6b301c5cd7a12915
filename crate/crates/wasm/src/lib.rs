//! Browser bindings: evaluate a charge, decompose it, run a scenario.

use wasm_bindgen::prelude::*;

use lmeas::decompose::{self, Decomposition};
use lmeas::measures::{Charge, Region};
use lmeas::{harness, suite, text};

fn charge(src: &str) -> lmeas::Result<Charge> {
    text::charge(&text::read_one(src)?)
}

/// `m(A)` as an exact interval, and the total variation of `m` on `A`.
pub fn evaluate_text(charge_src: &str, region_src: &str, depth: u64) -> lmeas::Result<String> {
    let m = charge(charge_src)?;
    let a: Region = text::region(&text::read_one(region_src)?)?;
    let value = m.evaluate(&a, depth)?;
    let var = m.variation(&a, depth)?;
    Ok(serde_json::json!({
        "value": value.to_string(),
        "variation": var.total.to_string(),
        "positive": var.positive.to_string(),
        "negative": var.negative.to_string(),
    })
    .to_string())
}

fn summary(d: &Decomposition) -> serde_json::Value {
    serde_json::json!({
        "kind": d.kind.to_string(),
        "part_a": d.part_a.to_string(),
        "part_b": d.part_b.to_string(),
        "witness_set": d.witness_set.as_ref().map(|w| w.to_string()),
        "certificates": d.certificates.iter().map(|(n, v)| serde_json::json!({"name": n, "verdict": v.to_string()})).collect::<Vec<_>>(),
    })
}

/// All three decompositions of `m`; the Lebesgue one against `ν`.
pub fn decompose_text(charge_src: &str, nu_src: &str, depth: u64) -> lmeas::Result<String> {
    let m = charge(charge_src)?;
    let nu = charge(nu_src)?;
    let decs = [
        decompose::lebesgue_decompose(&m, &nu, depth)?,
        decompose::sobczyk_hammer_decompose(&m, depth)?,
        decompose::yosida_hewett_decompose(&m, depth)?,
    ];
    Ok(serde_json::Value::Array(decs.iter().map(summary).collect()).to_string())
}

/// The JSON report of a scenario given as text.
pub fn run_text(scenario_src: &str) -> lmeas::Result<String> {
    let s = text::parse_scenario(scenario_src)?;
    Ok(serde_json::to_string_pretty(&harness::run(&s)?).expect("reports serialize"))
}

#[wasm_bindgen]
pub fn evaluate(charge_src: &str, region_src: &str, depth: u32) -> Result<String, JsError> {
    Ok(evaluate_text(charge_src, region_src, depth.into())?)
}

#[wasm_bindgen]
pub fn decompose(charge_src: &str, nu_src: &str, depth: u32) -> Result<String, JsError> {
    Ok(decompose_text(charge_src, nu_src, depth.into())?)
}

#[wasm_bindgen]
pub fn run_scenario(scenario_src: &str) -> Result<String, JsError> {
    Ok(run_text(scenario_src)?)
}

#[wasm_bindgen]
pub fn builtin_names() -> Vec<String> {
    suite::BUILTINS.iter().map(|(n, _)| n.to_string()).collect()
}

#[wasm_bindgen]
pub fn builtin_source(name: &str) -> Option<String> {
    suite::builtin_source(name).map(String::from)
}
