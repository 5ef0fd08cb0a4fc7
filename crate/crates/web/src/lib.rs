//! JSON-in/JSON-out bindings for the static demo in `www/`.

use serde_json::json;
use wasm_bindgen::prelude::*;

use reeb_spectra::certify;
use reeb_spectra::cz::cz_index;
use reeb_spectra::ellipsoid::Ellipsoid;
use reeb_spectra::rational::{parse_value, Value};
use reeb_spectra::symplectic::{block_compose, rotation_path};

fn values(list: &str) -> Result<Vec<Value>, String> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(s.trim()).map_err(|e| e.to_string()))
        .collect()
}

fn ellipsoid(list: &str) -> Result<Ellipsoid, String> {
    Ellipsoid::from_values(&values(list)?).map_err(|e| e.to_string())
}

/// Spectrum entries up to `max` for the ellipsoid `a` (`"1,2"`, `"1/2,3"`).
pub fn spectrum_json(a: &str, max: &str) -> Result<String, String> {
    let e = ellipsoid(a)?;
    let max = parse_value(max.trim()).map_err(|e| e.to_string())?;
    let spec = e.action_spectrum(&max).map_err(|e| e.to_string())?;
    Ok(json!({ "ellipsoid": e.a_values(), "max": max, "spectrum": spec }).to_string())
}

/// Invariants `c_0..c_{count−1}`, the equality scan and the verdict.
pub fn classify_json(a: &str, count: usize) -> Result<String, String> {
    let e = ellipsoid(a)?;
    let c = e.spectral_invariants(count.max(e.n())).map_err(|e| e.to_string())?;
    let scan = certify::besse_by_invariants(&c, e.n()).map_err(|e| e.to_string())?;
    let class = e.classify();
    Ok(json!({
        "ellipsoid": e.a_values(),
        "invariants": c,
        "hits": scan.hits,
        "zoll": scan.zoll,
        "verdict": class.verdict,
        "tau0": class.tau0,
        "heuristic": class.heuristic,
    })
    .to_string())
}

/// Conley–Zehnder index of `⊕_h e^{2π J rate_h t}`, `t ∈ [0, time]`.
pub fn cz_json(rates: &str, time: f64) -> Result<String, String> {
    let rates: Vec<f64> = values(rates)?.iter().map(Value::to_f64).collect();
    let blocks = rates
        .iter()
        .map(|r| rotation_path(&[*r], time))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let path = block_compose(blocks).map_err(|e| e.to_string())?;
    let index = cz_index(&path).map_err(|e| e.to_string())?;
    Ok(json!({ "rates": rates, "time": time, "cz_index": index }).to_string())
}

#[wasm_bindgen]
pub fn spectrum(a: &str, max: &str) -> Result<String, JsError> {
    spectrum_json(a, max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn classify(a: &str, count: usize) -> Result<String, JsError> {
    classify_json(a, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cz(rates: &str, time: f64) -> Result<String, JsError> {
    cz_json(rates, time).map_err(|e| JsError::new(&e))
}
