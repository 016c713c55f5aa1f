//! Browser bindings for three operations: a state bound, a channel bound and
//! the covariant Pauli sweep. Inputs use the same constructor strings as the
//! `sqz` CLI; outputs are JSON or CSV text.

use wasm_bindgen::prelude::*;

use sqz_core::channel_bounds;
use sqz_core::channels::parse_channel;
use sqz_core::experiments::{linspace, run, ExperimentConfig, ExperimentId};
use sqz_core::sdp::Tolerances;
use sqz_core::state_bounds::{self, parse_state};

const MAX_STEPS: usize = 64;

fn tolerances(tol: f64) -> Result<Tolerances, String> {
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(format!("tolerance {tol} must lie in (0, 1e-2)"));
    }
    Ok(Tolerances::with_gap_feas(tol))
}

pub fn state_bound_json(state: &str, bound: &str, tol: f64) -> Result<String, String> {
    if state.trim_start().starts_with(|c: char| c == '/' || c == '.') {
        return Err("file inputs are not available in the browser".into());
    }
    let rho = parse_state(state).map_err(|e| e.to_string())?;
    let r = state_bounds::state_bound(bound, &rho, &tolerances(tol)?).map_err(|e| e.to_string())?;
    r.to_json().map_err(|e| e.to_string())
}

pub fn channel_bound_json(channel: &str, bound: &str, tol: f64) -> Result<String, String> {
    let n = parse_channel(channel).map_err(|e| e.to_string())?;
    let r = channel_bounds::channel_bound(bound, &n, &tolerances(tol)?).map_err(|e| e.to_string())?;
    r.to_json().map_err(|e| e.to_string())
}

/// Covariant Pauli dataset over `p0 ∈ [lo, hi]` with `p3 = 0.05`, as CSV.
pub fn covpauli_csv(lo: f64, hi: f64, steps: usize) -> Result<String, String> {
    if steps == 0 || steps > MAX_STEPS {
        return Err(format!("steps must be between 1 and {MAX_STEPS}"));
    }
    let mut cfg = ExperimentConfig::new(ExperimentId::FigCovpauli);
    cfg.grid = linspace(lo, hi, steps);
    let ds = run(&cfg).map_err(|e| e.to_string())?;
    ds.to_csv_string().map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = stateBound)]
pub fn state_bound(state: &str, bound: &str, tol: f64) -> Result<String, JsError> {
    state_bound_json(state, bound, tol).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = channelBound)]
pub fn channel_bound(channel: &str, bound: &str, tol: f64) -> Result<String, JsError> {
    channel_bound_json(channel, bound, tol).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = covpauliSweep)]
pub fn covpauli_sweep(lo: f64, hi: f64, steps: usize) -> Result<String, JsError> {
    covpauli_csv(lo, hi, steps).map_err(|e| JsError::new(&e))
}
