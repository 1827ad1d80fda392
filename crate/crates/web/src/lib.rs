//! Browser bindings: a bridge fan, a barrier price curve and crash probability curves.
//!
//! Every export returns a flat `Float64Array`; the page reshapes it.

use wasm_bindgen::prelude::*;
use zeroset::crash::{first_passage_prob, marginal_crash_prob, CrashSpec};
use zeroset::derivatives::{put_price, BarrierOptionSpec, PutSide};
use zeroset::paths::{sample_bridge_paper_sde, sample_bridge_pinned, BridgeSpec, GbmParams};
use zeroset::{SeedRecord, TimeGrid};

fn js(e: zeroset::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Row-major `n_paths × (n_steps + 1)` values; the grid is uniform on `[0, 1 - epsilon]`.
/// `kind` is `"pinned"` or `"paper_sde"`.
pub fn bridge_fan_values(kind: &str, x: f64, n_paths: usize, n_steps: usize, epsilon: f64, seed: u64) -> zeroset::Result<Vec<f64>> {
    let grid = TimeGrid::bridge(n_steps, epsilon)?;
    let mut out = Vec::with_capacity(n_paths * grid.len());
    for i in 0..n_paths as u64 {
        let s = SeedRecord::new(seed, i);
        let p = match kind {
            "paper_sde" => sample_bridge_paper_sde(&BridgeSpec::new(x, 0.0)?, &grid, s)?,
            _ => sample_bridge_pinned(x, 0.0, &grid, s)?,
        };
        out.extend_from_slice(p.values());
    }
    Ok(out)
}

/// `[barrier, down_in, down_out, vanilla]` repeated for `n` barriers spread over `(0, min(s0, K))`.
pub fn barrier_curve_values(s0: f64, strike: f64, sigma: f64, rate: f64, dividend_yield: f64, maturity: f64, n: usize) -> zeroset::Result<Vec<f64>> {
    let top = s0.min(strike);
    let mut out = Vec::with_capacity(4 * n);
    for i in 1..=n {
        let barrier = top * i as f64 / (n + 1) as f64;
        let spec = BarrierOptionSpec {
            gbm: GbmParams::new(rate - dividend_yield, sigma, s0)?,
            strike,
            barrier,
            dividend_yield,
            rate,
            maturity,
            side: PutSide::DownInPut,
        };
        out.push(barrier);
        for side in [PutSide::DownInPut, PutSide::DownOutPut, PutSide::VanillaPut] {
            out.push(put_price(&spec.with_side(side))?);
        }
    }
    Ok(out)
}

/// `[t, marginal, first_passage]` repeated for `n` times on `(0, horizon]`.
pub fn crash_curve_values(mu: f64, sigma: f64, s0: f64, s_crash: f64, horizon: f64, n: usize) -> zeroset::Result<Vec<f64>> {
    let spec = CrashSpec::new(GbmParams::new(mu, sigma, s0)?, s_crash, 1.0, horizon)?;
    let mut out = Vec::with_capacity(3 * n);
    for i in 1..=n {
        let t = horizon * i as f64 / n as f64;
        out.extend([t, marginal_crash_prob(&spec, t)?, first_passage_prob(&spec, t)?]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn bridge_fan(kind: &str, x: f64, n_paths: usize, n_steps: usize, epsilon: f64, seed: u64) -> Result<Vec<f64>, JsError> {
    bridge_fan_values(kind, x, n_paths, n_steps, epsilon, seed).map_err(js)
}

#[wasm_bindgen]
pub fn barrier_curve(s0: f64, strike: f64, sigma: f64, rate: f64, dividend_yield: f64, maturity: f64, n: usize) -> Result<Vec<f64>, JsError> {
    barrier_curve_values(s0, strike, sigma, rate, dividend_yield, maturity, n).map_err(js)
}

#[wasm_bindgen]
pub fn crash_curves(mu: f64, sigma: f64, s0: f64, s_crash: f64, horizon: f64, n: usize) -> Result<Vec<f64>, JsError> {
    crash_curve_values(mu, sigma, s0, s_crash, horizon, n).map_err(js)
}
