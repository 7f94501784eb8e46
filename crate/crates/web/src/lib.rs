//! wasm-bindgen exports for the static page in `www/`.
//!
//! Each export is a thin wrapper over a plain function so the logic can be
//! tested natively.

use std::sync::Arc;

use wasm_bindgen::prelude::*;

use ymh_core::algebra::{AlgebraKind, LieAlgebra};
use ymh_core::data::{constrained_data, to_gauge_state, HiggsData};
use ymh_core::diagnose::run_with_diagnostics;
use ymh_core::evolve::{Coupling, EvolveConfig, Evolver, Integrator};
use ymh_core::grid::{Grid, GridSpec};
use ymh_core::nullform::{
    check_symbol_bounds, q0_rhs, q0_rhs_corrected, q0_symbol, q0i_symbol, q0j_rhs, qij_rhs, qij_symbol, theta,
};
use ymh_core::system::Variant;

/// Largest runs the page accepts; the browser thread blocks while they go.
const MAX_N: usize = 16;
const MAX_STEPS: usize = 400;
const MAX_SAMPLES: usize = 2_000_000;

fn vec3(v: &[f64], name: &str) -> Result<[f64; 3], String> {
    match v {
        [a, b, c] if v.iter().all(|x| x.is_finite()) => Ok([*a, *b, *c]),
        _ => Err(format!("{name} needs three finite components")),
    }
}

/// [θ, |q₀|, printed q₀ ratio, corrected q₀ ratio, q₀ⱼ ratio, qᵢⱼ ratio]
/// at one frequency pair.
pub fn symbol_point(xi: &[f64], eta: &[f64]) -> Result<Vec<f64>, String> {
    let (xi, eta) = (vec3(xi, "xi")?, vec3(eta, "eta")?);
    let ratio = |l: f64, r: f64| if l == 0.0 { 0.0 } else { l / r };
    let q0 = q0_symbol(xi, eta).abs();
    let q0j = (0..3).map(|j| q0i_symbol(j, xi, eta).abs()).fold(0.0, f64::max);
    let qij = [(0, 1), (0, 2), (1, 2)].iter().map(|&(i, j)| qij_symbol(i, j, xi, eta).abs()).fold(0.0, f64::max);
    Ok(vec![
        theta(xi, eta),
        q0,
        ratio(q0, q0_rhs(xi, eta)),
        ratio(q0, q0_rhs_corrected(xi, eta)),
        ratio(q0j, q0j_rhs(xi, eta)),
        ratio(qij, qij_rhs(xi, eta)),
    ])
}

/// Max ratios [q₀ printed, q₀ⱼ, qᵢⱼ, q₀ corrected] over random samples.
pub fn symbol_scan(samples: usize, seed: u64) -> Result<Vec<f64>, String> {
    if samples == 0 || samples > MAX_SAMPLES {
        return Err(format!("samples must lie in 1..={MAX_SAMPLES}"));
    }
    Ok(check_symbol_bounds(samples, seed).iter().map(|r| r.max_ratio).collect())
}

/// Small SU(2) run from constrained data. Returns rows of
/// [t, energy, conserved energy, Lorenz residual, compatibility residual]
/// flattened.
pub fn evolve_series(
    n: usize,
    amplitude: f64,
    dt: f64,
    t_end: f64,
    consistent: bool,
    seed: u64,
) -> Result<Vec<f64>, String> {
    if !(4..=MAX_N).contains(&n) || !n.is_power_of_two() {
        return Err(format!("N must be a power of two in 4..={MAX_N}"));
    }
    if !(amplitude >= 0.0 && amplitude <= 1.0) {
        return Err("amplitude must lie in [0, 1]".into());
    }
    let cfg = EvolveConfig { dt, t_end, integrator: Integrator::ExpRK4, picard_depth: 1 };
    cfg.validate().map_err(|e| e.to_string())?;
    if cfg.steps() > MAX_STEPS {
        return Err(format!("at most {MAX_STEPS} steps"));
    }
    let alg = Arc::new(LieAlgebra::new(AlgebraKind::su(2)));
    let grid = Grid::new(GridSpec::cube(n));
    let band = (grid.spec().band_limit() / 2).clamp(1, 2);
    let d =
        constrained_data(&alg, &grid, seed, band, amplitude, 3.0, HiggsData::Velocity).map_err(|e| e.to_string())?;
    let s0 = to_gauge_state(&d).map_err(|e| e.to_string())?;
    let variant = if consistent { Variant::Consistent } else { Variant::Printed };
    let ev = Evolver::new(3.0, Coupling::Full).map_err(|e| e.to_string())?.with_variant(variant);
    let (_, s) = run_with_diagnostics(&ev, &s0, &cfg, 1).map_err(|e| e.to_string())?;
    Ok((0..s.len())
        .flat_map(|i| [s.times[i], s.energy[i], s.conserved[i], s.lorenz_residual[i], s.compat_residual[i]])
        .collect())
}

#[wasm_bindgen(js_name = symbolPoint)]
pub fn symbol_point_js(xi: Vec<f64>, eta: Vec<f64>) -> Result<Vec<f64>, JsError> {
    symbol_point(&xi, &eta).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = symbolScan)]
pub fn symbol_scan_js(samples: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    symbol_scan(samples, seed.into()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = evolveSeries)]
pub fn evolve_series_js(
    n: usize,
    amplitude: f64,
    dt: f64,
    t_end: f64,
    consistent: bool,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    evolve_series(n, amplitude, dt, t_end, consistent, seed.into()).map_err(|e| JsError::new(&e))
}
