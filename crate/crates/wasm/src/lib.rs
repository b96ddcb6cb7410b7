//! wasm-bindgen bindings for the browser demo. Each function runs the full
//! classical pipeline (integrals → SCF → Hamiltonian → VQE) and returns the
//! records as a JSON string for the plotting page in `www/`.

use wasm_bindgen::prelude::*;

use heh_vqe::ansatz::AmplitudeMode;
use heh_vqe::hamiltonian::{measurement_terms, slater_condon_hamiltonian};
use heh_vqe::measurement::ShotPlan;
use heh_vqe::vqe::{
    dissociation_scan, exact_eigensystem, folded_scan, vqe_ground, FoldedScanConfig, PrepMode,
    ScanConfig, VqeOptions,
};
use heh_vqe::System;

fn grid(min: f64, max: f64, steps: u32) -> Vec<f64> {
    let n = steps.max(1);
    (0..=n).map(|k| min + (max - min) * k as f64 / n as f64).collect()
}

/// Ground-state dissociation curve: VQE and exact-diagonalization energies
/// (total convention) over a bond-length grid.
#[wasm_bindgen]
pub fn dissociation_curve(rmin: f64, rmax: f64, steps: u32) -> Result<String, JsValue> {
    if !(rmin > 0.0) || rmax < rmin {
        return Err(JsValue::from_str("need 0 < rmin ≤ rmax"));
    }
    let records = dissociation_scan(&grid(rmin, rmax, steps), &ScanConfig::default());
    serde_json::to_string(&records).map_err(|e| JsValue::from_str(&e.to_string()))
}

/// Single-point optimization trace (energy and fidelity per evaluation),
/// with the exact ground energy as the reference line. `shots = 0` runs in
/// exact-measurement mode.
#[wasm_bindgen]
pub fn vqe_trace(r: f64, params: u32, shots: u64, seed: u64) -> Result<String, JsValue> {
    if !(r > 0.0) {
        return Err(JsValue::from_str("bond length must be positive"));
    }
    let mode = match params {
        2 => AmplitudeMode::Reduced2,
        6 => AmplitudeMode::Full6,
        _ => return Err(JsValue::from_str("params must be 2 or 6")),
    };
    let sys = System::heh_plus(r).map_err(|e| JsValue::from_str(&e.to_string()))?;
    let h = slater_condon_hamiltonian(&sys.so, true);
    let opts = if shots == 0 {
        VqeOptions { prep: PrepMode::Trotter(2), ..VqeOptions::exact(mode) }
    } else {
        let mut o = VqeOptions::shots(mode, ShotPlan::new(shots, seed));
        o.physical_terms = Some(measurement_terms(&sys.so, true));
        o
    };
    let result = vqe_ground(&h, &opts).map_err(|e| JsValue::from_str(&e.to_string()))?;
    let exact = exact_eigensystem(&h).eigenvalues[0];

    #[derive(serde::Serialize)]
    struct Trace<'a> {
        exact_energy: f64,
        best_energy: f64,
        stderr: f64,
        fidelity: f64,
        iterations: usize,
        trace: &'a [heh_vqe::vqe::IterationRecord],
    }
    serde_json::to_string(&Trace {
        exact_energy: exact,
        best_energy: result.energy,
        stderr: result.stderr,
        fidelity: result.fidelity,
        iterations: result.iterations,
        trace: &result.trace,
    })
    .map_err(|e| JsValue::from_str(&e.to_string()))
}

/// Folded-spectrum scan: min ⟨(H−λ)²⟩ over a λ grid with the E± solutions,
/// plus the exact eigenvalues for reference.
#[wasm_bindgen]
pub fn excited_scan(r: f64, lmin: f64, lmax: f64, steps: u32, starts: u32) -> Result<String, JsValue> {
    if !(r > 0.0) || lmax < lmin {
        return Err(JsValue::from_str("need r > 0 and lmin ≤ lmax"));
    }
    let sys = System::heh_plus(r).map_err(|e| JsValue::from_str(&e.to_string()))?;
    let h = slater_condon_hamiltonian(&sys.so, true);
    let cfg = FoldedScanConfig { n_starts: starts.clamp(1, 20) as usize, ..Default::default() };
    let records = folded_scan(&h, &grid(lmin, lmax, steps), &cfg);
    let eigenvalues = exact_eigensystem(&h).eigenvalues;

    #[derive(serde::Serialize)]
    struct Scan<'a> {
        eigenvalues: [f64; 4],
        records: &'a [heh_vqe::vqe::FoldedRecord],
    }
    serde_json::to_string(&Scan { eigenvalues, records: &records })
        .map_err(|e| JsValue::from_str(&e.to_string()))
}
