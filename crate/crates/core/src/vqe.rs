//! The variational loop: Nelder-Mead simplex search over cluster amplitudes,
//! reference oracles (exact diagonalization, perturbation theory), and the
//! scan drivers for the dissociation curve, static-field softening, and
//! folded-spectrum excited-state extraction.

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::ansatz::{
    ucc_state_exact, ucc_state_trotter, AmplitudeMode, ClusterAmplitudes, QuditState,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    field_dress, fold, jw_transform, measurement_terms, pauli_to_matrix,
    slater_condon_hamiltonian, Matrix4c, MeasurementTerm, QuditHamiltonian,
};
use crate::measurement::{
    exact_expectation, gell_mann_generators, substream_seed, term_by_term_energy,
    ShotPlan,
};
use crate::System;

// ---------------------------------------------------------------------------
// Nelder-Mead

/// Standard downhill-simplex coefficients and termination knobs.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NelderMeadConfig {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Offset added per parameter to build the initial simplex.
    pub initial_step: f64,
    /// Stop when f(worst) − f(best) falls below this.
    pub f_tol: f64,
    /// Stop when the simplex collapses below this in every coordinate.
    pub x_tol: f64,
    pub max_iterations: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.1,
            f_tol: 1e-8,
            x_tol: 1e-10,
            max_iterations: 300,
        }
    }
}

impl NelderMeadConfig {
    fn validate(&self) {
        assert!(self.reflection > 0.0);
        assert!(self.expansion > 1.0);
        assert!(self.contraction > 0.0 && self.contraction < 1.0);
        assert!(self.shrink > 0.0 && self.shrink < 1.0);
        assert!(self.initial_step != 0.0);
    }
}

/// One objective evaluation in the optimization trace.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NmEval {
    pub point: Vec<f64>,
    pub value: f64,
    /// True when this evaluation improved on the best value seen so far.
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct NmOutcome {
    pub x_best: Vec<f64>,
    pub f_best: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub trace: Vec<NmEval>,
}

/// Downhill simplex minimization (reflect / expand / contract / shrink).
///
/// Deterministic given the objective, the start point and the config.
pub fn nelder_mead(
    mut objective: impl FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    cfg: &NelderMeadConfig,
) -> Result<NmOutcome> {
    cfg.validate();
    let n = x0.len();
    assert!(n >= 1, "at least one parameter");

    let mut trace: Vec<NmEval> = Vec::new();
    let mut best_seen = f64::INFINITY;
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], trace: &mut Vec<NmEval>, best_seen: &mut f64, evaluations: &mut usize| -> Result<f64> {
        let value = objective(x)?;
        if !value.is_finite() {
            return Err(Error::NonFiniteObjective { point: x.to_vec() });
        }
        *evaluations += 1;
        let accepted = value < *best_seen;
        if accepted {
            *best_seen = value;
        }
        trace.push(NmEval { point: x.to_vec(), value, accepted });
        Ok(value)
    };

    // initial simplex: x0 plus one offset vertex per coordinate
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let f0 = eval(x0, &mut trace, &mut best_seen, &mut evaluations)?;
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += cfg.initial_step;
        let f = eval(&x, &mut trace, &mut best_seen, &mut evaluations)?;
        simplex.push((x, f));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let x_spread = (1..=n)
            .map(|i| {
                simplex[i]
                    .0
                    .iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread < cfg.f_tol || x_spread < cfg.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let point_along = |from: &[f64], towards: &[f64], factor: f64| -> Vec<f64> {
            from.iter().zip(towards).map(|(c, w)| c + factor * (w - c)).collect()
        };

        // reflection
        let xr = point_along(&centroid, &worst.0, -cfg.reflection);
        let fr = eval(&xr, &mut trace, &mut best_seen, &mut evaluations)?;

        if fr < simplex[0].1 {
            // expansion
            let xe = point_along(&centroid, &xr, cfg.expansion);
            let fe = eval(&xe, &mut trace, &mut best_seen, &mut evaluations)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let shrink_needed = if fr < worst.1 {
                // outside contraction
                let xc = point_along(&centroid, &xr, cfg.contraction);
                let fc = eval(&xc, &mut trace, &mut best_seen, &mut evaluations)?;
                if fc <= fr {
                    simplex[n] = (xc, fc);
                    false
                } else {
                    true
                }
            } else {
                // inside contraction
                let xc = point_along(&centroid, &worst.0, cfg.contraction);
                let fc = eval(&xc, &mut trace, &mut best_seen, &mut evaluations)?;
                if fc < worst.1 {
                    simplex[n] = (xc, fc);
                    false
                } else {
                    true
                }
            };
            if shrink_needed {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = point_along(&best, &vertex.0, cfg.shrink);
                    let f = eval(&x, &mut trace, &mut best_seen, &mut evaluations)?;
                    *vertex = (x, f);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(NmOutcome {
        x_best: simplex[0].0.clone(),
        f_best: simplex[0].1,
        iterations,
        evaluations,
        converged,
        trace,
    })
}

// ---------------------------------------------------------------------------
// Exact diagonalization oracle

#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Ascending.
    pub eigenvalues: [f64; 4],
    /// Column k is the eigenvector of eigenvalues[k].
    pub eigenvectors: Matrix4c,
}

pub fn exact_eigensystem(h: &QuditHamiltonian) -> EigenSystem {
    let eig = h.matrix.symmetric_eigen();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut eigenvalues = [0.0; 4];
    let mut eigenvectors = Matrix4c::zeros();
    for (col, &k) in order.iter().enumerate() {
        eigenvalues[col] = eig.eigenvalues[k];
        eigenvectors.set_column(col, &eig.eigenvectors.column(k));
    }
    EigenSystem { eigenvalues, eigenvectors }
}

// ---------------------------------------------------------------------------
// Single-point VQE

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PrepMode {
    Exact,
    Trotter(u32),
}

#[derive(Debug, Clone, serde::Serialize)]
pub enum MeasMode {
    Exact,
    /// Finite-shot term-by-term estimation; per-evaluation sample streams
    /// derive from the plan seed and the evaluation counter.
    Shots(ShotPlan),
}

#[derive(Debug, Clone)]
pub struct VqeOptions {
    pub mode: AmplitudeMode,
    pub prep: PrepMode,
    pub meas: MeasMode,
    pub nm: NelderMeadConfig,
    /// In exact-measurement mode, refine the optimum with exact state
    /// preparation and a tighter, smaller simplex after the main run.
    pub exact_polish: bool,
    /// Automatic restarts from the best point when max iterations are hit.
    pub restarts: usize,
    /// Hermitian decomposition of the target used in shot mode. When absent,
    /// a Gell-Mann decomposition of the operator is generated.
    pub physical_terms: Option<Vec<MeasurementTerm>>,
}

impl VqeOptions {
    fn settings(&self) -> VqeSettings {
        VqeSettings {
            mode: self.mode,
            prep: self.prep,
            shots: match &self.meas {
                MeasMode::Exact => None,
                MeasMode::Shots(plan) => Some(plan.shots_per_setting),
            },
        }
    }

    pub fn exact(mode: AmplitudeMode) -> Self {
        Self {
            mode,
            prep: PrepMode::Trotter(2),
            meas: MeasMode::Exact,
            nm: NelderMeadConfig::default(),
            exact_polish: true,
            restarts: 1,
            physical_terms: None,
        }
    }

    pub fn shots(mode: AmplitudeMode, plan: ShotPlan) -> Self {
        Self {
            mode,
            prep: PrepMode::Trotter(2),
            meas: MeasMode::Shots(plan),
            nm: NelderMeadConfig { f_tol: 1e-3, ..NelderMeadConfig::default() },
            exact_polish: false,
            restarts: 1,
            physical_terms: None,
        }
    }
}

/// Per-iteration diagnostics of the variational loop.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IterationRecord {
    pub index: usize,
    pub energy: f64,
    pub accepted: bool,
    /// Fidelity of the prepared state against the exact ground vector;
    /// diagnostic only, never fed to the optimizer.
    pub fidelity: f64,
}

/// Echo of the configuration a VQE run was performed with.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct VqeSettings {
    pub mode: AmplitudeMode,
    pub prep: PrepMode,
    /// Shots per setting; None in exact-measurement mode.
    pub shots: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct VqeResult {
    pub amplitudes: ClusterAmplitudes,
    pub energy: f64,
    /// Standard error of the reported energy (0 in exact mode).
    pub stderr: f64,
    pub fidelity: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub restarts_used: usize,
    pub settings: VqeSettings,
    pub trace: Vec<IterationRecord>,
}

/// Decompose an arbitrary Hermitian 4×4 operator over the identity and the
/// Gell-Mann generators; the generic shot-mode measurement plan for operators
/// without a physical h-tensor decomposition (folded, field-dressed).
pub fn gell_mann_terms(h: &Matrix4c) -> Vec<MeasurementTerm> {
    let mut terms = Vec::new();
    let tr: Complex64 = (0..4).map(|k| h[(k, k)]).sum();
    let id_coeff = tr.re / 4.0;
    if id_coeff != 0.0 {
        terms.push(MeasurementTerm {
            label: "I".into(),
            matrix: Matrix4c::identity() * Complex64::new(id_coeff, 0.0),
            constant: true,
        });
    }
    for (k, g) in gell_mann_generators().into_iter().enumerate() {
        // Tr(g·H)/2 since Tr(g²) = 2
        let prod = g * h;
        let coeff: Complex64 = (0..4).map(|m| prod[(m, m)]).sum();
        let c = coeff.re / 2.0;
        if c.abs() > 1e-14 {
            terms.push(MeasurementTerm {
                label: format!("g{k}"),
                matrix: g * Complex64::new(c, 0.0),
                constant: false,
            });
        }
    }
    terms
}

fn prepare(t: &ClusterAmplitudes, prep: PrepMode) -> QuditState {
    match prep {
        PrepMode::Exact => ucc_state_exact(t),
        PrepMode::Trotter(n) => ucc_state_trotter(t, n),
    }
}

struct Phase {
    prep: PrepMode,
    nm: NelderMeadConfig,
}

/// Ground-state search on the 4-level backend.
pub fn vqe_ground(h: &QuditHamiltonian, opts: &VqeOptions) -> Result<VqeResult> {
    let eig = exact_eigensystem(h);
    let ground = QuditState { amplitudes: eig.eigenvectors.column(0).into_owned() };

    let terms: Vec<MeasurementTerm> = match &opts.meas {
        MeasMode::Exact => Vec::new(),
        MeasMode::Shots(_) => {
            opts.physical_terms.clone().unwrap_or_else(|| gell_mann_terms(&h.matrix))
        }
    };

    let mut phases: Vec<Phase> = vec![Phase { prep: opts.prep, nm: opts.nm.clone() }];
    if opts.exact_polish && matches!(opts.meas, MeasMode::Exact) {
        phases.push(Phase {
            prep: PrepMode::Exact,
            nm: NelderMeadConfig {
                initial_step: 0.02,
                f_tol: 1e-12,
                x_tol: 1e-12,
                max_iterations: 400,
                ..opts.nm.clone()
            },
        });
    }

    let mut x = vec![0.0; opts.mode.n_params()];
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut iterations = 0;
    let mut evaluations = 0usize;
    let mut restarts_used = 0;
    let mut converged = false;
    let mut eval_counter = 0u64;
    let mut f_best = f64::INFINITY;

    for phase in &phases {
        let mut attempts = 0;
        loop {
            let outcome = {
                let eval_counter = &mut eval_counter;
                nelder_mead(
                    |params: &[f64]| -> Result<f64> {
                        let t = ClusterAmplitudes::from_vector(opts.mode, params);
                        let state = prepare(&t, phase.prep);
                        let e = match &opts.meas {
                            MeasMode::Exact => exact_expectation(&state, &h.matrix)?,
                            MeasMode::Shots(plan) => {
                                let sub = ShotPlan {
                                    shots_per_setting: plan.shots_per_setting,
                                    seed: substream_seed(plan.seed, *eval_counter),
                                };
                                *eval_counter += 1;
                                term_by_term_energy(&state, &h.matrix, &terms, &sub)?.energy
                            }
                        };
                        Ok(e)
                    },
                    &x,
                    &phase.nm,
                )?
            };

            // attach fidelity diagnostics; objective points are re-prepared
            let base = trace.len();
            for (k, ev) in outcome.trace.iter().enumerate() {
                let t = ClusterAmplitudes::from_vector(opts.mode, &ev.point);
                let state = prepare(&t, phase.prep);
                trace.push(IterationRecord {
                    index: base + k,
                    energy: ev.value,
                    accepted: ev.accepted && ev.value < f_best,
                    fidelity: state.fidelity(&ground),
                });
            }
            x = outcome.x_best.clone();
            f_best = f_best.min(outcome.f_best);
            iterations += outcome.iterations;
            evaluations += outcome.evaluations;
            converged = outcome.converged;

            if converged || attempts >= opts.restarts {
                break;
            }
            // fresh simplex around the best point
            attempts += 1;
            restarts_used += 1;
        }
    }

    let amplitudes = ClusterAmplitudes::from_vector(opts.mode, &x);
    let final_prep = phases.last().map(|p| p.prep).unwrap_or(opts.prep);
    let final_state = prepare(&amplitudes, final_prep);
    let fidelity = final_state.fidelity(&ground);

    let (energy, stderr) = match &opts.meas {
        MeasMode::Exact => (exact_expectation(&final_state, &h.matrix)?, 0.0),
        MeasMode::Shots(plan) => {
            // unbiased re-measurement at the optimum on a fresh sub-stream
            let sub = ShotPlan {
                shots_per_setting: plan.shots_per_setting,
                seed: substream_seed(plan.seed, u64::MAX - 1),
            };
            let est = term_by_term_energy(&final_state, &h.matrix, &terms, &sub)?;
            (est.energy, est.stderr)
        }
    };

    Ok(VqeResult {
        amplitudes,
        energy,
        stderr,
        fidelity,
        iterations,
        evaluations,
        converged,
        restarts_used,
        settings: opts.settings(),
        trace,
    })
}

/// Ground-state search on the 4-qubit backend: the ansatz is the
/// Pauli-string-rotation circuit and the energy is taken on the full
/// 16-dimensional Jordan-Wigner Hamiltonian (exact measurement).
pub fn vqe_ground_qubits(sys: &System, opts: &VqeOptions) -> Result<VqeResult> {
    let n_trotter = match opts.prep {
        PrepMode::Trotter(n) => n,
        PrepMode::Exact => 2,
    };
    let h16 = pauli_to_matrix(&jw_transform(&sys.so, false))?;
    let sector_h = slater_condon_hamiltonian(&sys.so, false);
    let eig = exact_eigensystem(&sector_h);
    let ground = QuditState { amplitudes: eig.eigenvectors.column(0).into_owned() };

    let objective = |params: &[f64]| -> Result<f64> {
        let t = ClusterAmplitudes::from_vector(opts.mode, params);
        let psi = crate::ansatz::ucc_state_qubits(&t, n_trotter);
        let image = &h16 * nalgebra::DVector::from_vec(psi.amplitudes.clone());
        let mut e = Complex64::new(0.0, 0.0);
        for (a, b) in psi.amplitudes.iter().zip(image.iter()) {
            e += a.conj() * b;
        }
        Ok(e.re)
    };

    let x0 = vec![0.0; opts.mode.n_params()];
    let outcome = nelder_mead(objective, &x0, &opts.nm)?;
    // polish with a tighter simplex
    let polish_cfg = NelderMeadConfig {
        initial_step: 0.02,
        f_tol: 1e-12,
        x_tol: 1e-12,
        max_iterations: 400,
        ..opts.nm.clone()
    };
    let polish = nelder_mead(objective, &outcome.x_best, &polish_cfg)?;

    let amplitudes = ClusterAmplitudes::from_vector(opts.mode, &polish.x_best);
    let psi = crate::ansatz::ucc_state_qubits(&amplitudes, n_trotter);
    let sector = psi.sector_amplitudes();
    let fidelity = {
        let qs = QuditState { amplitudes: sector };
        qs.fidelity(&ground)
    };

    Ok(VqeResult {
        amplitudes,
        energy: polish.f_best,
        stderr: 0.0,
        fidelity,
        iterations: outcome.iterations + polish.iterations,
        evaluations: outcome.evaluations + polish.evaluations,
        converged: polish.converged,
        restarts_used: 0,
        settings: opts.settings(),
        trace: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// Scan drivers

/// Configuration shared by the scan drivers.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub mode: AmplitudeMode,
    pub trotter: u32,
    /// None = exact expectation values; Some(shots) = projection noise.
    pub shots: Option<u64>,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { mode: AmplitudeMode::Reduced2, trotter: 2, shots: None, seed: 0 }
    }
}

impl ScanConfig {
    fn vqe_options(&self, point_seed: u64) -> VqeOptions {
        match self.shots {
            None => VqeOptions {
                prep: PrepMode::Trotter(self.trotter),
                ..VqeOptions::exact(self.mode)
            },
            Some(shots) => VqeOptions {
                prep: PrepMode::Trotter(self.trotter),
                ..VqeOptions::shots(self.mode, ShotPlan::new(shots, point_seed))
            },
        }
    }
}

/// One point of the dissociation curve. Energies carry both conventions;
/// `error` marks per-point failures without aborting the scan.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SurfaceRecord {
    pub r: f64,
    pub e_vqe_electronic: f64,
    pub e_vqe_total: f64,
    pub e_exact_electronic: f64,
    pub e_exact_total: f64,
    pub iterations: usize,
    pub fidelity: f64,
    pub stderr: f64,
    pub error: Option<String>,
}

fn failed_surface_record(r: f64, message: String) -> SurfaceRecord {
    SurfaceRecord {
        r,
        e_vqe_electronic: f64::NAN,
        e_vqe_total: f64::NAN,
        e_exact_electronic: f64::NAN,
        e_exact_total: f64::NAN,
        iterations: 0,
        fidelity: f64::NAN,
        stderr: f64::NAN,
        error: Some(message),
    }
}

fn surface_point(r: f64, cfg: &ScanConfig, index: u64) -> SurfaceRecord {
    let run = || -> Result<SurfaceRecord> {
        let sys = System::heh_plus(r)?;
        let h = slater_condon_hamiltonian(&sys.so, false);
        let mut opts = cfg.vqe_options(substream_seed(cfg.seed, index));
        if cfg.shots.is_some() {
            opts.physical_terms = Some(measurement_terms(&sys.so, false));
        }
        let res = vqe_ground(&h, &opts)?;
        let exact = exact_eigensystem(&h).eigenvalues[0];
        Ok(SurfaceRecord {
            r,
            e_vqe_electronic: res.energy,
            e_vqe_total: res.energy + sys.so.enn,
            e_exact_electronic: exact,
            e_exact_total: exact + sys.so.enn,
            iterations: res.iterations,
            fidelity: res.fidelity,
            stderr: res.stderr,
            error: None,
        })
    };
    run().unwrap_or_else(|e| failed_surface_record(r, e.to_string()))
}

/// Rebuild integrals → SCF → Hamiltonian → VQE at every grid point.
/// Points are independent; with the `parallel` feature they run on a worker
/// pool, and per-point seeds keep the output identical either way.
pub fn dissociation_scan(grid: &[f64], cfg: &ScanConfig) -> Vec<SurfaceRecord> {
    #[cfg(feature = "parallel")]
    {
        grid.par_iter()
            .enumerate()
            .map(|(i, &r)| surface_point(r, cfg, i as u64))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.iter().enumerate().map(|(i, &r)| surface_point(r, cfg, i as u64)).collect()
    }
}

/// First- and second-order Rayleigh-Schrödinger curves for the perturbation
/// ε·V on top of H₀, from exact diagonalization of H₀.
pub fn perturbative_field_energies(
    h0: &QuditHamiltonian,
    v: &Matrix4c,
    strengths: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let eig = exact_eigensystem(h0);
    let gap = eig.eigenvalues[1] - eig.eigenvalues[0];
    if gap < 1e-8 {
        return Err(Error::DegenerateGround(gap));
    }
    let ground = eig.eigenvectors.column(0);
    let e0 = eig.eigenvalues[0];
    let v_ground = v * ground;
    let first_coeff = ground.dotc(&v_ground).re;
    let mut second_coeff = 0.0;
    for n in 1..4 {
        let vn = eig.eigenvectors.column(n);
        let coupling = vn.dotc(&v_ground).norm_sqr();
        second_coeff += coupling / (e0 - eig.eigenvalues[n]);
    }
    let first: Vec<f64> = strengths.iter().map(|&s| e0 + s * first_coeff).collect();
    let second: Vec<f64> =
        strengths.iter().map(|&s| e0 + s * first_coeff + s * s * second_coeff).collect();
    Ok((first, second))
}

/// One point of the field scan, in both energy conventions (the field terms
/// themselves are identical in either); the perturbative columns come from
/// exact diagonalization at zero field.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FieldRecord {
    pub strength: f64,
    pub e_vqe_total: f64,
    pub e_vqe_electronic: f64,
    pub e_exact_total: f64,
    pub e_exact_electronic: f64,
    pub e_pert1_total: f64,
    pub e_pert2_total: f64,
    pub iterations: usize,
    pub fidelity: f64,
    pub stderr: f64,
    pub error: Option<String>,
}

/// Ground energy under a static axial field of each given strength (a.u.),
/// with first- and second-order perturbative comparison curves.
pub fn field_scan(r: f64, strengths: &[f64], cfg: &ScanConfig) -> Result<Vec<FieldRecord>> {
    let sys = System::heh_plus(r)?;
    let h0 = slater_condon_hamiltonian(&sys.so, true);
    let unit = field_dress(&h0, &sys.mo, &sys.geometry, [0.0, 0.0, 1.0]);
    let v_unit = unit.matrix - h0.matrix;
    let (pert1, pert2) = perturbative_field_energies(&h0, &v_unit, strengths)?;

    let point = |(i, &strength): (usize, &f64)| -> FieldRecord {
        let run = || -> Result<FieldRecord> {
            let dressed = field_dress(&h0, &sys.mo, &sys.geometry, [0.0, 0.0, strength]);
            let opts = cfg.vqe_options(substream_seed(cfg.seed, i as u64));
            let res = vqe_ground(&dressed, &opts)?;
            let exact = exact_eigensystem(&dressed).eigenvalues[0];
            Ok(FieldRecord {
                strength,
                e_vqe_total: res.energy,
                e_vqe_electronic: res.energy - sys.so.enn,
                e_exact_total: exact,
                e_exact_electronic: exact - sys.so.enn,
                e_pert1_total: pert1[i],
                e_pert2_total: pert2[i],
                iterations: res.iterations,
                fidelity: res.fidelity,
                stderr: res.stderr,
                error: None,
            })
        };
        run().unwrap_or_else(|e| FieldRecord {
            strength,
            e_vqe_total: f64::NAN,
            e_vqe_electronic: f64::NAN,
            e_exact_total: f64::NAN,
            e_exact_electronic: f64::NAN,
            e_pert1_total: f64::NAN,
            e_pert2_total: f64::NAN,
            iterations: 0,
            fidelity: f64::NAN,
            stderr: f64::NAN,
            error: Some(e.to_string()),
        })
    };

    #[cfg(feature = "parallel")]
    let records = strengths.par_iter().enumerate().map(point).collect();
    #[cfg(not(feature = "parallel"))]
    let records = strengths.iter().enumerate().map(point).collect();
    Ok(records)
}

/// One λ point of the folded-spectrum scan. `e_plus`/`e_minus` are the two
/// solutions λ ± √⟨(H−λ)²⟩ bracketing the nearest eigenvalue.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FoldedRecord {
    pub lambda: f64,
    pub min_value: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub iterations: usize,
    pub stderr: f64,
    pub error: Option<String>,
}

/// Options for the folded-spectrum driver. Multi-start is essential: the
/// folded landscape has one basin per eigenvector.
#[derive(Debug, Clone)]
pub struct FoldedScanConfig {
    pub trotter: u32,
    pub shots: Option<u64>,
    pub seed: u64,
    /// Random re-starts per λ in addition to the zero start.
    pub n_starts: usize,
}

impl Default for FoldedScanConfig {
    fn default() -> Self {
        Self { trotter: 2, shots: None, seed: 0, n_starts: 11 }
    }
}

fn folded_point(h: &QuditHamiltonian, lambda: f64, cfg: &FoldedScanConfig, index: u64) -> FoldedRecord {
    let run = || -> Result<FoldedRecord> {
        let folded = fold(h, lambda);
        let point_seed = substream_seed(cfg.seed, index);
        let mut best: Option<VqeResult> = None;
        let mut iterations = 0;
        for start in 0..=cfg.n_starts {
            let mut opts = match cfg.shots {
                None => VqeOptions {
                    prep: PrepMode::Exact,
                    nm: NelderMeadConfig {
                        f_tol: 1e-14,
                        x_tol: 1e-12,
                        max_iterations: 500,
                        ..NelderMeadConfig::default()
                    },
                    ..VqeOptions::exact(AmplitudeMode::Full6)
                },
                Some(shots) => VqeOptions::shots(
                    AmplitudeMode::Full6,
                    ShotPlan::new(shots, substream_seed(point_seed, 1000 + start as u64)),
                ),
            };
            opts.prep = if cfg.shots.is_none() { PrepMode::Exact } else { PrepMode::Trotter(cfg.trotter) };
            // deterministic pseudo-random start points spread over the
            // rotation manifold; start 0 is the reference state
            let x0: Vec<f64> = if start == 0 {
                vec![0.0; 6]
            } else {
                (0..6)
                    .map(|k| {
                        let bits = substream_seed(point_seed, (start * 6 + k) as u64);
                        let u = bits as f64 / u64::MAX as f64;
                        2.4 * (u - 0.5)
                    })
                    .collect()
            };
            let outcome = run_vqe_from(&folded, &opts, &x0)?;
            iterations += outcome.iterations;
            if best.as_ref().map(|b| outcome.energy < b.energy).unwrap_or(true) {
                best = Some(outcome);
            }
        }
        // Nelder-Mead stagnates on occasion in six dimensions; re-polishing
        // the winner with fresh, shrinking simplexes recovers the basin floor
        if cfg.shots.is_none() {
            for polish_step in 0..3 {
                let current = best.as_ref().expect("at least one start");
                let opts = VqeOptions {
                    prep: PrepMode::Exact,
                    nm: NelderMeadConfig {
                        initial_step: 0.04 / (1 << polish_step) as f64,
                        f_tol: 1e-15,
                        x_tol: 1e-13,
                        max_iterations: 600,
                        ..NelderMeadConfig::default()
                    },
                    exact_polish: false,
                    ..VqeOptions::exact(AmplitudeMode::Full6)
                };
                let refined = run_vqe_from(&folded, &opts, &current.amplitudes.to_vector())?;
                iterations += refined.iterations;
                if refined.energy < current.energy {
                    best = Some(refined);
                }
            }
        }
        let best = best.expect("at least one start");
        let min_value = best.energy;
        let sqrt = min_value.max(0.0).sqrt();
        Ok(FoldedRecord {
            lambda,
            min_value,
            e_plus: lambda + sqrt,
            e_minus: lambda - sqrt,
            iterations,
            stderr: best.stderr,
            error: None,
        })
    };
    run().unwrap_or_else(|e| FoldedRecord {
        lambda,
        min_value: f64::NAN,
        e_plus: f64::NAN,
        e_minus: f64::NAN,
        iterations: 0,
        stderr: f64::NAN,
        error: Some(e.to_string()),
    })
}

/// Scan λ over the grid, minimizing ⟨(H−λ)²⟩ at each point.
pub fn folded_scan(h: &QuditHamiltonian, lambdas: &[f64], cfg: &FoldedScanConfig) -> Vec<FoldedRecord> {
    #[cfg(feature = "parallel")]
    {
        lambdas
            .par_iter()
            .enumerate()
            .map(|(i, &l)| folded_point(h, l, cfg, i as u64))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        lambdas.iter().enumerate().map(|(i, &l)| folded_point(h, l, cfg, i as u64)).collect()
    }
}

/// vqe_ground from an explicit start point (used by the multi-start folded
/// driver).
fn run_vqe_from(h: &QuditHamiltonian, opts: &VqeOptions, x0: &[f64]) -> Result<VqeResult> {
    let eig = exact_eigensystem(h);
    let ground = QuditState { amplitudes: eig.eigenvectors.column(0).into_owned() };
    let terms: Vec<MeasurementTerm> = match &opts.meas {
        MeasMode::Exact => Vec::new(),
        MeasMode::Shots(_) => {
            opts.physical_terms.clone().unwrap_or_else(|| gell_mann_terms(&h.matrix))
        }
    };
    let mut eval_counter = 0u64;
    let objective = |params: &[f64]| -> Result<f64> {
        let t = ClusterAmplitudes::from_vector(opts.mode, params);
        let state = prepare(&t, opts.prep);
        match &opts.meas {
            MeasMode::Exact => exact_expectation(&state, &h.matrix),
            MeasMode::Shots(plan) => {
                let sub = ShotPlan {
                    shots_per_setting: plan.shots_per_setting,
                    seed: substream_seed(plan.seed, eval_counter),
                };
                eval_counter += 1;
                Ok(term_by_term_energy(&state, &h.matrix, &terms, &sub)?.energy)
            }
        }
    };
    let outcome = nelder_mead(objective, x0, &opts.nm)?;
    let amplitudes = ClusterAmplitudes::from_vector(opts.mode, &outcome.x_best);
    let state = prepare(&amplitudes, opts.prep);
    let (energy, stderr) = match &opts.meas {
        MeasMode::Exact => (outcome.f_best, 0.0),
        MeasMode::Shots(plan) => {
            let sub = ShotPlan {
                shots_per_setting: plan.shots_per_setting,
                seed: substream_seed(plan.seed, u64::MAX - 1),
            };
            let est = term_by_term_energy(&state, &h.matrix, &terms, &sub)?;
            (est.energy, est.stderr)
        }
    };
    Ok(VqeResult {
        amplitudes,
        energy,
        stderr,
        fidelity: state.fidelity(&ground),
        iterations: outcome.iterations,
        evaluations: outcome.evaluations,
        converged: outcome.converged,
        restarts_used: 0,
        settings: opts.settings(),
        trace: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadratic_bowl_minimum() {
        let out = nelder_mead(
            |x| Ok(x[0] * x[0] + x[1] * x[1]),
            &[1.0, 1.0],
            &NelderMeadConfig { f_tol: 1e-14, ..Default::default() },
        )
        .unwrap();
        assert!(out.f_best < 1e-8);
        assert!(out.x_best.iter().all(|v| v.abs() < 1e-4));
        assert!(out.converged);
    }

    #[test]
    fn rosenbrock_minimum() {
        let out = nelder_mead(
            |x| Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)),
            &[-1.2, 1.0],
            &NelderMeadConfig { f_tol: 1e-14, x_tol: 1e-12, max_iterations: 2000, ..Default::default() },
        )
        .unwrap();
        assert_abs_diff_eq!(out.x_best[0], 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(out.x_best[1], 1.0, epsilon = 1e-4);
    }

    #[test]
    fn non_finite_objective_is_reported_with_the_point() {
        let result = nelder_mead(
            |x| Ok(if x[0] > 1.02 { f64::NAN } else { -x[0] }),
            &[1.0, 0.0],
            &NelderMeadConfig::default(),
        );
        assert!(matches!(result, Err(Error::NonFiniteObjective { .. })));
    }

    #[test]
    fn accepted_trace_energies_are_non_increasing() {
        let out = nelder_mead(
            |x| Ok((x[0] - 0.3).powi(2) + (x[1] + 0.2).powi(2)),
            &[2.0, -2.0],
            &NelderMeadConfig::default(),
        )
        .unwrap();
        let accepted: Vec<f64> =
            out.trace.iter().filter(|e| e.accepted).map(|e| e.value).collect();
        assert!(accepted.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn eigensystem_sorts_and_reconstructs() {
        let sys = System::heh_plus(1.7).unwrap();
        let h = slater_condon_hamiltonian(&sys.so, false);
        let eig = exact_eigensystem(&h);
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        // Σ e v v† = H
        let mut rebuilt = Matrix4c::zeros();
        for k in 0..4 {
            let v = eig.eigenvectors.column(k);
            rebuilt += (v * v.adjoint()) * Complex64::new(eig.eigenvalues[k], 0.0);
        }
        let dev = (rebuilt - h.matrix).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-10);
        // frozen eigenvalues from the independent reference at R = 1.7
        let reference = [-4.03908346072032, -3.34986542168611, -3.17182434821578, -1.84497862808669];
        for (a, b) in eig.eigenvalues.iter().zip(reference) {
            assert_abs_diff_eq!(*a, b + 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn diagonal_input_eigensystem_is_its_diagonal() {
        let mut m = Matrix4c::zeros();
        for (k, &v) in [3.0, -1.0, 2.0, 0.5].iter().enumerate() {
            m[(k, k)] = Complex64::new(v, 0.0);
        }
        let h = QuditHamiltonian {
            matrix: m,
            offset: 0.0,
            label: crate::hamiltonian::HamiltonianLabel::Bare,
        };
        let eig = exact_eigensystem(&h);
        assert_eq!(eig.eigenvalues, [-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn exact_vqe_reaches_the_ground_state() {
        let sys = System::heh_plus(1.7).unwrap();
        let h = slater_condon_hamiltonian(&sys.so, false);
        let res = vqe_ground(&h, &VqeOptions::exact(AmplitudeMode::Reduced2)).unwrap();
        let exact = exact_eigensystem(&h).eigenvalues[0];
        assert!((res.energy - exact).abs() < 1e-6, "gap {}", res.energy - exact);
        assert!(res.fidelity >= 0.999);
        // variational bound holds for every evaluation
        assert!(res.trace.iter().all(|e| e.energy >= exact - 1e-10));
        // accepted energies non-increasing
        let accepted: Vec<f64> =
            res.trace.iter().filter(|e| e.accepted).map(|e| e.energy).collect();
        assert!(accepted.windows(2).all(|w| w[1] <= w[0]));
        assert!(res.trace.iter().all(|e| (0.0..=1.0 + 1e-12).contains(&e.fidelity)));
    }

    #[test]
    fn full6_and_reduced2_reach_the_same_minimum() {
        let sys = System::heh_plus(1.7).unwrap();
        let h = slater_condon_hamiltonian(&sys.so, false);
        let r2 = vqe_ground(&h, &VqeOptions::exact(AmplitudeMode::Reduced2)).unwrap();
        let f6 = vqe_ground(&h, &VqeOptions::exact(AmplitudeMode::Full6)).unwrap();
        assert!((r2.energy - f6.energy).abs() < 1e-6, "r2 {} f6 {}", r2.energy, f6.energy);
    }

    #[test]
    fn qudit_and_qubit_backends_agree() {
        let sys = System::heh_plus(1.7).unwrap();
        let h = slater_condon_hamiltonian(&sys.so, false);
        let qudit = vqe_ground(&h, &VqeOptions::exact(AmplitudeMode::Reduced2)).unwrap();
        let qubit = vqe_ground_qubits(&sys, &VqeOptions::exact(AmplitudeMode::Reduced2)).unwrap();
        assert!(
            (qudit.energy - qubit.energy).abs() < 1e-8,
            "qudit {} qubit {}",
            qudit.energy,
            qubit.energy
        );
    }

    #[test]
    fn shot_mode_lands_near_the_ground_state() {
        let sys = System::heh_plus(1.7).unwrap();
        let h = slater_condon_hamiltonian(&sys.so, false);
        let mut opts = VqeOptions::shots(AmplitudeMode::Reduced2, ShotPlan::new(1000, 11));
        opts.physical_terms = Some(measurement_terms(&sys.so, false));
        let res = vqe_ground(&h, &opts).unwrap();
        let exact = exact_eigensystem(&h).eigenvalues[0];
        assert!(
            (res.energy - exact).abs() < 4.0 * res.stderr.max(0.01),
            "energy {} exact {} stderr {}",
            res.energy,
            exact,
            res.stderr
        );
        assert!(res.fidelity > 0.9);
    }

    #[test]
    fn dissociation_scan_satisfies_the_variational_bound() {
        let grid = [1.0, 1.7, 2.5];
        let records = dissociation_scan(&grid, &ScanConfig::default());
        for rec in &records {
            assert!(rec.error.is_none());
            assert!(rec.e_vqe_electronic >= rec.e_exact_electronic - 1e-10);
            assert_abs_diff_eq!(
                rec.e_vqe_total - rec.e_vqe_electronic,
                rec.e_exact_total - rec.e_exact_electronic,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn scan_is_deterministic_across_worker_schedules() {
        let grid = [1.2, 1.9];
        let cfg = ScanConfig { shots: Some(200), seed: 5, ..Default::default() };
        let a = dissociation_scan(&grid, &cfg);
        let b = dissociation_scan(&grid, &cfg);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.e_vqe_total.to_bits(), y.e_vqe_total.to_bits());
            assert_eq!(x.stderr.to_bits(), y.stderr.to_bits());
        }
    }

    #[test]
    fn perturbation_theory_matches_exact_at_small_fields() {
        let sys = System::heh_plus(1.7).unwrap();
        let h0 = slater_condon_hamiltonian(&sys.so, true);
        let dressed_unit = field_dress(&h0, &sys.mo, &sys.geometry, [0.0, 0.0, 1.0]);
        let v = dressed_unit.matrix - h0.matrix;
        let strengths = [0.0, 1e-3, 3e-3];
        let (first, second) = perturbative_field_energies(&h0, &v, &strengths).unwrap();
        let e0 = exact_eigensystem(&h0).eigenvalues[0];
        assert_abs_diff_eq!(first[0], e0, epsilon = 1e-12);
        assert_abs_diff_eq!(second[0], e0, epsilon = 1e-12);
        for (i, &s) in strengths.iter().enumerate() {
            let dressed = field_dress(&h0, &sys.mo, &sys.geometry, [0.0, 0.0, s]);
            let exact = exact_eigensystem(&dressed).eigenvalues[0];
            // second order should track exact to O(ε³)
            assert!((exact - second[i]).abs() < 1e-6, "at ε={s}");
        }
        // first-order curve is exactly linear
        let slope01 = (first[1] - first[0]) / (strengths[1] - strengths[0]);
        let slope12 = (first[2] - first[1]) / (strengths[2] - strengths[1]);
        assert_abs_diff_eq!(slope01, slope12, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_ground_state_is_rejected() {
        let h = QuditHamiltonian {
            matrix: Matrix4c::identity(),
            offset: 0.0,
            label: crate::hamiltonian::HamiltonianLabel::Bare,
        };
        let v = Matrix4c::identity();
        assert!(matches!(
            perturbative_field_energies(&h, &v, &[0.1]),
            Err(Error::DegenerateGround(_))
        ));
    }

    #[test]
    fn field_scan_zero_strength_matches_dissociation_point() {
        let records = field_scan(1.7, &[0.0, 0.05], &ScanConfig::default()).unwrap();
        let sys = System::heh_plus(1.7).unwrap();
        let h0 = slater_condon_hamiltonian(&sys.so, true);
        let e0 = exact_eigensystem(&h0).eigenvalues[0];
        assert_abs_diff_eq!(records[0].e_exact_total, e0, epsilon = 1e-12);
        assert!((records[0].e_vqe_total - e0).abs() < 1e-6);
        // polar molecule: ± fields give different exact energies
        let plus = field_scan(1.7, &[0.05], &ScanConfig::default()).unwrap();
        let minus = field_scan(1.7, &[-0.05], &ScanConfig::default()).unwrap();
        assert!((plus[0].e_exact_total - minus[0].e_exact_total).abs() > 1e-4);
    }

    #[test]
    fn shot_mode_folded_scan_resolution_criterion() {
        // finite-shot noise on ⟨(H−λ)²⟩ decides which levels are resolvable:
        // the two closely spaced middle levels fall below the noise floor,
        // the well-separated top level stays above it
        let sys = System::heh_plus(1.7).unwrap();
        let h = slater_condon_hamiltonian(&sys.so, true);
        let eig = exact_eigensystem(&h);
        let cfg = FoldedScanConfig {
            shots: Some(1000),
            seed: 21,
            n_starts: 4,
            ..Default::default()
        };

        // between the middle pair: the folded minima differ by at most
        // (Δe/2)², which must drown in the measurement noise
        let mid_gap = eig.eigenvalues[2] - eig.eigenvalues[1];
        let lambda_mid = 0.5 * (eig.eigenvalues[1] + eig.eigenvalues[2]);
        let rec = &folded_scan(&h, &[lambda_mid], &cfg)[0];
        assert!(rec.error.is_none());
        assert!(
            rec.stderr > (mid_gap / 2.0).powi(2),
            "middle levels unexpectedly resolvable: stderr {} vs spacing² {}",
            rec.stderr,
            (mid_gap / 2.0).powi(2)
        );

        // near the top level the gap to the next state is large
        let top_gap = eig.eigenvalues[3] - eig.eigenvalues[2];
        let lambda_top = eig.eigenvalues[3] - 0.1;
        let rec = &folded_scan(&h, &[lambda_top], &cfg)[0];
        assert!(
            rec.stderr < (top_gap / 2.0).powi(2),
            "top level should be resolvable: stderr {} vs gap² {}",
            rec.stderr,
            (top_gap / 2.0).powi(2)
        );
    }

    #[test]
    fn dissociation_curve_flattens_at_large_separation() {
        let tail = |r: f64| {
            let sys = System::heh_plus(r).unwrap();
            let h = slater_condon_hamiltonian(&sys.so, true);
            exact_eigensystem(&h).eigenvalues[0]
        };
        assert!((tail(6.0) - tail(5.5)).abs() < 0.01);
    }

    #[test]
    fn folded_scan_recovers_eigenvalues() {
        let sys = System::heh_plus(1.7).unwrap();
        let h = slater_condon_hamiltonian(&sys.so, true);
        let eig = exact_eigensystem(&h);
        // λ exactly at two representative eigenvalues (ground and the
        // decoupled single-excitation level)
        let lambdas = [eig.eigenvalues[0], eig.eigenvalues[1]];
        let records = folded_scan(&h, &lambdas, &FoldedScanConfig::default());
        for (rec, &e) in records.iter().zip(&lambdas) {
            assert!(rec.error.is_none());
            assert!(rec.min_value < 1e-8, "λ={e}: min {}", rec.min_value);
            assert!((rec.e_plus - e).abs() < 1e-4 || (rec.e_minus - e).abs() < 1e-4);
        }
        // λ between eigenvalues recovers the nearest one
        let mid = 0.5 * (eig.eigenvalues[2] + eig.eigenvalues[3]) + 0.3;
        let nearest = eig.eigenvalues[3];
        let records = folded_scan(&h, &[mid], &FoldedScanConfig::default());
        let rec = &records[0];
        let expect = (nearest - mid).powi(2);
        assert_abs_diff_eq!(rec.min_value, expect, epsilon = 1e-6);
        assert!((rec.e_plus - nearest).abs() < 1e-6);
    }
}
