//! UCC ansatz state preparation.
//!
//! The cluster operator T = T₁ + T₂ with amplitudes (t₁₁, t₁₂, t₂) generates
//! the unitary e^(T−T†) = e^(−i·H_eff), H_eff = i(T−T†). Three preparation
//! paths are provided:
//!
//! - `ucc_state_exact`: dense matrix exponential on the 4-level sector;
//! - `ucc_state_trotter`: symmetric second-order splitting into the three
//!   per-amplitude generators, each of which exponentiates in closed form
//!   (its two 2-level blocks are disjoint);
//! - `ucc_state_qubits`: the 4-qubit route, exponentiating the Jordan-Wigner
//!   strings of each generator exactly and in the same symmetric order.
//!
//! Relative phases between the qudit and qubit conventions are not pinned by
//! the effective-Hamiltonian form; energy expectation values are what the
//! two backends are required (and tested) to agree on.

use nalgebra::Vector4;
use num_complex::Complex64;

use crate::hamiltonian::{Matrix4c, Pauli, PauliSum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum AmplitudeMode {
    /// three complex amplitudes = 6 real parameters
    Full6,
    /// t₁₁ = t₁₂ = t₁ and t₂, both real
    Reduced2,
}

impl AmplitudeMode {
    pub fn n_params(self) -> usize {
        match self {
            AmplitudeMode::Full6 => 6,
            AmplitudeMode::Reduced2 => 2,
        }
    }
}

/// Variational parameters of the cluster operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterAmplitudes {
    pub t11: Complex64,
    pub t12: Complex64,
    pub t2: Complex64,
    pub mode: AmplitudeMode,
}

impl ClusterAmplitudes {
    pub fn zero(mode: AmplitudeMode) -> Self {
        Self { t11: ZERO, t12: ZERO, t2: ZERO, mode }
    }

    pub fn full(t11: Complex64, t12: Complex64, t2: Complex64) -> Self {
        Self { t11, t12, t2, mode: AmplitudeMode::Full6 }
    }

    /// Reduced two-parameter form: t₁₁ = t₁₂ = t₁ real, t₂ real.
    pub fn reduced(t1: f64, t2: f64) -> Self {
        Self {
            t11: Complex64::new(t1, 0.0),
            t12: Complex64::new(t1, 0.0),
            t2: Complex64::new(t2, 0.0),
            mode: AmplitudeMode::Reduced2,
        }
    }

    /// Parameter vector layout: full6 = [Re t₁₁, Im t₁₁, Re t₁₂, Im t₁₂,
    /// Re t₂, Im t₂]; reduced2 = [t₁, t₂].
    pub fn from_vector(mode: AmplitudeMode, v: &[f64]) -> Self {
        assert_eq!(v.len(), mode.n_params(), "parameter vector length mismatch");
        match mode {
            AmplitudeMode::Full6 => Self::full(
                Complex64::new(v[0], v[1]),
                Complex64::new(v[2], v[3]),
                Complex64::new(v[4], v[5]),
            ),
            AmplitudeMode::Reduced2 => Self::reduced(v[0], v[1]),
        }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        match self.mode {
            AmplitudeMode::Full6 => vec![
                self.t11.re, self.t11.im, self.t12.re, self.t12.im, self.t2.re, self.t2.im,
            ],
            AmplitudeMode::Reduced2 => vec![self.t11.re, self.t2.re],
        }
    }
}

/// Normalized 4-amplitude state in the (|G⟩, |E₁₁⟩, |E₁₂⟩, |E₂⟩) basis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    pub amplitudes: Vector4<Complex64>,
}

impl QuditState {
    pub fn ground() -> Self {
        Self { amplitudes: Vector4::new(ONE, ZERO, ZERO, ZERO) }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// |⟨self|other⟩|²
    pub fn fidelity(&self, other: &QuditState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }
}

/// H_eff = i t₁₁(|E₁₁⟩⟨G| + |E₂⟩⟨E₁₂|) + i t₁₂(|E₁₂⟩⟨G| + |E₂⟩⟨E₁₁|)
///       + i t₂ |E₂⟩⟨G| + h.c.
pub fn effective_hamiltonian(t: &ClusterAmplitudes) -> Matrix4c {
    let i = Complex64::new(0.0, 1.0);
    let mut h = Matrix4c::zeros();
    let couplings = [(1usize, 0usize, t.t11), (3, 2, t.t11), (2, 0, t.t12), (3, 1, t.t12), (3, 0, t.t2)];
    for &(b, a, amp) in &couplings {
        h[(b, a)] += i * amp;
        h[(a, b)] += (i * amp).conj();
    }
    h
}

/// exp(−i·H_eff)|G⟩ via the dense matrix exponential.
pub fn ucc_state_exact(t: &ClusterAmplitudes) -> QuditState {
    let minus_i_h = effective_hamiltonian(t) * Complex64::new(0.0, -1.0);
    let u = minus_i_h.exp();
    QuditState { amplitudes: u.column(0).into_owned() }
}

/// One 2-level rotation exp(−i·s·(i t|b⟩⟨a| + h.c.)) applied in place.
fn apply_block_rotation(amps: &mut Vector4<Complex64>, a: usize, b: usize, t: Complex64, s: f64) {
    let magnitude = t.norm();
    if magnitude == 0.0 || s == 0.0 {
        return;
    }
    let phase = t / Complex64::new(magnitude, 0.0);
    let (sin, cos) = (s * magnitude).sin_cos();
    let (va, vb) = (amps[a], amps[b]);
    amps[a] = Complex64::new(cos, 0.0) * va - phase.conj() * Complex64::new(sin, 0.0) * vb;
    amps[b] = phase * Complex64::new(sin, 0.0) * va + Complex64::new(cos, 0.0) * vb;
}

/// The per-amplitude generators as disjoint 2-level blocks (a → b).
const T11_BLOCKS: [(usize, usize); 2] = [(0, 1), (2, 3)];
const T12_BLOCKS: [(usize, usize); 2] = [(0, 2), (1, 3)];
const T2_BLOCKS: [(usize, usize); 1] = [(0, 3)];

/// Symmetric second-order splitting applied N times to |G⟩:
/// [e^(−iH₁₁/2N) e^(−iH₁₂/2N) e^(−iH₂/N) e^(−iH₁₂/2N) e^(−iH₁₁/2N)]^N.
pub fn ucc_state_trotter(t: &ClusterAmplitudes, n: u32) -> QuditState {
    assert!(n >= 1);
    let mut amps = QuditState::ground().amplitudes;
    let half = 1.0 / (2.0 * n as f64);
    let full = 1.0 / n as f64;
    let apply = |amps: &mut Vector4<Complex64>, blocks: &[(usize, usize)], amp: Complex64, s: f64| {
        for &(a, b) in blocks {
            apply_block_rotation(amps, a, b, amp, s);
        }
    };
    for _ in 0..n {
        apply(&mut amps, &T11_BLOCKS, t.t11, half);
        apply(&mut amps, &T12_BLOCKS, t.t12, half);
        apply(&mut amps, &T2_BLOCKS, t.t2, full);
        apply(&mut amps, &T12_BLOCKS, t.t12, half);
        apply(&mut amps, &T11_BLOCKS, t.t11, half);
    }
    QuditState { amplitudes: amps }
}

/// 16-amplitude state of the 4-qubit register, qubit 0 = most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    pub amplitudes: Vec<Complex64>,
}

impl QubitState {
    /// The Hartree-Fock reference |1100⟩.
    pub fn reference() -> Self {
        let mut amplitudes = vec![ZERO; 16];
        amplitudes[crate::hamiltonian::SECTOR_STATES[0]] = ONE;
        Self { amplitudes }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Population outside the 2-electron S_z = 0 determinants.
    pub fn out_of_sector_population(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| !crate::hamiltonian::SECTOR_STATES.contains(i))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// The four sector amplitudes in (G, E11, E12, E2) order, unnormalized,
    /// in the τ_k|G⟩ phase convention of the qudit basis.
    pub fn sector_amplitudes(&self) -> Vector4<Complex64> {
        Vector4::from_fn(|k, _| {
            self.amplitudes[crate::hamiltonian::SECTOR_STATES[k]]
                * Complex64::new(crate::hamiltonian::SECTOR_PHASES[k], 0.0)
        })
    }
}

/// Jordan-Wigner strings of one cluster generator t·τ − t̄·τ†, as
/// (letters, rotation angle) pairs: the generator is Σ_j iθ_j P_j and all of
/// its strings commute, so exp splits exactly into string rotations.
fn generator_strings(n_qubits: usize, ops: &[(bool, usize)], t: Complex64) -> Vec<(Vec<Pauli>, f64)> {
    let mut product: Option<PauliSum> = None;
    for &(create, p) in ops {
        let factor = if create {
            PauliSum::jw_creation(n_qubits, p)
        } else {
            PauliSum::jw_annihilation(n_qubits, p)
        };
        product = Some(match product {
            None => factor,
            Some(acc) => acc.mul(&factor),
        });
    }
    let tau = product.expect("non-empty operator list");
    // t·τ − conj(t)·τ†: τ† of a real-structured JW product is obtained by
    // conjugating coefficients (all strings are Hermitian)
    let mut gen = tau.scaled(t);
    let dagger = PauliSum::from_terms(
        n_qubits,
        tau.terms()
            .iter()
            .map(|s| crate::hamiltonian::PauliString {
                coefficient: s.coefficient.conj(),
                letters: s.letters.clone(),
            })
            .collect(),
    );
    gen.add_assign(&dagger.scaled(-t.conj()));
    gen.terms()
        .iter()
        .map(|s| {
            debug_assert!(s.coefficient.re.abs() < 1e-14, "generator must be anti-Hermitian");
            (s.letters.clone(), s.coefficient.im)
        })
        .collect()
}

/// exp(iθP)ψ = cos(θ)ψ + i sin(θ)Pψ, exact for any Pauli string.
fn apply_string_rotation(state: &mut Vec<Complex64>, letters: &[Pauli], theta: f64) {
    if theta == 0.0 {
        return;
    }
    let string = crate::hamiltonian::PauliString { coefficient: ONE, letters: letters.to_vec() };
    let mut image = vec![ZERO; state.len()];
    string.apply_into(state, &mut image);
    let (sin, cos) = theta.sin_cos();
    for (s, p) in state.iter_mut().zip(&image) {
        *s = Complex64::new(cos, 0.0) * *s + Complex64::new(0.0, sin) * *p;
    }
}

/// 4-qubit preparation: every Jordan-Wigner string of T−T† exponentiated
/// exactly, symmetric (palindromic) term ordering, N repetitions, applied to
/// the reference |1100⟩.
pub fn ucc_state_qubits(t: &ClusterAmplitudes, n: u32) -> QubitState {
    assert!(n >= 1);
    let m = 4;
    // spin orbitals: 1↑=0, 1↓=1, 2↑=2, 2↓=3
    let mut plan: Vec<(Vec<Pauli>, f64)> = Vec::new();
    plan.extend(generator_strings(m, &[(true, 3), (false, 1)], t.t11));
    plan.extend(generator_strings(m, &[(true, 2), (false, 0)], t.t12));
    plan.extend(generator_strings(m, &[(true, 3), (true, 2), (false, 0), (false, 1)], t.t2));

    let mut state = QubitState::reference().amplitudes;
    let half = 1.0 / (2.0 * n as f64);
    for _ in 0..n {
        for (letters, theta) in plan.iter() {
            apply_string_rotation(&mut state, letters, theta * half);
        }
        for (letters, theta) in plan.iter().rev() {
            apply_string_rotation(&mut state, letters, theta * half);
        }
    }
    QubitState { amplitudes: state }
}

/// Number of spin-preserving excitation operators from the reference
/// determinant (lowest `n_occ` spin orbitals), per excitation level 1..=k.
///
/// `m` counts spin orbitals; spatial orbitals alternate (1↑, 1↓, 2↑, 2↓, ...).
pub fn cluster_term_count(m: usize, n_occ: usize, k: usize) -> Vec<u64> {
    assert!(m % 2 == 0, "spin orbitals come in pairs");
    assert!(n_occ > 0 && n_occ <= m);
    assert!(k >= 1 && k <= n_occ);
    let occ_up = n_occ.div_ceil(2);
    let occ_dn = n_occ / 2;
    let virt_up = m / 2 - occ_up;
    let virt_dn = m / 2 - occ_dn;
    (1..=k)
        .map(|level| {
            let mut count = 0u64;
            for up in 0..=level {
                let dn = level - up;
                count += binomial(occ_up, up)
                    * binomial(virt_up, up)
                    * binomial(occ_dn, dn)
                    * binomial(virt_dn, dn);
            }
            count
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc = 1u64;
    for j in 0..k {
        acc = acc * (n - j) as u64 / (j + 1) as u64;
    }
    acc
}
