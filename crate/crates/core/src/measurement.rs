//! Energy estimation: exact expectations, finite-shot sampling with quantum
//! projection noise, term-by-term Hamiltonian measurement, and 15-setting
//! state tomography by linear inversion in the generalized Gell-Mann basis.
//!
//! Everything is seed-deterministic: per-setting sample streams derive from
//! (seed, setting index), so concurrent and serial evaluation orders produce
//! bit-identical results.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ansatz::QuditState;
use crate::error::{Error, Result};
use crate::hamiltonian::{Matrix4c, MeasurementTerm};

const HERMITICITY_TOL: f64 = 1e-10;

/// splitmix64 step; the standard way to spawn independent sub-streams from
/// one 64-bit seed.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Shot budget for one energy estimation round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ShotPlan {
    pub shots_per_setting: u64,
    pub seed: u64,
}

impl ShotPlan {
    pub fn new(shots_per_setting: u64, seed: u64) -> Self {
        assert!(shots_per_setting >= 1);
        Self { shots_per_setting, seed }
    }
}

impl Default for ShotPlan {
    fn default() -> Self {
        Self { shots_per_setting: 1000, seed: 0 }
    }
}

/// 4×4 density matrix; Hermitian and unit trace, but linear-inversion
/// tomography does not guarantee positivity.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub matrix: Matrix4c,
}

impl DensityMatrix {
    pub fn pure(state: &QuditState) -> Self {
        let a = &state.amplitudes;
        Self { matrix: Matrix4c::from_fn(|i, j| a[i] * a[j].conj()) }
    }

    pub fn maximally_mixed() -> Self {
        Self { matrix: Matrix4c::identity() * Complex64::new(0.25, 0.0) }
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|k| self.matrix[(k, k)].re).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (self.matrix - self.matrix.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue; negative values flag an unphysical (but still
    /// energy-unbiased) linear-inversion reconstruction.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }
}

fn check_hermitian(o: &Matrix4c) -> Result<()> {
    let dev = (o - o.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if dev > HERMITICITY_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// ⟨ψ|O|ψ⟩ for Hermitian O.
pub fn exact_expectation(state: &QuditState, o: &Matrix4c) -> Result<f64> {
    check_hermitian(o)?;
    let image = o * state.amplitudes;
    let value = state.amplitudes.dotc(&image);
    debug_assert!(value.im.abs() < 1e-12, "imaginary residue {}", value.im);
    Ok(value.re)
}

/// Tr(ρO) for Hermitian O.
pub fn exact_expectation_rho(rho: &DensityMatrix, o: &Matrix4c) -> Result<f64> {
    check_hermitian(o)?;
    let prod = rho.matrix * o;
    let value: Complex64 = (0..4).map(|k| prod[(k, k)]).sum();
    debug_assert!(value.im.abs() < 1e-12, "imaginary residue {}", value.im);
    Ok(value.re)
}

/// A finite-shot estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Sample ⟨O⟩ from Born-rule eigenvalue outcomes.
///
/// O is eigendecomposed; `shots` outcomes are drawn from |⟨e_i|ψ⟩|²; the
/// sample mean and standard error of the mean are returned.
pub fn sampled_expectation(
    state: &QuditState,
    o: &Matrix4c,
    shots: u64,
    seed: u64,
) -> Result<Estimate> {
    check_hermitian(o)?;
    assert!(shots >= 1);
    let eig = o.symmetric_eigen();
    let mut probs = [0.0f64; 4];
    for k in 0..4 {
        let overlap = eig.eigenvectors.column(k).dotc(&state.amplitudes);
        probs[k] = overlap.norm_sqr();
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [0u64; 4];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut outcome = 3;
        for (k, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                outcome = k;
                break;
            }
        }
        counts[outcome] += 1;
    }

    let n = shots as f64;
    let mean: f64 = (0..4).map(|k| eig.eigenvalues[k] * counts[k] as f64 / n).sum();
    let stderr = if shots > 1 {
        let var: f64 = (0..4)
            .map(|k| counts[k] as f64 * (eig.eigenvalues[k] - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(Estimate { value: mean, stderr })
}

/// Result of a term-by-term Hamiltonian measurement.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TermEnergy {
    pub energy: f64,
    pub stderr: f64,
    /// Settings that actually required sampling (constants excluded).
    pub settings_used: usize,
}

/// Measure each Hermitian term on its own setting and add the results;
/// total standard error combines in quadrature.
///
/// The terms must sum to `h` — anything else means the decomposition is
/// wrong and the result would silently estimate a different operator.
pub fn term_by_term_energy(
    state: &QuditState,
    h: &Matrix4c,
    terms: &[MeasurementTerm],
    plan: &ShotPlan,
) -> Result<TermEnergy> {
    let mut total = Matrix4c::zeros();
    for t in terms {
        total += t.matrix;
    }
    let dev = (total - h).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if dev > 1e-10 {
        return Err(Error::TermDecomposition(dev));
    }

    let mut energy = 0.0;
    let mut variance = 0.0;
    let mut settings_used = 0;
    for (k, term) in terms.iter().enumerate() {
        if term.constant {
            energy += term.matrix[(0, 0)].re;
            continue;
        }
        let est = sampled_expectation(
            state,
            &term.matrix,
            plan.shots_per_setting,
            substream_seed(plan.seed, k as u64),
        )?;
        energy += est.value;
        variance += est.stderr * est.stderr;
        settings_used += 1;
    }
    Ok(TermEnergy { energy, stderr: variance.sqrt(), settings_used })
}

/// Infinite-shot limit of the term-by-term measurement.
pub fn term_by_term_exact(state: &QuditState, h: &Matrix4c, terms: &[MeasurementTerm]) -> Result<TermEnergy> {
    let mut total = Matrix4c::zeros();
    for t in terms {
        total += t.matrix;
    }
    let dev = (total - h).iter().map(|v| v.norm()).fold(0.0, f64::max);
    if dev > 1e-10 {
        return Err(Error::TermDecomposition(dev));
    }
    let mut energy = 0.0;
    let mut settings_used = 0;
    for term in terms {
        energy += if term.constant {
            term.matrix[(0, 0)].re
        } else {
            settings_used += 1;
            exact_expectation(state, &term.matrix)?
        };
    }
    Ok(TermEnergy { energy, stderr: 0.0, settings_used })
}

/// The 15 generalized Gell-Mann generators of su(4), normalized so that
/// Tr(g_j g_k) = 2 δ_jk. Order: 6 symmetric |j⟩⟨k|+|k⟩⟨j| over pairs
/// (0,1),(0,2),(0,3),(1,2),(1,3),(2,3); 6 antisymmetric −i|j⟩⟨k|+i|k⟩⟨j| in
/// the same pair order; 3 diagonal.
pub fn gell_mann_generators() -> Vec<Matrix4c> {
    let mut gens = Vec::with_capacity(15);
    let pairs = [(0usize, 1usize), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    for &(j, k) in &pairs {
        let mut m = Matrix4c::zeros();
        m[(j, k)] = Complex64::new(1.0, 0.0);
        m[(k, j)] = Complex64::new(1.0, 0.0);
        gens.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = Matrix4c::zeros();
        m[(j, k)] = Complex64::new(0.0, -1.0);
        m[(k, j)] = Complex64::new(0.0, 1.0);
        gens.push(m);
    }
    for l in 1..=3usize {
        let norm = (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
        let mut m = Matrix4c::zeros();
        for j in 0..l {
            m[(j, j)] = Complex64::new(norm, 0.0);
        }
        m[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
        gens.push(m);
    }
    gens
}

/// Linear-inversion state tomography from the 15 Gell-Mann settings:
/// ρ = I/4 + ½ Σ_k ⟨g_k⟩ g_k. Hermitian with unit trace by construction;
/// positivity is NOT repaired (Tr(ρH) stays unbiased that way).
pub fn tomography(state: &QuditState, plan: &ShotPlan) -> DensityMatrix {
    let generators = gell_mann_generators();
    debug_assert_eq!(generators.len(), 15);
    let mut rho = Matrix4c::identity() * Complex64::new(0.25, 0.0);
    for (k, g) in generators.iter().enumerate() {
        let est = sampled_expectation(
            state,
            g,
            plan.shots_per_setting,
            substream_seed(plan.seed, k as u64),
        )
        .expect("generators are Hermitian");
        rho += g * Complex64::new(0.5 * est.value, 0.0);
    }
    DensityMatrix { matrix: rho }
}

/// Energy from sampled tomography: Tr(ρH) with ρ by linear inversion.
/// Linear in the sampled means, so the standard error propagates exactly:
/// Var = ¼ Σ_k Tr(g_k H)² Var(⟨g_k⟩).
pub fn tomography_energy(state: &QuditState, h: &Matrix4c, plan: &ShotPlan) -> Result<Estimate> {
    check_hermitian(h)?;
    let trace_h: Complex64 = (0..4).map(|k| h[(k, k)]).sum();
    let mut energy = trace_h.re / 4.0;
    let mut variance = 0.0;
    for (k, g) in gell_mann_generators().iter().enumerate() {
        let est = sampled_expectation(
            state,
            g,
            plan.shots_per_setting,
            substream_seed(plan.seed, k as u64),
        )?;
        let prod = g * h;
        let weight: Complex64 = (0..4).map(|m| prod[(m, m)]).sum();
        energy += 0.5 * weight.re * est.value;
        variance += 0.25 * weight.re * weight.re * est.stderr * est.stderr;
    }
    Ok(Estimate { value: energy, stderr: variance.sqrt() })
}

/// Infinite-shot tomography; recovers |ψ⟩⟨ψ| exactly.
pub fn tomography_exact(state: &QuditState) -> DensityMatrix {
    let mut rho = Matrix4c::identity() * Complex64::new(0.25, 0.0);
    for g in gell_mann_generators() {
        let mean = exact_expectation(state, &g).expect("generators are Hermitian");
        rho += g * Complex64::new(0.5 * mean, 0.0);
    }
    DensityMatrix { matrix: rho }
}
