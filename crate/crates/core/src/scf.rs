//! Restricted Hartree-Fock for the two-electron / two-orbital problem,
//! AO→MO transformation, and expansion to spin-orbital tensors.
//!
//! The SCF is a plain damped fixed-point iteration with Löwdin symmetric
//! orthogonalization. DIIS would be dead weight at this size.
//!
//! Index conventions, fixed once for the whole crate:
//! - spatial orbitals P, Q, ... are RHF canonical orbitals sorted by energy;
//! - spin orbitals follow the order (1↑, 1↓, 2↑, 2↓), i.e. spatial(p) = p/2
//!   and spin(p) = p%2;
//! - the two-electron spin tensor stores h2[p][q][r][s] as the coefficient of
//!   a†_p a†_q a_r a_s (with the global ½ prefactor applied by consumers),
//!   which in chemist notation is (PS|QR)·δ_spin(p,s)·δ_spin(q,r). This is
//!   the single chemist↔physicist translation point in the crate.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::integrals::{AoIntegralSet, EriTensor};

/// Convergence knobs for the fixed-point SCF.
#[derive(Debug, Clone)]
pub struct ScfOptions {
    pub max_iterations: usize,
    /// |ΔE_elec| threshold between successive iterations.
    pub energy_tol: f64,
    /// max-abs density change threshold.
    pub density_tol: f64,
    /// fraction of the previous density mixed into the update.
    pub damping: f64,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self { max_iterations: 200, energy_tol: 1e-10, density_tol: 1e-8, damping: 0.3 }
    }
}

/// Converged (or last-iterate) RHF state.
#[derive(Debug, Clone)]
pub struct RhfSolution {
    /// MO coefficients, columns are orbitals, ordered by energy.
    pub coefficients: DMatrix<f64>,
    /// Orbital energies, ascending.
    pub orbital_energies: Vec<f64>,
    pub electronic_energy: f64,
    pub total_energy: f64,
    pub iterations: usize,
    pub converged: bool,
    /// E_elec after each iteration; with the default damping the sequence is
    /// non-increasing after the first step.
    pub energy_history: Vec<f64>,
}

fn lowdin_inverse_sqrt(s: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = s.clone().symmetric_eigen();
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
    &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose()
}

fn fock_matrix(hcore: &DMatrix<f64>, density: &DMatrix<f64>, eri: &EriTensor) -> DMatrix<f64> {
    let n = hcore.nrows();
    let mut f = hcore.clone();
    for p in 0..n {
        for q in 0..n {
            let mut g = 0.0;
            for r in 0..n {
                for s in 0..n {
                    g += density[(r, s)] * (eri.get(p, q, r, s) - 0.5 * eri.get(p, r, q, s));
                }
            }
            f[(p, q)] += g;
        }
    }
    f
}

/// Damped fixed-point SCF with Löwdin orthogonalization.
pub fn rhf_scf(ao: &AoIntegralSet, n_electrons: usize, opts: &ScfOptions) -> Result<RhfSolution> {
    let n = ao.s.nrows();
    assert!(n_electrons % 2 == 0, "RHF needs an even electron count");
    assert!(n_electrons / 2 <= n, "more electron pairs than basis functions");
    let n_occ = n_electrons / 2;

    let hcore = &ao.kinetic + &ao.nuclear;
    let x = lowdin_inverse_sqrt(&ao.s);

    let mut density = DMatrix::<f64>::zeros(n, n);
    let mut energy = 0.0;
    let mut history = Vec::new();
    let mut solution = None;

    for it in 0..opts.max_iterations {
        let f = fock_matrix(&hcore, &density, &ao.eri);
        let f_ortho = &x * &f * &x;
        let eig = f_ortho.symmetric_eigen();

        // sort orbitals by energy
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eps: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut c = DMatrix::<f64>::zeros(n, n);
        for (col, &k) in order.iter().enumerate() {
            c.set_column(col, &(&x * eig.eigenvectors.column(k)));
        }

        let occ = c.columns(0, n_occ);
        let new_density = 2.0 * &occ * occ.transpose();
        let mixed = if it == 0 {
            new_density.clone()
        } else {
            &new_density * (1.0 - opts.damping) + &density * opts.damping
        };

        let f_new = fock_matrix(&hcore, &mixed, &ao.eri);
        let new_energy = 0.5 * (mixed.component_mul(&(&hcore + &f_new))).sum();

        let de = (new_energy - energy).abs();
        let dp = (&mixed - &density).abs().max();
        density = mixed;
        energy = new_energy;
        history.push(energy);

        solution = Some(RhfSolution {
            coefficients: c,
            orbital_energies: eps,
            electronic_energy: energy,
            total_energy: energy + ao.enn,
            iterations: it + 1,
            converged: false,
            energy_history: history.clone(),
        });

        if it > 0 && de < opts.energy_tol && dp < opts.density_tol {
            let mut sol = solution.unwrap();
            sol.converged = true;
            return Ok(sol);
        }
    }

    let last = solution.expect("max_iterations >= 1");
    Err(Error::ScfNotConverged {
        iterations: opts.max_iterations,
        energy,
        last: Box::new(last),
    })
}

/// Spatial integrals in the MO basis.
#[derive(Debug, Clone)]
pub struct MoIntegrals {
    pub hcore: DMatrix<f64>,
    /// chemist convention (PQ|RS) over MOs
    pub eri: EriTensor,
    pub dipole: [DMatrix<f64>; 3],
    pub enn: f64,
}

/// AO→MO transform of the one- and two-electron integrals.
///
/// Rejects coefficient matrices that are not orthonormal under S.
pub fn mo_transform(ao: &AoIntegralSet, c: &DMatrix<f64>) -> Result<MoIntegrals> {
    let n = ao.s.nrows();
    let gram = c.transpose() * &ao.s * c;
    let dev = (&gram - DMatrix::<f64>::identity(n, n)).abs().max();
    if dev > 1e-8 {
        return Err(Error::NotOrthonormal(dev));
    }

    let hcore = c.transpose() * (&ao.kinetic + &ao.nuclear) * c;
    let dipole = [
        c.transpose() * &ao.dipole[0] * c,
        c.transpose() * &ao.dipole[1] * c,
        c.transpose() * &ao.dipole[2] * c,
    ];

    // four-index contraction; n is 1 or 2 here so the naive loop is fine,
    // and from_symmetric_fn keeps the 8-fold symmetry exact
    let eri = EriTensor::from_symmetric_fn(n, |p, q, r, s| {
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    for e in 0..n {
                        acc +=
                            c[(a, p)] * c[(b, q)] * c[(d, r)] * c[(e, s)] * ao.eri.get(a, b, d, e);
                    }
                }
            }
        }
        acc
    });

    Ok(MoIntegrals { hcore, eri, dipole, enn: ao.enn })
}

/// Spin-orbital tensors of the second-quantized Hamiltonian.
///
/// `h2[p][q][r][s]` multiplies a†_p a†_q a_r a_s; the ½ prefactor is NOT
/// included here.
#[derive(Debug, Clone)]
pub struct SpinOrbitalIntegrals {
    pub h1: [[f64; 4]; 4],
    pub h2: Box<[[[[f64; 4]; 4]; 4]; 4]>,
    pub enn: f64,
}

pub const N_SPIN_ORBITALS: usize = 4;

#[inline]
pub fn spatial(p: usize) -> usize {
    p / 2
}

#[inline]
pub fn spin(p: usize) -> usize {
    p % 2
}

/// Expand spatial MO integrals to the (1↑, 1↓, 2↑, 2↓) spin-orbital tensors.
///
/// Requires exactly two spatial orbitals.
pub fn spin_orbital_integrals(mo: &MoIntegrals) -> SpinOrbitalIntegrals {
    assert_eq!(mo.hcore.nrows(), 2, "spin-orbital expansion is fixed at 2 spatial orbitals");
    let mut h1 = [[0.0; 4]; 4];
    let mut h2 = Box::new([[[[0.0; 4]; 4]; 4]; 4]);
    for p in 0..4 {
        for q in 0..4 {
            if spin(p) == spin(q) {
                h1[p][q] = mo.hcore[(spatial(p), spatial(q))];
            }
        }
    }
    for p in 0..4 {
        for q in 0..4 {
            for r in 0..4 {
                for s in 0..4 {
                    if spin(p) == spin(s) && spin(q) == spin(r) {
                        // (PS|QR) in chemist convention
                        h2[p][q][r][s] =
                            mo.eri.get(spatial(p), spatial(s), spatial(q), spatial(r));
                    }
                }
            }
        }
    }
    SpinOrbitalIntegrals { h1, h2, enn: mo.enn }
}

/// One-body spin-orbital matrix of the electron-position operator projected
/// on a given field direction: d[p][q] = E·⟨P| r |Q⟩ δ_spin.
pub fn spin_orbital_dipole(mo: &MoIntegrals, field: [f64; 3]) -> [[f64; 4]; 4] {
    let mut d = [[0.0; 4]; 4];
    for p in 0..4 {
        for q in 0..4 {
            if spin(p) == spin(q) {
                let (pp, qq) = (spatial(p), spatial(q));
                d[p][q] = field[0] * mo.dipole[0][(pp, qq)]
                    + field[1] * mo.dipole[1][(pp, qq)]
                    + field[2] * mo.dipole[2][(pp, qq)];
            }
        }
    }
    d
}
