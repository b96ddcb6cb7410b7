//! End-to-end classical simulator of a unitary coupled-cluster variational
//! eigensolver for the helium hydride cation.
//!
//! The pipeline: STO-3G Gaussian integrals → restricted Hartree-Fock →
//! second-quantized Hamiltonian → Jordan-Wigner qubit image and its
//! four-level (qudit) sector → Trotterized UCC state preparation →
//! exact or finite-shot energy estimation → Nelder-Mead minimization.
//! Scan drivers reproduce the dissociation curve, static-field bond
//! softening, and folded-spectrum excited-state extraction.

pub mod ansatz;
pub mod error;
pub mod hamiltonian;
pub mod measurement;
pub mod integrals;
pub mod scf;
pub mod vqe;

pub use error::{Error, Result};

use integrals::{AoIntegralSet, MoleculeGeometry};
use scf::{MoIntegrals, RhfSolution, ScfOptions, SpinOrbitalIntegrals};

/// Fully assembled electronic-structure data for one geometry: the common
/// input to the Hamiltonian builders and scan drivers.
#[derive(Debug, Clone)]
pub struct System {
    pub geometry: MoleculeGeometry,
    pub ao: AoIntegralSet,
    pub rhf: RhfSolution,
    pub mo: MoIntegrals,
    pub so: SpinOrbitalIntegrals,
}

impl System {
    /// Integrals → SCF → MO transform → spin-orbital tensors.
    pub fn build(geometry: MoleculeGeometry) -> Result<Self> {
        let ao = integrals::ao_integrals(&geometry)?;
        let rhf = scf::rhf_scf(&ao, 2, &ScfOptions::default())?;
        let mo = scf::mo_transform(&ao, &rhf.coefficients)?;
        let so = scf::spin_orbital_integrals(&mo);
        Ok(Self { geometry, ao, rhf, mo, so })
    }

    /// Shortcut for HeH+ at bond length `r` (bohr).
    pub fn heh_plus(r: f64) -> Result<Self> {
        Self::build(MoleculeGeometry::heh_plus(r)?)
    }
}
