//! Crate-wide error type.

use thiserror::Error;

use crate::scf::RhfSolution;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Boys function argument must be finite and non-negative, got {0}")]
    BoysDomain(f64),

    #[error("unsupported element Z={0}: no basis record for it")]
    UnsupportedElement(u32),

    #[error("malformed basis data: {0}")]
    BasisData(String),

    #[error("invalid molecular geometry: {0}")]
    Geometry(String),

    #[error("coincident nuclei {0} and {1}")]
    CoincidentNuclei(usize, usize),

    #[error("SCF did not converge within {iterations} iterations (last E_elec = {energy})")]
    ScfNotConverged {
        iterations: usize,
        energy: f64,
        last: Box<RhfSolution>,
    },

    #[error("MO coefficients are not S-orthonormal (max deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("register of {0} qubits exceeds the dense-matrix limit of 14")]
    RegisterTooLarge(usize),

    #[error("sector projection leaks outside the 2-electron S_z=0 block (max coupling {0:.3e})")]
    SectorLeakage(f64),

    #[error("observable is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("measurement terms do not sum to the target operator (max deviation {0:.3e})")]
    TermDecomposition(f64),

    #[error("objective returned a non-finite value at {point:?}")]
    NonFiniteObjective { point: Vec<f64> },

    #[error("ground state is degenerate within {0:.3e}; perturbation theory undefined")]
    DegenerateGround(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
