//! Pauli-string algebra and the Jordan-Wigner images of fermionic operators.
//!
//! Strings are dense over a fixed register size M. Qubit j corresponds to
//! spin orbital j; in matrix/state-vector indexing qubit 0 is the most
//! significant bit, so the occupation pattern (n₀,n₁,...) maps to the basis
//! index Σ_j n_j · 2^(M−1−j).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub const PRUNE_TOL: f64 = 1e-12;

/// Dense-matrix backend guard: 2^14 × 2^14 complex is ~4 GiB territory.
pub const MAX_DENSE_QUBITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Single-qubit product `self * other` as (phase, letter).
    pub fn mul(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (X, X) | (Y, Y) | (Z, Z) => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
        }
    }
}

/// One weighted Pauli string over M qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub coefficient: Complex64,
    pub letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n_qubits: usize, coefficient: Complex64) -> Self {
        Self { coefficient, letters: vec![Pauli::I; n_qubits] }
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn letters_string(&self) -> String {
        self.letters.iter().map(|p| p.to_char()).collect()
    }

    /// Product of two strings over the same register.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.letters.len(), other.letters.len());
        let mut coefficient = self.coefficient * other.coefficient;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (phase, p) = a.mul(b);
                coefficient *= phase;
                p
            })
            .collect();
        PauliString { coefficient, letters }
    }

    /// Apply the string to a dense state vector, accumulating into `out`.
    /// Every Pauli string is a signed permutation, so each input amplitude
    /// lands on exactly one output index.
    pub fn apply_into(&self, state: &[Complex64], out: &mut [Complex64]) {
        let m = self.letters.len();
        debug_assert_eq!(state.len(), 1 << m);
        let mut flip_mask = 0usize;
        for (q, &p) in self.letters.iter().enumerate() {
            if matches!(p, Pauli::X | Pauli::Y) {
                flip_mask |= 1 << (m - 1 - q);
            }
        }
        for (j, &amp) in state.iter().enumerate() {
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut phase = self.coefficient;
            for (q, &p) in self.letters.iter().enumerate() {
                let bit = (j >> (m - 1 - q)) & 1;
                match p {
                    Pauli::Y => {
                        // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
                        phase *= if bit == 0 {
                            Complex64::new(0.0, 1.0)
                        } else {
                            Complex64::new(0.0, -1.0)
                        };
                    }
                    Pauli::Z => {
                        if bit == 1 {
                            phase = -phase;
                        }
                    }
                    _ => {}
                }
            }
            out[j ^ flip_mask] += phase * amp;
        }
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("PauliString", 3)?;
        s.serialize_field("letters", &self.letters_string())?;
        s.serialize_field("re", &self.coefficient.re)?;
        s.serialize_field("im", &self.coefficient.im)?;
        s.end()
    }
}

/// Merged, pruned sum of Pauli strings over a fixed register.
#[derive(Debug, Clone, Serialize)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    pub fn from_terms(n_qubits: usize, terms: Vec<PauliString>) -> Self {
        let mut sum = Self { n_qubits, terms };
        sum.merge(PRUNE_TOL);
        sum
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn push(&mut self, term: PauliString) {
        assert_eq!(term.letters.len(), self.n_qubits);
        self.terms.push(term);
    }

    /// Merge duplicate letter patterns, drop |c| < tol, sort canonically.
    pub fn merge(&mut self, tol: f64) {
        let mut map: BTreeMap<Vec<Pauli>, Complex64> = BTreeMap::new();
        for t in self.terms.drain(..) {
            *map.entry(t.letters).or_insert(Complex64::new(0.0, 0.0)) += t.coefficient;
        }
        self.terms = map
            .into_iter()
            .filter(|(_, c)| c.norm() >= tol)
            .map(|(letters, coefficient)| PauliString { coefficient, letters })
            .collect();
        // identity (all-I) sorts first under the BTreeMap ordering
    }

    pub fn add_assign(&mut self, other: &PauliSum) {
        assert_eq!(self.n_qubits, other.n_qubits);
        self.terms.extend(other.terms.iter().cloned());
        self.merge(PRUNE_TOL);
    }

    pub fn scaled(&self, factor: Complex64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliString { coefficient: t.coefficient * factor, letters: t.letters.clone() })
                .collect(),
        }
    }

    /// Operator product, merged.
    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        assert_eq!(self.n_qubits, other.n_qubits);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.mul(b));
            }
        }
        PauliSum::from_terms(self.n_qubits, terms)
    }

    /// Kronecker-product expansion to a dense 2^M × 2^M matrix.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::RegisterTooLarge(self.n_qubits));
        }
        let dim = 1usize << self.n_qubits;
        let mut out = DMatrix::<Complex64>::zeros(dim, dim);
        let mut col = vec![Complex64::new(0.0, 0.0); dim];
        let mut image = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..dim {
            col.fill(Complex64::new(0.0, 0.0));
            col[j] = Complex64::new(1.0, 0.0);
            image.fill(Complex64::new(0.0, 0.0));
            for t in &self.terms {
                t.apply_into(&col, &mut image);
            }
            for i in 0..dim {
                out[(i, j)] = image[i];
            }
        }
        Ok(out)
    }

    /// Apply the whole sum to a state vector.
    pub fn apply(&self, state: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
        for t in &self.terms {
            t.apply_into(state, &mut out);
        }
        out
    }

    /// Jordan-Wigner image of the annihilation operator a_p:
    /// ½ (X_p + iY_p) with Z on every lower index.
    pub fn jw_annihilation(n_qubits: usize, p: usize) -> PauliSum {
        Self::jw_ladder(n_qubits, p, 0.5)
    }

    /// Jordan-Wigner image of the creation operator a†_p:
    /// ½ (X_p − iY_p) with Z on every lower index.
    pub fn jw_creation(n_qubits: usize, p: usize) -> PauliSum {
        Self::jw_ladder(n_qubits, p, -0.5)
    }

    fn jw_ladder(n_qubits: usize, p: usize, y_sign: f64) -> PauliSum {
        assert!(p < n_qubits);
        let mut x_letters = vec![Pauli::I; n_qubits];
        let mut y_letters = vec![Pauli::I; n_qubits];
        for q in 0..p {
            x_letters[q] = Pauli::Z;
            y_letters[q] = Pauli::Z;
        }
        x_letters[p] = Pauli::X;
        y_letters[p] = Pauli::Y;
        PauliSum {
            n_qubits,
            terms: vec![
                PauliString { coefficient: Complex64::new(0.5, 0.0), letters: x_letters },
                PauliString { coefficient: Complex64::new(0.0, y_sign), letters: y_letters },
            ],
        }
    }

    /// Max |c| deviation from Hermiticity: for Pauli sums this is just the
    /// largest imaginary part over the merged coefficients.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.im.abs()).fold(0.0, f64::max)
    }
}
