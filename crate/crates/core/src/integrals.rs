//! One- and two-electron integrals over contracted s-type Gaussians.
//!
//! The minimal STO-3G basis for H/He only needs s functions, so everything
//! here is the closed-form Gaussian-product-theorem kernel plus the Boys
//! function `F0` for the Coulomb-type integrals. Basis parameters are read
//! from a plain-text data file (one record per element) rather than being
//! hard-coded.

use nalgebra::{DMatrix, Vector3};
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Default STO-3G parameters shipped with the crate; parsed once at startup.
const STO3G_DATA: &str = include_str!("../data/sto3g.basis");

/// A point nucleus: charge and position in bohr.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nucleus {
    pub charge: u32,
    pub position: Vector3<f64>,
}

/// Nuclear frame of the molecule. Positions in bohr, charges in units of e.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeGeometry {
    pub nuclei: Vec<Nucleus>,
}

impl MoleculeGeometry {
    pub fn new(nuclei: Vec<Nucleus>) -> Result<Self> {
        if nuclei.is_empty() {
            return Err(Error::Geometry("at least one nucleus required".into()));
        }
        if let Some(n) = nuclei.iter().find(|n| n.charge < 1) {
            return Err(Error::Geometry(format!("nuclear charge {} < 1", n.charge)));
        }
        Ok(Self { nuclei })
    }

    /// HeH+ with He at the origin and H at (0, 0, R).
    pub fn heh_plus(r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Geometry(format!("bond length must be > 0, got {r}")));
        }
        Self::new(vec![
            Nucleus { charge: 2, position: Vector3::zeros() },
            Nucleus { charge: 1, position: Vector3::new(0.0, 0.0, r) },
        ])
    }

    /// Bond length of a diatomic, in bohr.
    pub fn bond_length(&self) -> f64 {
        assert_eq!(self.nuclei.len(), 2, "bond length is defined for diatomics");
        (self.nuclei[0].position - self.nuclei[1].position).norm()
    }
}

/// A contracted shell of s-type primitives on a common center.
///
/// `coefficients` hold the contraction weights with the per-primitive norm
/// `(2a/pi)^(3/4)` and the overall contraction normalization folded in, so
/// the contracted function has unit self-overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianShell {
    pub center: Vector3<f64>,
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
}

impl GaussianShell {
    /// Build a normalized contracted s shell from raw exponents and
    /// contraction weights (as tabulated in basis data files).
    pub fn contracted_s(center: Vector3<f64>, exponents: &[f64], weights: &[f64]) -> Self {
        assert_eq!(exponents.len(), weights.len());
        assert!(!exponents.is_empty());
        let coefficients: Vec<f64> = exponents
            .iter()
            .zip(weights)
            .map(|(&a, &w)| w * (2.0 * a / PI).powf(0.75))
            .collect();
        let mut shell = Self { center, exponents: exponents.to_vec(), coefficients };
        let norm = shell.self_overlap().sqrt();
        for c in &mut shell.coefficients {
            *c /= norm;
        }
        shell
    }

    pub fn self_overlap(&self) -> f64 {
        overlap(self, self)
    }
}

/// F0(x) = ∫₀¹ exp(−x t²) dt.
///
/// Small arguments use the Taylor series to avoid the 0/0 cancellation of
/// the closed form; elsewhere ½√(π/x)·erf(√x) is exact.
pub fn boys_f0(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::BoysDomain(x));
    }
    if x < 1e-6 {
        // 1 - x/3 + x²/10 - x³/42; the truncation error at 1e-6 is ~1e-27
        return Ok(1.0 - x / 3.0 + x * x / 10.0 - x * x * x / 42.0);
    }
    Ok(0.5 * (PI / x).sqrt() * libm::erf(x.sqrt()))
}

fn element_symbol(charge: u32) -> Option<&'static str> {
    match charge {
        1 => Some("H"),
        2 => Some("He"),
        _ => None,
    }
}

/// Parsed basis data: (element symbol, [(exponent, weight); 3]).
#[derive(Debug, Clone)]
pub struct BasisData {
    records: Vec<(String, Vec<(f64, f64)>)>,
}

impl BasisData {
    /// Parse the plain-text format: element symbol on its own line, followed
    /// by one "exponent coefficient" pair per line (3 for STO-3G).
    pub fn parse(text: &str) -> Result<Self> {
        let mut records: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() == 1 {
                records.push((fields[0].to_string(), Vec::new()));
            } else if fields.len() == 2 {
                let parse = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|e| Error::BasisData(format!("line {}: {e}", lineno + 1)))
                };
                let pair = (parse(fields[0])?, parse(fields[1])?);
                match records.last_mut() {
                    Some((_, pairs)) => pairs.push(pair),
                    None => {
                        return Err(Error::BasisData(format!(
                            "line {}: primitive data before any element symbol",
                            lineno + 1
                        )))
                    }
                }
            } else {
                return Err(Error::BasisData(format!("line {}: expected 1 or 2 fields", lineno + 1)));
            }
        }
        for (sym, pairs) in &records {
            if pairs.is_empty() {
                return Err(Error::BasisData(format!("element {sym} has no primitives")));
            }
            if pairs.iter().any(|&(a, _)| a <= 0.0) {
                return Err(Error::BasisData(format!("element {sym} has a non-positive exponent")));
            }
        }
        Ok(Self { records })
    }

    pub fn lookup(&self, symbol: &str) -> Option<&[(f64, f64)]> {
        self.records
            .iter()
            .find(|(s, _)| s == symbol)
            .map(|(_, p)| p.as_slice())
    }

    /// The STO-3G data bundled with the crate.
    pub fn sto3g() -> &'static BasisData {
        static DATA: OnceLock<BasisData> = OnceLock::new();
        DATA.get_or_init(|| BasisData::parse(STO3G_DATA).expect("bundled basis data is well-formed"))
    }
}

/// One normalized contracted s shell per nucleus, from the given basis table.
pub fn build_basis(geometry: &MoleculeGeometry, data: &BasisData) -> Result<Vec<GaussianShell>> {
    geometry
        .nuclei
        .iter()
        .map(|n| {
            let sym = element_symbol(n.charge).ok_or(Error::UnsupportedElement(n.charge))?;
            let pairs = data.lookup(sym).ok_or(Error::UnsupportedElement(n.charge))?;
            let (exps, weights): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            Ok(GaussianShell::contracted_s(n.position, &exps, &weights))
        })
        .collect()
}

/// One normalized STO-3G s shell per nucleus.
pub fn build_sto3g_basis(geometry: &MoleculeGeometry) -> Result<Vec<GaussianShell>> {
    build_basis(geometry, BasisData::sto3g())
}

/// Iterate over primitive pairs of two shells with the combined Gaussian
/// parameters: (c_i c_j, p = a+b, mu = ab/p, product center P).
fn primitive_pairs<'a>(
    sa: &'a GaussianShell,
    sb: &'a GaussianShell,
) -> impl Iterator<Item = (f64, f64, f64, Vector3<f64>)> + 'a {
    let ab2 = (sa.center - sb.center).norm_squared();
    sa.exponents
        .iter()
        .zip(&sa.coefficients)
        .flat_map(move |(&a, &ca)| {
            sb.exponents.iter().zip(&sb.coefficients).map(move |(&b, &cb)| {
                let p = a + b;
                let mu = a * b / p;
                let center = (sa.center * a + sb.center * b) / p;
                (ca * cb * (-mu * ab2).exp(), p, mu, center)
            })
        })
}

/// Contracted overlap ⟨a|b⟩.
pub fn overlap(sa: &GaussianShell, sb: &GaussianShell) -> f64 {
    primitive_pairs(sa, sb).map(|(k, p, _, _)| k * (PI / p).powf(1.5)).sum()
}

/// Contracted kinetic energy ⟨a| −½∇² |b⟩.
pub fn kinetic(sa: &GaussianShell, sb: &GaussianShell) -> f64 {
    let ab2 = (sa.center - sb.center).norm_squared();
    primitive_pairs(sa, sb)
        .map(|(k, p, mu, _)| k * mu * (3.0 - 2.0 * mu * ab2) * (PI / p).powf(1.5))
        .sum()
}

/// Contracted nuclear attraction ⟨a| Σ_C −Z_C/|r−R_C| |b⟩.
pub fn nuclear_attraction(sa: &GaussianShell, sb: &GaussianShell, geometry: &MoleculeGeometry) -> f64 {
    primitive_pairs(sa, sb)
        .map(|(k, p, _, center)| {
            let mut v = 0.0;
            for n in &geometry.nuclei {
                let pc2 = (center - n.position).norm_squared();
                v -= n.charge as f64
                    * boys_f0(p * pc2).expect("p*pc2 is finite and non-negative");
            }
            k * 2.0 * PI / p * v
        })
        .sum()
}

/// Contracted electron-position integral ⟨a| r_axis |b⟩ (axis 0..2).
pub fn dipole_component(sa: &GaussianShell, sb: &GaussianShell, axis: usize) -> f64 {
    primitive_pairs(sa, sb)
        .map(|(k, p, _, center)| k * (PI / p).powf(1.5) * center[axis])
        .sum()
}

/// Two-electron repulsion integral in chemist convention (ab|cd).
pub fn electron_repulsion(
    sa: &GaussianShell,
    sb: &GaussianShell,
    sc: &GaussianShell,
    sd: &GaussianShell,
) -> f64 {
    let mut val = 0.0;
    for (kab, p, _, pp) in primitive_pairs(sa, sb) {
        for (kcd, q, _, pq) in primitive_pairs(sc, sd) {
            let alpha = p * q / (p + q);
            let pq2 = (pp - pq).norm_squared();
            val += kab * kcd * 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt())
                * boys_f0(alpha * pq2).expect("alpha*pq2 is finite and non-negative");
        }
    }
    val
}

/// Dense (pq|rs) tensor with exact 8-fold permutational symmetry: one
/// canonical representative per orbit is computed and copied to the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct EriTensor {
    n: usize,
    data: Vec<f64>,
}

impl EriTensor {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[((p * self.n + q) * self.n + r) * self.n + s]
    }

    #[inline]
    pub(crate) fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        self.data[((p * self.n + q) * self.n + r) * self.n + s] = v;
    }

    /// Fill one canonical representative per 8-fold orbit from `f` and mirror
    /// it to the whole orbit, making the symmetry exact by construction.
    pub fn from_symmetric_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for p in 0..n {
            for q in 0..=p {
                for r in 0..n {
                    for s in 0..=r {
                        if p * n + q < r * n + s {
                            continue;
                        }
                        let v = f(p, q, r, s);
                        for &(a, b) in &[(p, q), (q, p)] {
                            for &(c, d) in &[(r, s), (s, r)] {
                                t.set(a, b, c, d, v);
                                t.set(c, d, a, b, v);
                            }
                        }
                    }
                }
            }
        }
        t
    }
}

/// All (pq|rs) over the contracted basis.
pub fn two_electron_integrals(basis: &[GaussianShell]) -> EriTensor {
    EriTensor::from_symmetric_fn(basis.len(), |p, q, r, s| {
        electron_repulsion(&basis[p], &basis[q], &basis[r], &basis[s])
    })
}

/// One-electron matrices over the contracted basis.
#[derive(Debug, Clone)]
pub struct OneElectronIntegrals {
    pub s: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    /// ⟨χ_p| r_c |χ_q⟩ per Cartesian axis.
    pub dipole: [DMatrix<f64>; 3],
}

pub fn one_electron_integrals(
    basis: &[GaussianShell],
    geometry: &MoleculeGeometry,
) -> OneElectronIntegrals {
    let n = basis.len();
    let build = |f: &dyn Fn(&GaussianShell, &GaussianShell) -> f64| {
        DMatrix::from_fn(n, n, |i, j| f(&basis[i], &basis[j]))
    };
    OneElectronIntegrals {
        s: build(&overlap),
        kinetic: build(&kinetic),
        nuclear: build(&|a, b| nuclear_attraction(a, b, geometry)),
        dipole: [
            build(&|a, b| dipole_component(a, b, 0)),
            build(&|a, b| dipole_component(a, b, 1)),
            build(&|a, b| dipole_component(a, b, 2)),
        ],
    }
}

/// Σ_{A<B} Z_A Z_B / |R_A − R_B|.
pub fn nuclear_repulsion(geometry: &MoleculeGeometry) -> Result<f64> {
    let mut e = 0.0;
    for (i, a) in geometry.nuclei.iter().enumerate() {
        for (j, b) in geometry.nuclei.iter().enumerate().skip(i + 1) {
            let d = (a.position - b.position).norm();
            if d < 1e-12 {
                return Err(Error::CoincidentNuclei(i, j));
            }
            e += (a.charge as f64) * (b.charge as f64) / d;
        }
    }
    Ok(e)
}

/// Everything the SCF stage needs, bundled.
#[derive(Debug, Clone)]
pub struct AoIntegralSet {
    pub s: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    pub nuclear: DMatrix<f64>,
    pub dipole: [DMatrix<f64>; 3],
    pub eri: EriTensor,
    pub enn: f64,
}

/// Build the full STO-3G integral set for a geometry.
pub fn ao_integrals(geometry: &MoleculeGeometry) -> Result<AoIntegralSet> {
    let basis = build_sto3g_basis(geometry)?;
    let one = one_electron_integrals(&basis, geometry);
    let eri = two_electron_integrals(&basis);
    let enn = nuclear_repulsion(geometry)?;
    Ok(AoIntegralSet {
        s: one.s,
        kinetic: one.kinetic,
        nuclear: one.nuclear,
        dipole: one.dipole,
        eri,
        enn,
    })
}
