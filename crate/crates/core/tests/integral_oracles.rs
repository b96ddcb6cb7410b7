//! Independent numerical oracles for the analytic Gaussian integrals.
//!
//! Nothing here reuses the closed forms under test: basis functions are
//! evaluated pointwise and integrated by paneled Gauss-Legendre tensor
//! quadrature. The nuclear-attraction oracle integrates in spherical
//! coordinates around the attracting nucleus so the 1/r singularity cancels
//! against the volume element; the repulsion oracle integrates the
//! electrostatic potential of one pointwise-assembled charge distribution
//! (the Gaussian-potential erf identity) against the other, and a direct
//! 6-D Monte Carlo estimate cross-checks it.

use heh_vqe::integrals::{
    ao_integrals, build_sto3g_basis, GaussianShell, MoleculeGeometry,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

// ---------------------------------------------------------------------------
// quadrature machinery

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let (mut p0, mut p1) = (1.0f64, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for m in 2..=n {
            let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Map GL nodes onto consecutive panels.
fn paneled(breaks: &[f64], per_panel: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = gauss_legendre(per_panel);
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, wt) in nodes.iter().zip(&weights) {
            out.push((mid + half * x, half * wt));
        }
    }
    out
}

/// Panel boundaries refined around each Gaussian center on the axis.
fn axis_breaks(centers: &[f64]) -> Vec<f64> {
    let mut b = Vec::new();
    for &c in centers {
        for off in [-9.0, -2.5, -0.8, 0.8, 2.5, 9.0] {
            b.push(c + off);
        }
    }
    b.sort_by(f64::total_cmp);
    b.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    b
}

fn eval_shell(shell: &GaussianShell, x: f64, y: f64, z: f64) -> f64 {
    let d2 = (x - shell.center[0]).powi(2)
        + (y - shell.center[1]).powi(2)
        + (z - shell.center[2]).powi(2);
    shell
        .exponents
        .iter()
        .zip(&shell.coefficients)
        .map(|(&a, &c)| c * (-a * d2).exp())
        .sum()
}

fn laplacian_shell(shell: &GaussianShell, x: f64, y: f64, z: f64) -> f64 {
    let d2 = (x - shell.center[0]).powi(2)
        + (y - shell.center[1]).powi(2)
        + (z - shell.center[2]).powi(2);
    shell
        .exponents
        .iter()
        .zip(&shell.coefficients)
        .map(|(&a, &c)| c * (4.0 * a * a * d2 - 6.0 * a) * (-a * d2).exp())
        .sum()
}

/// ∫ f over the 3-D box spanned by the paneled axes.
fn integrate_3d(
    zc: &[f64],
    per_panel: usize,
    f: impl Fn(f64, f64, f64) -> f64,
) -> f64 {
    let xy = paneled(&axis_breaks(&[0.0]), per_panel);
    let z = paneled(&axis_breaks(zc), per_panel);
    let mut total = 0.0;
    for &(x, wx) in &xy {
        for &(y, wy) in &xy {
            let mut zsum = 0.0;
            for &(zv, wz) in &z {
                zsum += wz * f(x, y, zv);
            }
            total += wx * wy * zsum;
        }
    }
    total
}

/// ∫ f(x)/|x−c| with the singularity removed in spherical coordinates around
/// c: ∫ r f dr dμ dφ. The axial geometry makes the φ integral a 2π factor.
fn integrate_coulomb_spherical(c: [f64; 3], f: impl Fn(f64, f64, f64) -> f64) -> f64 {
    let radial = paneled(&[0.0, 0.4, 1.2, 3.0, 7.0, 16.0, 30.0], 24);
    let (mu_nodes, mu_weights) = gauss_legendre(64);
    let mut total = 0.0;
    for &(r, wr) in &radial {
        let mut msum = 0.0;
        for (mu, wm) in mu_nodes.iter().zip(&mu_weights) {
            let sin = (1.0 - mu * mu).sqrt();
            // φ-independent by axial symmetry: evaluate at φ = 0
            msum += wm * f(c[0] + r * sin, c[1], c[2] + r * mu);
        }
        total += wr * r * msum;
    }
    2.0 * std::f64::consts::PI * total
}

/// Electrostatic potential at x of the product distribution χ_r·χ_s,
/// assembled per primitive pair by completing the square and applying the
/// erf potential of a spherical Gaussian.
fn product_potential(sr: &GaussianShell, ss: &GaussianShell, x: f64, y: f64, z: f64) -> f64 {
    let mut v = 0.0;
    let cd2: f64 = (0..3).map(|k| (sr.center[k] - ss.center[k]).powi(2)).sum();
    for (&a, &ca) in sr.exponents.iter().zip(&sr.coefficients) {
        for (&b, &cb) in ss.exponents.iter().zip(&ss.coefficients) {
            let p = a + b;
            let prefactor = ca * cb * (-(a * b / p) * cd2).exp();
            let px = (a * sr.center[0] + b * ss.center[0]) / p;
            let py = (a * sr.center[1] + b * ss.center[1]) / p;
            let pz = (a * sr.center[2] + b * ss.center[2]) / p;
            let r = ((x - px).powi(2) + (y - py).powi(2) + (z - pz).powi(2)).sqrt();
            let charge = (std::f64::consts::PI / p).powf(1.5);
            let pot = if r < 1e-8 {
                2.0 * (p / std::f64::consts::PI).sqrt()
            } else {
                libm::erf(p.sqrt() * r) / r
            };
            v += prefactor * charge * pot;
        }
    }
    v
}

const SAMPLE_GEOMETRIES: [f64; 5] = [0.8, 1.2, 1.4632, 2.5, 4.0];

// ---------------------------------------------------------------------------
// oracles

#[test]
fn overlap_matches_quadrature_on_the_sample_grid() {
    for &r in &SAMPLE_GEOMETRIES {
        let geom = MoleculeGeometry::heh_plus(r).unwrap();
        let basis = build_sto3g_basis(&geom).unwrap();
        let ao = ao_integrals(&geom).unwrap();
        for p in 0..2 {
            for q in p..2 {
                let oracle = integrate_3d(&[0.0, r], 20, |x, y, z| {
                    eval_shell(&basis[p], x, y, z) * eval_shell(&basis[q], x, y, z)
                });
                let tol = if (r - 1.4632).abs() < 1e-12 { 1e-8 } else { 1e-6 };
                assert!(
                    (ao.s[(p, q)] - oracle).abs() < tol,
                    "S[{p}{q}] at R={r}: analytic {} oracle {}",
                    ao.s[(p, q)],
                    oracle
                );
            }
        }
    }
}

#[test]
fn kinetic_matches_quadrature_on_the_sample_grid() {
    for &r in &SAMPLE_GEOMETRIES {
        let geom = MoleculeGeometry::heh_plus(r).unwrap();
        let basis = build_sto3g_basis(&geom).unwrap();
        let ao = ao_integrals(&geom).unwrap();
        for p in 0..2 {
            for q in 0..2 {
                let oracle = integrate_3d(&[0.0, r], 20, |x, y, z| {
                    -0.5 * eval_shell(&basis[p], x, y, z) * laplacian_shell(&basis[q], x, y, z)
                });
                assert!(
                    (ao.kinetic[(p, q)] - oracle).abs() < 1e-6,
                    "T[{p}{q}] at R={r}: analytic {} oracle {}",
                    ao.kinetic[(p, q)],
                    oracle
                );
            }
        }
    }
}

#[test]
fn dipole_matches_quadrature_on_the_sample_grid() {
    for &r in &SAMPLE_GEOMETRIES {
        let geom = MoleculeGeometry::heh_plus(r).unwrap();
        let basis = build_sto3g_basis(&geom).unwrap();
        let ao = ao_integrals(&geom).unwrap();
        for p in 0..2 {
            for q in p..2 {
                let oracle = integrate_3d(&[0.0, r], 20, |x, y, z| {
                    eval_shell(&basis[p], x, y, z) * z * eval_shell(&basis[q], x, y, z)
                });
                assert!(
                    (ao.dipole[2][(p, q)] - oracle).abs() < 1e-6,
                    "Dz[{p}{q}] at R={r}: analytic {} oracle {}",
                    ao.dipole[2][(p, q)],
                    oracle
                );
            }
        }
    }
}

#[test]
fn nuclear_attraction_matches_spherical_quadrature() {
    for &r in &SAMPLE_GEOMETRIES {
        let geom = MoleculeGeometry::heh_plus(r).unwrap();
        let basis = build_sto3g_basis(&geom).unwrap();
        let ao = ao_integrals(&geom).unwrap();
        for p in 0..2 {
            for q in p..2 {
                let mut oracle = 0.0;
                for nucleus in &geom.nuclei {
                    let c = [nucleus.position[0], nucleus.position[1], nucleus.position[2]];
                    oracle -= nucleus.charge as f64
                        * integrate_coulomb_spherical(c, |x, y, z| {
                            eval_shell(&basis[p], x, y, z) * eval_shell(&basis[q], x, y, z)
                        });
                }
                assert!(
                    (ao.nuclear[(p, q)] - oracle).abs() < 1e-6,
                    "V[{p}{q}] at R={r}: analytic {} oracle {}",
                    ao.nuclear[(p, q)],
                    oracle
                );
            }
        }
    }
}

#[test]
fn electron_repulsion_matches_potential_quadrature() {
    // unique canonical index combinations for two basis functions
    let combos: [(usize, usize, usize, usize); 6] =
        [(0, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 1, 1), (1, 1, 1, 1)];
    for &r in &SAMPLE_GEOMETRIES {
        let geom = MoleculeGeometry::heh_plus(r).unwrap();
        let basis = build_sto3g_basis(&geom).unwrap();
        let ao = ao_integrals(&geom).unwrap();
        for &(p, q, s, t) in &combos {
            let oracle = integrate_3d(&[0.0, r], 20, |x, y, z| {
                eval_shell(&basis[p], x, y, z)
                    * eval_shell(&basis[q], x, y, z)
                    * product_potential(&basis[s], &basis[t], x, y, z)
            });
            assert!(
                (ao.eri.get(p, q, s, t) - oracle).abs() < 1e-6,
                "({p}{q}|{s}{t}) at R={r}: analytic {} oracle {}",
                ao.eri.get(p, q, s, t),
                oracle
            );
        }
    }
}

/// Direct 6-D Monte Carlo: (00|11) = E[1/|x−y|] with x drawn from χ₀² and
/// y from χ₁² (both are unit-weight Gaussian mixtures because the shells
/// are normalized). Verifies the potential-based oracle independently.
#[test]
fn electron_repulsion_matches_monte_carlo() {
    let r = 1.4632;
    let geom = MoleculeGeometry::heh_plus(r).unwrap();
    let basis = build_sto3g_basis(&geom).unwrap();
    let ao = ao_integrals(&geom).unwrap();

    // mixture components of χ²: weights c_i c_j (π/(a_i+a_j))^(3/2),
    // isotropic normal with variance 1/(2(a_i+a_j))
    let mixture = |shell: &GaussianShell| -> Vec<(f64, f64)> {
        let mut comps = Vec::new();
        for (&a, &ca) in shell.exponents.iter().zip(&shell.coefficients) {
            for (&b, &cb) in shell.exponents.iter().zip(&shell.coefficients) {
                let p = a + b;
                comps.push((ca * cb * (std::f64::consts::PI / p).powf(1.5), p));
            }
        }
        comps
    };
    let m0 = mixture(&basis[0]);
    let m1 = mixture(&basis[1]);
    let total0: f64 = m0.iter().map(|(w, _)| w).sum();
    let total1: f64 = m1.iter().map(|(w, _)| w).sum();
    assert!((total0 - 1.0).abs() < 1e-10, "χ₀² is a probability density");
    assert!((total1 - 1.0).abs() < 1e-10);

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draw = |comps: &[(f64, f64)], center_z: f64, rng: &mut ChaCha8Rng| -> [f64; 3] {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut p = comps[comps.len() - 1].1;
        for &(w, pp) in comps {
            acc += w;
            if u < acc {
                p = pp;
                break;
            }
        }
        let sigma = (0.5 / p).sqrt();
        let n: f64 = StandardNormal.sample(rng);
        let n2: f64 = StandardNormal.sample(rng);
        let n3: f64 = StandardNormal.sample(rng);
        [sigma * n, sigma * n2, center_z + sigma * n3]
    };

    let samples = 4_000_000usize;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..samples {
        let x = draw(&m0, 0.0, &mut rng);
        let y = draw(&m1, r, &mut rng);
        let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
        let v = 1.0 / d;
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / samples as f64;
    let var = (sumsq / samples as f64 - mean * mean) / samples as f64;
    let stderr = var.sqrt();
    let analytic = ao.eri.get(0, 0, 1, 1);
    assert!(
        (analytic - mean).abs() < 5.0 * stderr,
        "(00|11) analytic {} MC {} ± {}",
        analytic,
        mean,
        stderr
    );
}
