//! `hehvqe` — scan driver CLI.
//!
//! Subcommands: `surface` (dissociation curve), `vqe` (single-point
//! optimization trace), `field` (static-field softening with perturbative
//! comparison curves), `excited` (folded-spectrum λ scan), `integrals`
//! (debug dump of the h tensors and Pauli terms).
//!
//! Flags override config-file values override built-in defaults. Output is
//! CSV (12 significant digits, LF, locale-independent) or JSON carrying the
//! same records plus the resolved configuration for provenance.

mod output;
mod resolve;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use heh_vqe::hamiltonian::{jw_transform, measurement_terms, slater_condon_hamiltonian};
use heh_vqe::measurement::ShotPlan;
use heh_vqe::vqe::{
    dissociation_scan, field_scan, folded_scan, vqe_ground, FoldedScanConfig, PrepMode,
    ScanConfig, VqeOptions,
};
use heh_vqe::System;

use output::{fmt_sig, OutputSink};
use resolve::{ConfigFile, Convention, RunConfig};

#[derive(Parser)]
#[command(name = "hehvqe", version, about = "UCC-VQE simulator for HeH+", disable_help_subcommand = true)]
struct Cli {
    /// JSON file with default values for any flag (flags still win)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground-state energy over a bond-length grid (dissociation curve)
    Surface(SurfaceArgs),
    /// Single-point optimization with the per-iteration trace
    Vqe(VqeArgs),
    /// Ground-state energy under a static axial electric field
    Field(FieldArgs),
    /// Excited-state extraction by scanning λ in ⟨(H−λ)²⟩
    Excited(ExcitedArgs),
    /// Dump h1/h2 tensors and the Jordan-Wigner Pauli terms as JSON
    Integrals(IntegralsArgs),
}

#[derive(Args)]
pub(crate) struct CommonArgs {
    /// Parameter count: 2 (t1 = t11 = t12, t2 real) or 6 (complex amplitudes)
    #[arg(long)]
    params: Option<u32>,
    /// Trotter steps for state preparation
    #[arg(long)]
    trotter: Option<u32>,
    /// Measurement mode: exact | shots
    #[arg(long)]
    mode: Option<String>,
    /// Shots per measurement setting (shot mode)
    #[arg(long)]
    shots: Option<u64>,
    /// Base RNG seed; required in shot mode
    #[arg(long)]
    seed: Option<u64>,
    /// Energy convention: total | electronic
    #[arg(long)]
    convention: Option<String>,
    /// Output file (stdout when absent)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format: csv | json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct SurfaceArgs {
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    rstep: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VqeArgs {
    /// Bond length in bohr
    #[arg(long)]
    r: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long)]
    r: Option<f64>,
    /// Smallest axial field strength (a.u.)
    #[arg(long, allow_negative_numbers = true)]
    fmin: Option<f64>,
    /// Largest axial field strength (a.u.)
    #[arg(long, allow_negative_numbers = true)]
    fmax: Option<f64>,
    #[arg(long)]
    fstep: Option<f64>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ExcitedArgs {
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lmax: Option<f64>,
    #[arg(long)]
    lstep: Option<f64>,
    /// Random optimizer starts per λ in addition to the reference start
    #[arg(long)]
    starts: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct IntegralsArgs {
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Anything that should abort the run: usage errors exit 1, computational
/// failures exit 2.
pub(crate) enum AppError {
    Usage(String),
    Computation(String),
}

impl From<heh_vqe::Error> for AppError {
    fn from(e: heh_vqe::Error) -> Self {
        AppError::Computation(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let config_file = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };

    match dispatch(cli.command, &config_file) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Computation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command, file: &ConfigFile) -> Result<(), AppError> {
    match command {
        Command::Surface(args) => run_surface(args, file),
        Command::Vqe(args) => run_vqe(args, file),
        Command::Field(args) => run_field(args, file),
        Command::Excited(args) => run_excited(args, file),
        Command::Integrals(args) => run_integrals(args, file),
    }
}

fn scan_config(cfg: &RunConfig) -> ScanConfig {
    ScanConfig {
        mode: cfg.amplitude_mode(),
        trotter: cfg.trotter,
        shots: cfg.effective_shots(),
        seed: cfg.seed.unwrap_or(0),
    }
}

fn grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    let n = ((max - min) / step).round() as usize;
    (0..=n).map(|k| min + step * k as f64).collect()
}

fn run_surface(args: SurfaceArgs, file: &ConfigFile) -> Result<(), AppError> {
    let cfg = RunConfig::resolve("surface", &args.common, file)?;
    let rmin = file.merge_f64("rmin", args.rmin).unwrap_or(0.5);
    let rmax = file.merge_f64("rmax", args.rmax).unwrap_or(4.0);
    let rstep = file.merge_f64("rstep", args.rstep).unwrap_or(0.1);
    if rmin <= 0.0 || rstep <= 0.0 || rmax < rmin {
        return Err(AppError::Usage(format!(
            "invalid grid: rmin={rmin}, rmax={rmax}, rstep={rstep} (need rmin > 0, rstep > 0, rmax ≥ rmin)"
        )));
    }

    let records = dissociation_scan(&grid(rmin, rmax, rstep), &scan_config(&cfg));
    let mut sink = OutputSink::create(&cfg)?;
    sink.csv_header("R,E_vqe,E_exact,iterations,fidelity,stderr");
    for rec in &records {
        let (e_vqe, e_exact) = match cfg.convention {
            Convention::Total => (rec.e_vqe_total, rec.e_exact_total),
            Convention::Electronic => (rec.e_vqe_electronic, rec.e_exact_electronic),
        };
        sink.csv_row(&[
            fmt_sig(rec.r),
            fmt_sig(e_vqe),
            fmt_sig(e_exact),
            rec.iterations.to_string(),
            fmt_sig(rec.fidelity),
            fmt_sig(rec.stderr),
        ]);
    }
    sink.finish_json(&cfg, &records)?;
    Ok(())
}

fn run_vqe(args: VqeArgs, file: &ConfigFile) -> Result<(), AppError> {
    let cfg = RunConfig::resolve("vqe", &args.common, file)?;
    let r = file.merge_f64("r", args.r).unwrap_or(1.7);
    if r <= 0.0 {
        return Err(AppError::Usage(format!("bond length must be positive, got {r}")));
    }

    let sys = System::heh_plus(r)?;
    let h = slater_condon_hamiltonian(&sys.so, false);
    let mut opts = match cfg.effective_shots() {
        None => VqeOptions::exact(cfg.amplitude_mode()),
        Some(shots) => {
            let mut o = VqeOptions::shots(
                cfg.amplitude_mode(),
                ShotPlan::new(shots, cfg.seed.unwrap_or(0)),
            );
            o.physical_terms = Some(measurement_terms(&sys.so, false));
            o
        }
    };
    opts.prep = PrepMode::Trotter(cfg.trotter);
    let result = vqe_ground(&h, &opts)?;

    let shift = match cfg.convention {
        Convention::Total => sys.so.enn,
        Convention::Electronic => 0.0,
    };

    let mut sink = OutputSink::create(&cfg)?;
    sink.csv_header("iteration,energy,accepted,fidelity");
    for it in &result.trace {
        sink.csv_row(&[
            it.index.to_string(),
            fmt_sig(it.energy + shift),
            it.accepted.to_string(),
            fmt_sig(it.fidelity),
        ]);
    }

    #[derive(serde::Serialize)]
    struct VqeReport<'a> {
        r: f64,
        best_energy_electronic: f64,
        best_energy_total: f64,
        stderr: f64,
        fidelity: f64,
        iterations: usize,
        evaluations: usize,
        converged: bool,
        restarts_used: usize,
        amplitudes: Vec<f64>,
        trace: &'a [heh_vqe::vqe::IterationRecord],
    }
    sink.finish_json(
        &cfg,
        &VqeReport {
            r,
            best_energy_electronic: result.energy,
            best_energy_total: result.energy + sys.so.enn,
            stderr: result.stderr,
            fidelity: result.fidelity,
            iterations: result.iterations,
            evaluations: result.evaluations,
            converged: result.converged,
            restarts_used: result.restarts_used,
            amplitudes: result.amplitudes.to_vector(),
            trace: &result.trace,
        },
    )?;
    Ok(())
}

fn run_field(args: FieldArgs, file: &ConfigFile) -> Result<(), AppError> {
    let cfg = RunConfig::resolve("field", &args.common, file)?;
    let r = file.merge_f64("r", args.r).unwrap_or(1.7);
    let fmin = file.merge_f64("fmin", args.fmin).unwrap_or(-0.15);
    let fmax = file.merge_f64("fmax", args.fmax).unwrap_or(0.15);
    let fstep = file.merge_f64("fstep", args.fstep).unwrap_or(0.01);
    if r <= 0.0 || fstep <= 0.0 || fmax < fmin {
        return Err(AppError::Usage(format!(
            "invalid field grid: r={r}, fmin={fmin}, fmax={fmax}, fstep={fstep}"
        )));
    }

    let strengths = grid(fmin, fmax, fstep);
    let records = field_scan(r, &strengths, &scan_config(&cfg))?;
    let enn = 2.0 / r;
    let shift = match cfg.convention {
        Convention::Total => 0.0,
        Convention::Electronic => -enn,
    };
    let mut sink = OutputSink::create(&cfg)?;
    sink.csv_header("strength,E_vqe,E_exact,E_pert1,E_pert2,iterations,fidelity,stderr");
    for rec in &records {
        sink.csv_row(&[
            fmt_sig(rec.strength),
            fmt_sig(rec.e_vqe_total + shift),
            fmt_sig(rec.e_exact_total + shift),
            fmt_sig(rec.e_pert1_total + shift),
            fmt_sig(rec.e_pert2_total + shift),
            rec.iterations.to_string(),
            fmt_sig(rec.fidelity),
            fmt_sig(rec.stderr),
        ]);
    }
    sink.finish_json(&cfg, &records)?;
    Ok(())
}

fn run_excited(args: ExcitedArgs, file: &ConfigFile) -> Result<(), AppError> {
    let cfg = RunConfig::resolve("excited", &args.common, file)?;
    let r = file.merge_f64("r", args.r).unwrap_or(1.7);
    let lmin = file.merge_f64("lmin", args.lmin).unwrap_or(-4.0);
    let lmax = file.merge_f64("lmax", args.lmax).unwrap_or(1.0);
    let lstep = file.merge_f64("lstep", args.lstep).unwrap_or(0.05);
    let starts = file.merge_usize("starts", args.starts).unwrap_or(11);
    if r <= 0.0 || lstep <= 0.0 || lmax < lmin {
        return Err(AppError::Usage(format!(
            "invalid λ grid: r={r}, lmin={lmin}, lmax={lmax}, lstep={lstep}"
        )));
    }

    let sys = System::heh_plus(r)?;
    let include_enn = matches!(cfg.convention, Convention::Total);
    let h = slater_condon_hamiltonian(&sys.so, include_enn);
    let folded_cfg = FoldedScanConfig {
        trotter: cfg.trotter,
        shots: cfg.effective_shots(),
        seed: cfg.seed.unwrap_or(0),
        n_starts: starts,
    };
    let records = folded_scan(&h, &grid(lmin, lmax, lstep), &folded_cfg);

    let mut sink = OutputSink::create(&cfg)?;
    sink.csv_header("lambda,min_value,E_plus,E_minus,iterations,stderr");
    for rec in &records {
        sink.csv_row(&[
            fmt_sig(rec.lambda),
            fmt_sig(rec.min_value),
            fmt_sig(rec.e_plus),
            fmt_sig(rec.e_minus),
            rec.iterations.to_string(),
            fmt_sig(rec.stderr),
        ]);
    }
    sink.finish_json(&cfg, &records)?;
    Ok(())
}

fn run_integrals(args: IntegralsArgs, file: &ConfigFile) -> Result<(), AppError> {
    let r = file.merge_f64("r", args.r).unwrap_or(1.4632);
    if r <= 0.0 {
        return Err(AppError::Usage(format!("bond length must be positive, got {r}")));
    }
    let sys = System::heh_plus(r)?;
    let pauli = jw_transform(&sys.so, false);
    let h2: Vec<Vec<Vec<Vec<f64>>>> = (0..4)
        .map(|p| {
            (0..4)
                .map(|q| (0..4).map(|r_| (0..4).map(|s| sys.so.h2[p][q][r_][s]).collect()).collect())
                .collect()
        })
        .collect();
    let settings = measurement_terms(&sys.so, true);

    // 4×4 matrices are dumped row-major as [re, im] pairs
    let qudit = slater_condon_hamiltonian(&sys.so, false);
    let qudit_rows: Vec<[f64; 2]> = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| [qudit.matrix[(i, j)].re, qudit.matrix[(i, j)].im])
        .collect();

    let dump = serde_json::json!({
        "r": r,
        "index_order": {
            "spin_orbitals": ["1up", "1dn", "2up", "2dn"],
            "h1": "h1[p][q] multiplies a†_p a_q",
            "h2": "h2[p][q][r][s] multiplies a†_p a†_q a_r a_s (1/2 prefactor applied separately)",
            "determinants": ["G=1100", "E11=1001", "E12=0110", "E2=0011"],
        },
        "enn": sys.so.enn,
        "scf": {
            "electronic_energy": sys.rhf.electronic_energy,
            "total_energy": sys.rhf.total_energy,
            "orbital_energies": sys.rhf.orbital_energies,
            "iterations": sys.rhf.iterations,
        },
        "h1": sys.so.h1,
        "h2": h2,
        "qudit_hamiltonian_electronic": qudit_rows,
        "pauli_terms": pauli.terms(),
        "pauli_term_count": pauli.terms().len(),
        "measurement_setting_count": settings.iter().filter(|t| !t.constant).count(),
        "tomography_setting_count": 15,
    });
    let text = serde_json::to_string_pretty(&dump).expect("serializable") + "\n";
    match &args.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| AppError::Computation(format!("cannot write output: {e}")))?,
        None => print!("{text}"),
    }
    Ok(())
}
