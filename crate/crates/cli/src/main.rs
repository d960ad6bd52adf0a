//! Command-line orchestration: refine orbits, run validations, post-process
//! validated data, check symmetry machinery, and suggest parameters.
//!
//! Exit codes: 0 success / validated, 1 radii-polynomial inequalities failed
//! (report still emitted), 2 input or configuration error, 3 numerical
//! failure. Runs are deterministic given config, inputs and thread count;
//! per-column results are reduced in fixed index order, so thread count
//! does not change the output bits.

mod config;

use anyhow::Context;
use clap::{Parser, Subcommand};
use config::RunConfig;
use nsorbit::error::Error as NsError;
use nsorbit::postprocess::{
    c0_error_statement, grid_snapshot, pressure_with_error, snapshot_to_csv, symmetry_deviation,
    velocity_with_error, ValidatedOrbit,
};
use nsorbit::solver::{newton_refine, GalerkinProblem, PhaseMode};
use nsorbit::spectral::{norm_field, ModeKey, SpectralField, WeightedNorm};
use nsorbit::symmetry::{lift_sigma, orbit_data, project_pi, OrbitCatalog};
use nsorbit::validator::{suggest_parameters, validate};
use nsorbit::vfld::{
    read_field_file, read_report, report_interval, write_field_file, write_report, FieldFile,
};
use nsorbit::vorticity::taylor_green_velocity_forcing;
use num_complex::Complex64 as C64;
use rigor::RigorousReal;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nsorbit", about = "Validated time-periodic Navier-Stokes orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Newton-refine an orbit on the reduced Galerkin system
    Refine {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// phase closure: "previous", "pinned:<omega>", or "reference:<path>"
        #[arg(long, default_value = "previous")]
        phase: String,
        /// viscosity continuation step applied before refinement
        #[arg(long, default_value_t = 0.0)]
        dnu: f64,
    },
    /// Run the a-posteriori validation and emit a bounds report
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Recover velocity/pressure with error bounds and export snapshots
    Postprocess {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        outdir: PathBuf,
        /// normalize snapshots by the viscous-equilibrium amplitude
        #[arg(long, default_value_t = false)]
        normalize_equilibrium: bool,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
    },
    /// Verify the group machinery over the configured box
    SymmetryCheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// Non-binding truncation-parameter suggestion from a refined orbit
    SuggestParameters {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify_error(&e))
        }
    }
}

/// 2 for configuration/input problems, 3 for numerical failures.
fn classify_error(e: &anyhow::Error) -> u8 {
    if let Some(ns) = e.downcast_ref::<NsError>() {
        match ns {
            NsError::NoConvergence(_)
            | NsError::SingularJacobian
            | NsError::SingularFiniteBlock
            | NsError::Rigor(_) => 3,
            _ => 2,
        }
    } else {
        2
    }
}

fn init_threads(threads: usize) {
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn covered_catalog(cfg: &RunConfig) -> anyhow::Result<OrbitCatalog> {
    let mut catalog = OrbitCatalog::new(cfg.group()?);
    let mut cover = vec![];
    for n in cfg.support.sum(&cfg.support).iter_nonzero() {
        for c in 0..3 {
            cover.push(ModeKey::new(n, c));
        }
    }
    catalog.ensure_modes(cover);
    Ok(catalog)
}

fn load_input(cfg: &RunConfig, path: &PathBuf) -> anyhow::Result<FieldFile> {
    let file = read_field_file(path).with_context(|| format!("input {}", path.display()))?;
    if !file.field.within_box(&cfg.support) {
        anyhow::bail!(NsError::SchemeInvalid(format!(
            "input field support exceeds the configured box {:?}",
            cfg.support
        )));
    }
    Ok(file)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Refine {
            config,
            input,
            output,
            phase,
            dnu,
        } => {
            let cfg = RunConfig::load(&config)?;
            init_threads(cfg.threads);
            let file = load_input(&cfg, &input)?;
            let mut catalog = covered_catalog(&cfg)?;
            let phi0 = project_pi(C64::new(file.omega, 0.0), &file.field.midpoint(), &catalog)?;
            let phase_mode = parse_phase(&phase, &catalog)?;
            let mut problem = GalerkinProblem {
                scheme: cfg.scheme(),
                forcing: cfg.forcing_f64()?,
                phase: phase_mode,
            };
            problem.scheme.nu += dnu;
            if !(problem.scheme.nu > 0.0) {
                anyhow::bail!(NsError::SchemeInvalid(
                    "continuation made nu nonpositive".into()
                ));
            }
            let (refined, telemetry) = newton_refine(&phi0, &problem, &mut catalog)?;
            // convergence log: one JSON object per iteration
            for (i, r) in telemetry.residuals.iter().enumerate() {
                println!(r#"{{"iteration":{i},"residual":{r:e}}}"#);
            }
            println!(
                r#"{{"converged":{},"iterations":{},"omega":{:.16e},"nu":{:.16e}}}"#,
                telemetry.converged, telemetry.iterations, refined.omega.re, problem.scheme.nu
            );
            let lifted = lift_sigma(&refined, &catalog)?;
            let out = FieldFile {
                eta: cfg.eta,
                nu: problem.scheme.nu,
                omega: refined.omega.re,
                support: cfg.support,
                provenance: Some("refined".into()),
                field: lifted.to_rigorous(),
            };
            write_field_file(&output, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate {
            config,
            input,
            report,
        } => {
            let cfg = RunConfig::load(&config)?;
            init_threads(cfg.threads);
            let file = load_input(&cfg, &input)?;
            let mut catalog = covered_catalog(&cfg)?;
            let phi = project_pi(
                rigor::RigorousComplex::point(file.omega, 0.0),
                &file.field,
                &catalog,
            )?;
            let bounds = validate(&phi, &cfg.scheme(), &mut catalog, &cfg.forcing_rigorous()?)?;
            write_report(&report, &bounds)?;
            println!(
                r#"{{"success":{},"y0":{:e},"z0":{:e},"z1":{:e},"z2":{:e}}}"#,
                bounds.success,
                bounds.y0.hi(),
                bounds.z0.hi(),
                bounds.z1().hi(),
                bounds.z2.hi()
            );
            if bounds.success {
                Ok(ExitCode::SUCCESS)
            } else {
                if let Some(f) = bounds.failure_attribution() {
                    eprintln!("validation failed: {f}");
                }
                Ok(ExitCode::from(1))
            }
        }
        Command::Postprocess {
            config,
            input,
            report,
            outdir,
            normalize_equilibrium,
            resolution,
        } => {
            let cfg = RunConfig::load(&config)?;
            init_threads(cfg.threads);
            let file = load_input(&cfg, &input)?;
            let parsed = read_report(&report)?;
            if !parsed.success {
                eprintln!("report is not a successful validation; nothing to post-process");
                return Ok(ExitCode::from(1));
            }
            // reconstruct the in-memory report pieces needed downstream
            let rep = nsorbit::validator::BoundsReport {
                scheme: parsed.scheme,
                omega_bar: rigor::f64_from_hex(&parsed.omega_bar_hex)
                    .ok_or_else(|| NsError::Format("bad omega in report".into()))?,
                y0: report_interval(&parsed.y0)?,
                z0: report_interval(&parsed.z0)?,
                z1_finite: report_interval(&parsed.z1_finite)?,
                z1_tail: report_interval(&parsed.z1_tail)?,
                z2: report_interval(&parsed.z2)?,
                success: parsed.success,
                rmin: parsed
                    .rmin
                    .as_ref()
                    .map(report_interval)
                    .transpose()?,
                rmax: parsed
                    .rmax
                    .as_ref()
                    .map(report_interval)
                    .transpose()?,
                contraction_margin: parsed.contraction_margin,
                discriminant_margin: parsed.discriminant_margin,
                block_dim: parsed.block_dim,
                e_dagger_modes: parsed.e_dagger_modes,
                z1_columns: parsed.z1_columns,
                timing_ms: vec![],
            };
            let catalog = covered_catalog(&cfg)?;
            let phi = project_pi(
                rigor::RigorousComplex::point(file.omega, 0.0),
                &file.field,
                &catalog,
            )?;
            // symmetrize as the validator did, so the center matches
            let phi0 = nsorbit::symmetry::symmetrize_input(&phi, &catalog)?;
            let orbit = ValidatedOrbit::new(phi0, rep)?;
            std::fs::create_dir_all(&outdir)?;

            let (u, uerr) = velocity_with_error(&orbit, &catalog)?;
            write_field_file(
                &outdir.join("velocity.json"),
                &FieldFile {
                    eta: cfg.eta,
                    nu: cfg.nu,
                    omega: file.omega,
                    support: cfg.support,
                    provenance: Some("velocity".into()),
                    field: u,
                },
            )?;
            let fv = taylor_green_velocity_forcing();
            let (p, perr) = pressure_with_error(&orbit, &fv, &catalog)?;
            let mut pfield = SpectralField::new();
            for (n, v) in &p {
                pfield.set(ModeKey::new(*n, 0), *v);
            }
            write_field_file(
                &outdir.join("pressure.json"),
                &FieldFile {
                    eta: cfg.eta,
                    nu: cfg.nu,
                    omega: file.omega,
                    support: cfg.support.sum(&cfg.support),
                    provenance: Some("pressure".into()),
                    field: pfield,
                },
            )?;
            let c0 = c0_error_statement(&orbit, &fv, &catalog)?;
            std::fs::write(
                outdir.join("c0_errors.json"),
                serde_json::to_string_pretty(&c0)?,
            )?;

            // four snapshots a quarter of the period apart
            let lifted = lift_sigma(&orbit.phi_bar, &catalog)?.midpoint();
            let period = 2.0 * std::f64::consts::PI / file.omega;
            let times: Vec<f64> = (0..4).map(|k| k as f64 * period / 4.0).collect();
            let normalization = if normalize_equilibrium {
                2.0 / cfg.nu
            } else {
                1.0
            };
            for (k, snap) in
                grid_snapshot(&lifted, 2, file.omega, &times, resolution, normalization)
                    .iter()
                    .enumerate()
            {
                std::fs::write(
                    outdir.join(format!("vorticity_t{k}.csv")),
                    snapshot_to_csv(snap),
                )?;
            }
            let deviation = symmetry_deviation(
                &nsorbit::spectral::biot_savart(&lifted),
                file.omega,
                &times,
                32,
            );
            println!(
                r#"{{"velocity_error":{:e},"pressure_error":{:e},"symmetry_deviation":{:.6e}}}"#,
                uerr.hi(),
                perr.hi(),
                deviation
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::SymmetryCheck { config } => {
            let cfg = RunConfig::load(&config)?;
            init_threads(cfg.threads);
            let group = cfg.group()?;
            println!("group order: {}", group.order());
            let mut histogram: std::collections::BTreeMap<u32, usize> = Default::default();
            let mut trivial = 0usize;
            let mut total = 0usize;
            for n in cfg.support.iter_nonzero() {
                for c in 0..3 {
                    let j = ModeKey::new(n, c);
                    let d = orbit_data(&group, &j);
                    if d.rep == j {
                        *histogram.entry(d.orbit_size).or_insert(0) += 1;
                    }
                    if !d.symmetric {
                        trivial += 1;
                    }
                    total += 1;
                    for a in 0..group.order() {
                        for b in 0..group.order() {
                            let ab = group.element(a).compose(group.element(b));
                            if ab.beta(&j) != group.element(a).beta(&group.element(b).beta(&j)) {
                                anyhow::bail!(NsError::Format(format!(
                                    "action law violated at {j}"
                                )));
                            }
                            let lhs = ab.alpha_turn(&j);
                            let rhs = group
                                .element(a)
                                .alpha_turn(&group.element(b).beta(&j))
                                .add(&group.element(b).alpha_turn(&j))
                                .mod1();
                            if lhs != rhs {
                                anyhow::bail!(NsError::Format(format!("cocycle violated at {j}")));
                            }
                        }
                    }
                }
            }
            println!("orbit-size histogram (size -> orbits): {histogram:?}");
            println!(
                "trivial fraction over the box: {}/{} = {:.4}",
                trivial,
                total,
                trivial as f64 / total.max(1) as f64
            );
            println!("action laws verified over the box");
            Ok(ExitCode::SUCCESS)
        }
        Command::SuggestParameters { config, input } => {
            let cfg = RunConfig::load(&config)?;
            init_threads(cfg.threads);
            let file = load_input(&cfg, &input)?;
            let mut catalog = covered_catalog(&cfg)?;
            catalog.ensure_modes(file.field.iter().map(|(j, _)| j).collect::<Vec<_>>());
            let phi = project_pi(
                rigor::RigorousComplex::point(file.omega, 0.0),
                &file.field,
                &catalog,
            )?;
            let lifted = lift_sigma(&phi, &catalog)?;
            let state = nsorbit::vorticity::State::new(
                rigor::RigorousComplex::point(file.omega, 0.0),
                lifted.clone(),
            )?;
            let phase = nsorbit::vorticity::PhaseReference::new(lifted.clone());
            let (_, resid) =
                nsorbit::vorticity::residual_f(&state, cfg.nu, &cfg.forcing_rigorous()?, &phase)?;
            let rnorm = norm_field(&resid, &WeightedNorm::plain(RigorousReal::point(cfg.eta)));
            let snorm = norm_field(&lifted, &WeightedNorm::plain(RigorousReal::point(cfg.eta)));
            let s = suggest_parameters(rnorm.hi(), file.omega, &cfg.scheme(), snorm.hi());
            println!(
                r#"{{"predicted_2y0z2":{:e},"target":{:e},"suggested_ntilde":{},"suggested_ndagger":{},"note":"{}"}}"#,
                s.predicted_product,
                s.target_product,
                s.suggested_ntilde,
                s.suggested_ndagger,
                s.note
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_phase(spec: &str, catalog: &OrbitCatalog) -> anyhow::Result<PhaseMode> {
    if spec == "previous" {
        return Ok(PhaseMode::PreviousIterate);
    }
    if let Some(v) = spec.strip_prefix("pinned:") {
        let omega: f64 = v.parse().context("pinned phase frequency")?;
        return Ok(PhaseMode::PinnedOmega(omega));
    }
    if let Some(path) = spec.strip_prefix("reference:") {
        let file = read_field_file(std::path::Path::new(path))?;
        let phi = project_pi(C64::new(file.omega, 0.0), &file.field.midpoint(), catalog)?;
        return Ok(PhaseMode::Reference(phi));
    }
    anyhow::bail!(NsError::Format(format!("unknown phase mode '{spec}'")))
}
