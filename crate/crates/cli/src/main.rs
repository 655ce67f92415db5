//! `nvzero`: regenerate the figure tables and numeric anchors of the NV⁰
//! model from the command line.
//!
//! Data goes to files in `--out`; every command also writes a
//! `<command>.manifest.json` that `nvzero replay` can re-run.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use nvzero::decoherence::{
    kappa, lifetime_bound, monte_carlo_splitting_spread, strain_broadening, strained_noise_spread, LifetimeReference, Regime,
    StrainSampling,
};
use nvzero::figures::{fig2, fig3, standard_cases, Table};
use nvzero::hamiltonian::FieldRange;
use nvzero::memory::{coupling_strength, r_times_delta_to_si, zpl_wavelength, Geometry, MemoryConfig};
use nvzero::model::{DjtParams, PhysicalConstants};
use nvzero::spectro::{
    fit_double_sweep, fit_single, read_spectrum_csv, synthesize, upsilon_bound, GaussianMixture, NoiseModel, Response, Spectrum,
    UniformGrid,
};

#[derive(Debug, Parser)]
#[command(name = "nvzero", version, about = "NV⁰ level structure, Raman coupling and decoherence tables", args_override_self = true)]
struct Cli {
    /// TOML file overriding physical constants.
    #[arg(long, global = true, env = "NVZERO_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of field samples in figure sweeps.
    #[arg(long, global = true, default_value_t = 401)]
    points: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Level, polarization, Raman and noise tables for a [111] NV, field along x̂.
    Fig2(SweepArgs),
    /// The same tables for all four orientations, field along [100].
    Fig3(SweepArgs),
    /// Strain broadening, strained noise factor and lifetime bounds.
    Decoherence(DecoherenceArgs),
    /// Raman memory coupling strength.
    Memory(MemoryArgs),
    /// Synthesize, fit and sweep zero-phonon-line spectra.
    #[command(subcommand)]
    Spectro(SpectroCommand),
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
struct SweepArgs {
    /// First field value (V/µm).
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    /// Last field value (V/µm).
    #[arg(long, default_value_t = 10.0)]
    stop: f64,
    /// Υ of the DJT cases (GHz).
    #[arg(long, default_value_t = 12.0)]
    upsilon: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
struct DecoherenceArgs {
    /// Ground splitting (GHz).
    #[arg(long, default_value_t = 50.0)]
    splitting: f64,
    /// Optical inhomogeneous width δε (GHz).
    #[arg(long, default_value_t = 16.0)]
    delta_eps: f64,
    #[arg(long, default_value_t = 12.0)]
    upsilon: f64,
    /// DJT angle (degrees).
    #[arg(long, default_value_t = 90.0)]
    alpha: f64,
    /// Temperatures for the lifetime bound (K).
    #[arg(long, value_delimiter = ',', default_values_t = vec![4.2, 1.0])]
    temperatures: Vec<f64>,
    /// Monte-Carlo strain samples; 0 skips the cross-check.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1.3)]
    tau_ref_us: f64,
    #[arg(long, default_value_t = 3.9)]
    s_ref: f64,
    #[arg(long, default_value_t = 5.8)]
    t_ref: f64,
    #[arg(long, default_value_t = 0.5)]
    chi_ratio: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
struct MemoryArgs {
    /// Control pulse energy (J).
    #[arg(long, default_value_t = 10e-9)]
    pulse_energy: f64,
    /// NV density (m⁻³).
    #[arg(long, default_value_t = 1e22)]
    nv_density: f64,
    /// Detuning (Hz).
    #[arg(long, default_value_t = 100e9)]
    detuning: f64,
    /// R·Δ in GHz²·µm²/V²; defaults to 18/√3, the (001)-geometry asymptote.
    #[arg(long)]
    r_times_delta: Option<f64>,
    /// Control wavelength (m) for bulk; defaults to the zero-phonon line.
    #[arg(long)]
    wavelength: Option<f64>,
    /// Waveguide width (m). Together with --waveguide-length selects the waveguide geometry.
    #[arg(long, requires = "waveguide_length")]
    waveguide_width: Option<f64>,
    /// Waveguide length (m).
    #[arg(long, requires = "waveguide_width")]
    waveguide_length: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum NoiseKind {
    None,
    Gaussian,
    Poisson,
}

#[derive(Debug, Subcommand)]
enum SpectroCommand {
    /// Write a synthetic spectrum CSV.
    Synth(SynthArgs),
    /// Fit one Gaussian convolved with the response.
    Fit(FitArgs),
    /// Sweep the doublet splitting and report the residual-doubling bound.
    Sweep(SweepFitArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
struct SynthArgs {
    #[arg(long, default_value_t = 1000.0)]
    amplitude: f64,
    /// Line width σ (GHz).
    #[arg(long, default_value_t = 16.0)]
    sigma: f64,
    /// Doublet splitting of the truth (GHz); 0 gives a single line.
    #[arg(long, default_value_t = 0.0)]
    splitting: f64,
    #[arg(long, default_value_t = 20.0)]
    baseline: f64,
    #[arg(long, default_value_t = 24.5)]
    response_fwhm: f64,
    /// Half width of the frequency grid (GHz).
    #[arg(long, default_value_t = 150.0)]
    half_range: f64,
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    #[arg(long, value_enum, default_value_t = NoiseKind::Gaussian)]
    noise: NoiseKind,
    /// Standard deviation for gaussian noise, peak SNR for poisson noise.
    #[arg(long, default_value_t = 15.0)]
    noise_level: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
struct FitArgs {
    /// Spectrum CSV: frequency_GHz, counts[, response].
    input: PathBuf,
    /// Gaussian response FWHM used when the file has no response column.
    #[arg(long, default_value_t = 24.5)]
    response_fwhm: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SweepFitArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 24.5)]
    response_fwhm: f64,
    /// Largest splitting in the sweep (GHz).
    #[arg(long, default_value_t = 40.0)]
    max_splitting: f64,
    #[arg(long, default_value_t = 0.5)]
    splitting_step: f64,
}

/// Everything needed to reproduce one run.
#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    command: String,
    argv: Vec<String>,
    constants: PhysicalConstants,
    flags: Value,
    outputs: Vec<String>,
    version: String,
    timestamp: String,
}

struct RunContext {
    out: PathBuf,
    seed: u64,
    points: usize,
    consts: PhysicalConstants,
    argv: Vec<String>,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    match run(cli, argv[1..].to_vec(), None) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_constants(path: Option<&Path>) -> Result<PhysicalConstants> {
    let base = PhysicalConstants::default();
    match path {
        None => Ok(base),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            Ok(base.with_overrides(&text)?)
        }
    }
}

fn run(cli: Cli, argv: Vec<String>, consts: Option<PhysicalConstants>) -> Result<()> {
    let consts = match consts {
        Some(c) => c,
        None => load_constants(cli.config.as_deref())?,
    };
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest, &cli);
    }
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let ctx = RunContext { out: cli.out.clone(), seed: cli.seed, points: cli.points, consts, argv };
    match &cli.command {
        Command::Fig2(a) => cmd_fig2(&ctx, a),
        Command::Fig3(a) => cmd_fig3(&ctx, a),
        Command::Decoherence(a) => cmd_decoherence(&ctx, a),
        Command::Memory(a) => cmd_memory(&ctx, a),
        Command::Spectro(SpectroCommand::Synth(a)) => cmd_synth(&ctx, a),
        Command::Spectro(SpectroCommand::Fit(a)) => cmd_fit(&ctx, a),
        Command::Spectro(SpectroCommand::Sweep(a)) => cmd_sweep(&ctx, a),
        Command::Replay { .. } => unreachable!(),
    }
}

/// Re-parse the recorded argv with the recorded constants. A `--out` given
/// on the replay command line wins over the recorded one.
fn replay(manifest: &Path, cli: &Cli) -> Result<()> {
    let text = fs::read_to_string(manifest).with_context(|| format!("reading {}", manifest.display()))?;
    let m: RunManifest = serde_json::from_str(&text).context("parsing manifest")?;
    let mut argv = vec!["nvzero".to_string()];
    argv.extend(m.argv.iter().cloned());
    argv.push("--out".into());
    argv.push(cli.out.display().to_string());
    let inner = Cli::try_parse_from(&argv).context("manifest argv no longer parses")?;
    if matches!(inner.command, Command::Replay { .. }) {
        bail!("a manifest cannot replay another replay");
    }
    run(inner, argv[1..].to_vec(), Some(m.constants))
}

fn write(ctx: &RunContext, name: &str, contents: &str, outputs: &mut Vec<String>) -> Result<()> {
    let path = ctx.out.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    outputs.push(name.to_string());
    Ok(())
}

fn write_manifest(ctx: &RunContext, command: &str, flags: Value, outputs: Vec<String>) -> Result<()> {
    let m = RunManifest {
        command: command.to_string(),
        argv: ctx.argv.clone(),
        constants: ctx.consts,
        flags: json!({ "args": flags, "seed": ctx.seed, "points": ctx.points, "out": ctx.out.display().to_string() }),
        outputs,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
    };
    let name = format!("{command}.manifest.json");
    fs::write(ctx.out.join(&name), serde_json::to_string_pretty(&m)? + "\n").with_context(|| format!("writing {name}"))?;
    Ok(())
}

fn field_range(ctx: &RunContext, a: &SweepArgs) -> Result<FieldRange> {
    if !(a.start >= 0.0 && a.stop > a.start) {
        bail!("field range needs 0 <= start < stop, got {}..{}", a.start, a.stop);
    }
    Ok(FieldRange::new(a.start, a.stop, ctx.points)?)
}

fn emit_tables(ctx: &RunContext, command: &str, args: &impl Serialize, tables: &[(&str, &Table)]) -> Result<()> {
    let mut outputs = Vec::new();
    for (name, t) in tables {
        write(ctx, &format!("{name}.csv"), &t.to_csv(), &mut outputs)?;
    }
    write_manifest(ctx, command, serde_json::to_value(args)?, outputs)
}

fn cmd_fig2(ctx: &RunContext, a: &SweepArgs) -> Result<()> {
    let f = fig2(&field_range(ctx, a)?, &standard_cases(a.upsilon)?, &ctx.consts)?;
    emit_tables(ctx, "fig2", a, &[("fig2a", &f.a), ("fig2b", &f.b), ("fig2c", &f.c), ("fig2d", &f.d)])
}

fn cmd_fig3(ctx: &RunContext, a: &SweepArgs) -> Result<()> {
    let f = fig3(&field_range(ctx, a)?, &standard_cases(a.upsilon)?, &ctx.consts)?;
    emit_tables(ctx, "fig3", a, &[("fig3b", &f.b), ("fig3c", &f.c), ("fig3d", &f.d), ("fig3e", &f.e)])
}

fn cmd_decoherence(ctx: &RunContext, a: &DecoherenceArgs) -> Result<()> {
    let c = &ctx.consts;
    let djt = DjtParams::new(a.upsilon, a.alpha)?;
    let general = strain_broadening(a.delta_eps, &djt, c, Regime::General)?;
    let large = strain_broadening(a.delta_eps, &djt, c, Regime::LargeDjt)?;
    let noise = strained_noise_spread(a.splitting, large.delta_s, &djt, c)?;
    let reference = LifetimeReference { tau_ref: a.tau_ref_us, s_ref: a.s_ref, t_ref: a.t_ref, chi_ratio: a.chi_ratio };
    let lifetimes = a
        .temperatures
        .iter()
        .map(|&t| lifetime_bound(a.splitting, t, &reference, c))
        .collect::<nvzero::Result<Vec<_>>>()?;
    let monte_carlo = if a.samples > 0 {
        let delta_e = nvzero::decoherence::strain_from_transition_spread(a.delta_eps, &djt, c);
        Some(monte_carlo_splitting_spread(delta_e, a.splitting, &djt, c, a.samples, ctx.seed, StrainSampling::IsotropicModes)?)
    } else {
        None
    };
    let record = json!({
        "inputs": a,
        "constants": c,
        "kappa": kappa(c)?,
        "broadening": { "general": general, "large_djt": large },
        "strained_noise": { "p": noise.p, "delta_p": noise.delta_p, "p_plus_delta_p": noise.p + noise.delta_p, "delta_s": large.delta_s },
        "lifetimes": lifetimes,
        "monte_carlo": monte_carlo,
    });
    let mut outputs = Vec::new();
    write(ctx, "decoherence.json", &(serde_json::to_string_pretty(&record)? + "\n"), &mut outputs)?;
    write_manifest(ctx, "decoherence", serde_json::to_value(a)?, outputs)
}

fn cmd_memory(ctx: &RunContext, a: &MemoryArgs) -> Result<()> {
    let rd_native = a.r_times_delta.unwrap_or(18.0 / 3f64.sqrt());
    let zpl = zpl_wavelength(&ctx.consts);
    let reference = a.wavelength.unwrap_or(zpl);
    let geometry = match (a.waveguide_width, a.waveguide_length) {
        (Some(width), Some(length)) => Geometry::Waveguide { width, length },
        _ => Geometry::Bulk { wavelength: reference },
    };
    let cfg = MemoryConfig {
        pulse_energy: a.pulse_energy,
        nv_density: a.nv_density,
        detuning: a.detuning,
        r_times_delta: r_times_delta_to_si(rd_native),
        geometry,
    };
    let strength = coupling_strength(&cfg, reference)?;
    let record = json!({
        "r": strength.r,
        "effective_length_m": strength.effective_length,
        "waveguide_enhanced": strength.waveguide_enhanced,
        "inputs_si": cfg,
        "r_times_delta_GHz2_um2_per_V2": rd_native,
        "reference_wavelength_m": reference,
    });
    let mut outputs = Vec::new();
    write(ctx, "memory.json", &(serde_json::to_string_pretty(&record)? + "\n"), &mut outputs)?;
    write_manifest(ctx, "memory", serde_json::to_value(a)?, outputs)
}

fn spectrum_csv(s: &Spectrum) -> String {
    use nvzero::figures::format_number as n;
    let mut out = String::from("frequency_GHz,counts\n");
    for (f, c) in s.freqs.iter().zip(&s.counts) {
        out.push_str(&format!("{},{}\n", n(*f), n(*c)));
    }
    out
}

fn cmd_synth(ctx: &RunContext, a: &SynthArgs) -> Result<()> {
    let truth = if a.splitting == 0.0 {
        GaussianMixture::single(a.amplitude, 0.0, a.sigma, a.baseline)
    } else {
        GaussianMixture::doublet(a.amplitude, 0.0, a.sigma, a.splitting, a.baseline)
    };
    let noise = match a.noise {
        NoiseKind::None => NoiseModel::None,
        NoiseKind::Gaussian => NoiseModel::Gaussian { std: a.noise_level },
        NoiseKind::Poisson => NoiseModel::PoissonLike { peak_snr: a.noise_level },
    };
    let grid = UniformGrid::new(-a.half_range, a.half_range, a.step)?;
    let s = synthesize(&truth, &Response::Gaussian { fwhm: a.response_fwhm }, &grid, noise, ctx.seed)?;
    let mut outputs = Vec::new();
    write(ctx, "spectrum.csv", &spectrum_csv(&s), &mut outputs)?;
    write_manifest(ctx, "spectro-synth", serde_json::to_value(a)?, outputs)
}

fn load_spectrum(path: &Path, fwhm: f64) -> Result<Spectrum> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_spectrum_csv(f, Response::Gaussian { fwhm })?)
}

fn cmd_fit(ctx: &RunContext, a: &FitArgs) -> Result<()> {
    let s = load_spectrum(&a.input, a.response_fwhm)?;
    let fit = fit_single(&s)?;
    if !fit.converged {
        eprintln!("warning: fit did not converge after {} iterations", fit.iterations);
    }
    let mut outputs = Vec::new();
    write(ctx, "fit.json", &(serde_json::to_string_pretty(&fit)? + "\n"), &mut outputs)?;
    write_manifest(ctx, "spectro-fit", serde_json::to_value(a)?, outputs)
}

fn cmd_sweep(ctx: &RunContext, a: &SweepFitArgs) -> Result<()> {
    if !(a.splitting_step > 0.0 && a.max_splitting > 0.0) {
        bail!("sweep needs positive --max-splitting and --splitting-step");
    }
    let s = load_spectrum(&a.input, a.response_fwhm)?;
    let n = (a.max_splitting / a.splitting_step + 1e-9).floor() as usize;
    let splittings: Vec<f64> = (0..=n).map(|i| i as f64 * a.splitting_step).collect();
    let sweep = fit_double_sweep(&s, &splittings)?;
    let mut table = String::from("splitting_GHz,relative_ssr,fitted_sigma_GHz\n");
    for (p, rel) in sweep.points.iter().zip(sweep.relative_ssr()) {
        use nvzero::figures::format_number as f;
        table.push_str(&format!("{},{},{}\n", f(p.splitting), f(rel), f(p.fit.params.sigma)));
    }
    let bound = sweep.bound.map(|b| upsilon_bound(b, &ctx.consts));
    let summary = json!({
        "single": sweep.single,
        "min_ssr": sweep.min_ssr,
        "best_splitting_GHz": sweep.best_splitting,
        "resolved": sweep.resolved,
        "bound_GHz": sweep.bound,
        "upsilon": bound,
    });
    let mut outputs = Vec::new();
    write(ctx, "sweep.csv", &table, &mut outputs)?;
    write(ctx, "sweep.json", &(serde_json::to_string_pretty(&summary)? + "\n"), &mut outputs)?;
    write_manifest(ctx, "spectro-sweep", serde_json::to_value(a)?, outputs)
}
