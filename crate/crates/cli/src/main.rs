//! `dipole-coupler` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod figures;
mod output;
mod units;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Format, Table};
use crate::units::Detuning;

#[derive(Debug, Parser)]
#[command(
    name = "dipole-coupler",
    version,
    about = "Free-space atom-photon coupling with deep parabolic mirrors"
)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Print JSON instead of CSV.
    #[arg(long, global = true)]
    json: bool,

    /// Output format; overrides the config file.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Seed for stochastic commands.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads for parameter sweeps.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    parallel: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DipoleArg {
    /// Linear dipole, sin² pattern.
    Pi,
    /// Circular dipole, (1 + cos²)/2 pattern.
    Sigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolarizationArg {
    Radial,
    Azimuthal,
    Linear,
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingArg {
    Auto,
    Uniform,
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PulseModel {
    /// e^{Γt/2} cut off at t = 0.
    Ideal,
    /// Rising exponential, τ = 8.1 ns, 5 ns ramp.
    Ybii,
    /// Rising exponential, τ = 230 ns, 5 ns ramp.
    Ybiii,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    #[value(name = "1")]
    F1,
    #[value(name = "2b")]
    F2b,
    #[value(name = "6")]
    F6,
    #[value(name = "7")]
    F7,
    #[value(name = "9")]
    F9,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weighted solid angle of a parabolic mirror or of one or two lenses.
    SolidAngle(SolidAngleArgs),
    /// Overlap of an incident pupil field with the ideal dipole field.
    Overlap(OverlapArgs),
    /// Doughnut waist maximizing the overlap.
    OptimizeWaist(WaistArgs),
    /// Phase of the transmitted light.
    Phase(PhaseArgs),
    /// Resonant transmitted power fraction.
    Transmission(TransmissionArgs),
    /// Temporal overlap of a pulse with the time-reversed emission.
    Temporal(TemporalArgs),
    /// Scattering of a shaped pulse by the atom.
    PulseScatter(PulseScatterArgs),
    /// Pulse absorption in an empty two-mirror resonator.
    Cavity(CavityArgs),
    /// Fit G from a saturation curve.
    SatFit(SatFitArgs),
    /// Overlap measured from a Stokes-parameter map.
    Stokes(StokesArgs),
    /// Regenerate the data behind a figure.
    Fig(FigArgs),
}

#[derive(Debug, Args)]
pub struct SolidAngleArgs {
    /// Mirror depth h/f.
    #[arg(long, conflicts_with = "lens_na")]
    pub hf: Option<f64>,
    /// Numerical aperture of the lens(es).
    #[arg(long)]
    pub lens_na: Option<f64>,
    /// One lens or two opposing lenses.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub lenses: u32,
    #[arg(long, value_enum, default_value_t = DipoleArg::Pi)]
    pub dipole: DipoleArg,
    /// Angle between quantization and optical axis.
    #[arg(long, default_value = "0", value_parser = units::angle)]
    pub tilt: f64,
    /// Half-angle of the hole around the mirror vertex.
    #[arg(long, default_value = "0", value_parser = units::angle)]
    pub hole: f64,
    /// Emit the curve over h/f in [0, 10] for both dipole kinds with lens reference lines.
    #[arg(long, conflicts_with_all = ["hf", "hole"])]
    pub sweep: bool,
}

#[derive(Debug, Args)]
pub struct MirrorArgs {
    /// Mirror depth h/f.
    #[arg(long)]
    pub hf: f64,
    /// Half-angle of the hole around the mirror vertex.
    #[arg(long, default_value = "0", value_parser = units::angle)]
    pub hole: f64,
    /// Radial samples over the pupil.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("field").required(true).args(["w", "profile"])))]
pub struct OverlapArgs {
    #[command(flatten)]
    pub mirror: MirrorArgs,
    /// Doughnut beam radius in units of f.
    #[arg(long)]
    pub w: Option<f64>,
    /// Measured radial amplitude, CSV `r_over_f,value`.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PolarizationArg::Radial)]
    pub polarization: PolarizationArg,
    /// Mirror surface deviation, CSV `r_over_f,value` with values in metres.
    #[arg(long, requires = "wavelength")]
    pub aberration: Option<PathBuf>,
    #[arg(long, value_parser = units::length)]
    pub wavelength: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WaistArgs {
    #[command(flatten)]
    pub mirror: MirrorArgs,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    /// Coupling efficiency.
    #[arg(long = "G")]
    pub g: f64,
    /// Detuning in units of Γ.
    #[arg(long, default_value = "0", value_parser = units::normalized_detuning, allow_hyphen_values = true)]
    pub delta: f64,
    /// Saturation parameter for the scattering ratio.
    #[arg(long, default_value_t = 0.0)]
    pub saturation: f64,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("aperture").required(true).args(["hf", "omega_fraction"])))]
pub struct TransmissionArgs {
    #[arg(long = "G")]
    pub g: f64,
    /// Mirror depth h/f of the shared focusing and collection aperture.
    #[arg(long)]
    pub hf: Option<f64>,
    /// Weighted solid angle as a fraction of 8π/3.
    #[arg(long)]
    pub omega_fraction: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("pulse").required(true).args(["envelope", "histogram", "model"])))]
pub struct TemporalArgs {
    /// Envelope CSV `t_s,amplitude[,amplitude_im]`.
    #[arg(long)]
    pub envelope: Option<PathBuf>,
    /// Arrival-time histogram CSV `t_s,counts`.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<PulseModel>,
    /// Atomic lifetime 1/Γ; defaults to the model's τ.
    #[arg(long, value_parser = units::time)]
    pub gamma_inv: Option<f64>,
    /// Intensity time constant of the model pulse.
    #[arg(long, value_parser = units::time)]
    pub tau: Option<f64>,
    /// Duration of the model's switch-off ramp.
    #[arg(long, value_parser = units::time)]
    pub ramp: Option<f64>,
    /// Resample the model as a Poisson histogram with this many events.
    #[arg(long)]
    pub events: Option<f64>,
    /// Histogram bin width for --events.
    #[arg(long, default_value = "2ns", value_parser = units::time)]
    pub bin: f64,
    /// Background counts per bin subtracted from histograms.
    #[arg(long, default_value_t = 0.0)]
    pub background: f64,
    /// Also maximize over the position of the cut-off.
    #[arg(long)]
    pub align: bool,
    /// Coupling efficiency for the absorption probability.
    #[arg(long = "G")]
    pub g: Option<f64>,
    /// Write the envelope used to this CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("pulse").required(true).args(["envelope", "model"])))]
pub struct PulseScatterArgs {
    #[arg(long)]
    pub envelope: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<PulseModel>,
    #[arg(long = "G")]
    pub g: f64,
    #[arg(long, value_parser = units::time)]
    pub gamma_inv: f64,
    #[arg(long, value_parser = units::time)]
    pub tau: Option<f64>,
    #[arg(long, value_parser = units::time)]
    pub ramp: Option<f64>,
    /// Carrier detuning from the atom (`0.5gamma`, `10MHz`, rad/s).
    #[arg(long, default_value = "0", value_parser = units::detuning, allow_hyphen_values = true)]
    pub carrier: Detuning,
    /// Write the outgoing envelope to this CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CavityArgs {
    /// Cavity JSON `{"R1", "R2", "decay_time_s" | "kappa", "detuning"}`.
    #[arg(long, conflicts_with_all = ["r1", "r2", "decay_time", "kappa"])]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    /// Intensity decay time 1/κ.
    #[arg(long, value_parser = units::time, conflicts_with = "kappa")]
    pub decay_time: Option<f64>,
    /// Energy decay rate κ in 1/s.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Drive detuning from resonance (`2kappa`, `1MHz`, rad/s).
    #[arg(long, value_parser = units::detuning, allow_hyphen_values = true)]
    pub detuning: Option<Detuning>,
    /// Drive envelope CSV; the matched rising exponential when absent.
    #[arg(long)]
    pub envelope: Option<PathBuf>,
    /// Temporal overlap of the rising exponential with the matched one.
    #[arg(long, default_value_t = 1.0, conflicts_with = "envelope")]
    pub eta_t: f64,
    /// Spatial mode-matching factor applied to the stored energy.
    #[arg(long, default_value_t = 1.0)]
    pub eta_spatial: f64,
    /// Write the time trace to this CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["data", "p_at_s1"])))]
pub struct SatFitArgs {
    /// Saturation CSV `power_W,rate_per_s`.
    pub data: Option<PathBuf>,
    /// Skip the fit and invert the saturation law at this S = 1 power.
    #[arg(long, value_parser = units::power)]
    pub p_at_s1: Option<f64>,
    #[arg(long, value_parser = units::time)]
    pub gamma_inv: f64,
    /// Laser detuning (`0.5gamma`, `10MHz`, rad/s).
    #[arg(long, value_parser = units::detuning, allow_hyphen_values = true)]
    pub delta: Detuning,
    #[arg(long, value_parser = units::length)]
    pub wavelength: f64,
    /// Multi-level correction factor applied to the fitted G.
    #[arg(long, default_value_t = 1.0)]
    pub correction: f64,
    /// Known background rate in 1/s; fitted when absent.
    #[arg(long)]
    pub background: Option<f64>,
    #[arg(long, value_enum, default_value_t = WeightingArg::Auto)]
    pub weighting: WeightingArg,
}

#[derive(Debug, Args)]
pub struct StokesArgs {
    /// Stokes map CSV `x,y,S0,S1,S2,S3`.
    pub map: PathBuf,
    #[arg(long)]
    pub hf: f64,
    #[arg(long, default_value = "0", value_parser = units::angle)]
    pub hole: f64,
    /// Pupil centre `x,y` in map coordinates.
    #[arg(long, value_parser = units::point, requires = "radius", allow_hyphen_values = true)]
    pub center: Option<(f64, f64)>,
    /// Pupil radius in map coordinates.
    #[arg(long, requires = "center")]
    pub radius: Option<f64>,
    /// Write the azimuthally averaged radial amplitude to this CSV.
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FigArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    /// Directory for the data files; the config's output directory by default.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Settings shared by all subcommands.
pub struct Context {
    pub config: RunConfig,
    pub seed: u64,
    pub threads: usize,
}

fn run(cli: Cli) -> Result<(Table, Format), CliError> {
    let config = RunConfig::from_env()?;
    let format = if cli.global.json {
        Format::Json
    } else {
        cli.global.format.unwrap_or(config.format)
    };
    let ctx = Context {
        config,
        seed: cli.global.seed,
        threads: cli.global.parallel as usize,
    };
    let table = match cli.command {
        Command::SolidAngle(a) => commands::solid_angle(&ctx, &a)?,
        Command::Overlap(a) => commands::overlap(&ctx, &a)?,
        Command::OptimizeWaist(a) => commands::optimize_waist(&ctx, &a)?,
        Command::Phase(a) => commands::phase(&a)?,
        Command::Transmission(a) => commands::transmission(&a)?,
        Command::Temporal(a) => commands::temporal(&ctx, &a)?,
        Command::PulseScatter(a) => commands::pulse_scatter(&a)?,
        Command::Cavity(a) => commands::cavity(&a)?,
        Command::SatFit(a) => commands::sat_fit(&ctx, &a)?,
        Command::Stokes(a) => commands::stokes(&a)?,
        Command::Fig(a) => figures::generate(&ctx, &a)?,
    };
    Ok((table, format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok((table, format)) => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            if table
                .write(&mut lock, format)
                .and_then(|_| lock.flush())
                .is_err()
            {
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
