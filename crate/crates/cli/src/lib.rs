//! `rotdop` command-line front end: figure reproduction, data export and
//! beat-frequency estimation.
//!
//! Every command resolves its parameters as defaults < `--config` file <
//! flags, echoes the resolved set into the output header, and exits with
//! 0 (ok), 2 (bad arguments or input), 3 (numerical or output failure) or,
//! for `estimate` only, 4 (fit did not converge).

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{
    ConfigFile, EstimateParams, HomParams, JsaParams, MethodArg, PhasematchParams, PipelineParams,
};
use crate::error::{CliError, EXIT_OK, EXIT_USAGE};

pub const TOOL: &str = concat!("rotdop ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Parser)]
#[command(name = "rotdop", version, about = "Rotational-Doppler frequency entanglement simulator")]
pub struct Cli {
    /// JSON file presetting any flag, keyed by command then long flag name.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the two-photon state after each stage of the source.
    Pipeline(PipelineArgs),
    /// Joint spectral amplitude on a square detuning grid.
    Jsa(JsaArgs),
    /// Hong-Ou-Mandel coincidence trace.
    Hom(HomArgs),
    /// BBO type-II emission curves and their crossing.
    Phasematch(PhasematchArgs),
    /// Fit a HOM trace CSV for the beat frequency 2lΩ.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Topological charge of the q-plates.
    #[arg(long)]
    pub l: Option<u32>,
    /// Q-plate rotation rate Ω, rad/s.
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Degenerate photon angular frequency, rad/s.
    #[arg(long)]
    pub center: Option<f64>,
    /// Write the listing here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JsaArgs {
    /// Pump spectral width σ, rad/s.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Phase-matching Gaussian coefficient γ (dimensionless).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Phase-matching coefficient A = −B, s/rad; default 0.7/(σ√(2γ)).
    #[arg(long, allow_negative_numbers = true)]
    pub a_coef: Option<f64>,
    /// Topological charge of the rotating q-plates (0: no shift).
    #[arg(long)]
    pub rde_l: Option<u32>,
    /// Q-plate rotation rate Ω, rad/s.
    #[arg(long, allow_negative_numbers = true)]
    pub rde_omega: Option<f64>,
    /// Grid half-width in detuning, rad/s.
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Points per grid axis, 16 to 4096.
    #[arg(long)]
    pub grid: Option<usize>,
    /// CSV destination (standard output if absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Optional SVG heat map destination.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HomArgs {
    /// Envelope coherence time τ_c, s.
    #[arg(long)]
    pub tau_c: Option<f64>,
    /// Topological charge of the q-plates.
    #[arg(long)]
    pub l: Option<u32>,
    /// Q-plate rotation rate Ω, rad/s.
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Delays span [−tau-span, tau-span], s.
    #[arg(long)]
    pub tau_span: Option<f64>,
    /// Number of delay points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Closed form or quadrature of the overlap integral.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Standard deviation of additive Gaussian noise on p (closed method only).
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Noise generator seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV destination (standard output if absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Optional SVG line plot destination.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhasematchArgs {
    /// Angle between optic axis and pump, degrees, in (0, 90).
    #[arg(long, allow_negative_numbers = true)]
    pub cut_angle: Option<f64>,
    /// Pump frequency, THz.
    #[arg(long)]
    pub pump_thz: Option<f64>,
    /// Lowest signal frequency, THz.
    #[arg(long)]
    pub f_min: Option<f64>,
    /// Highest signal frequency, THz.
    #[arg(long)]
    pub f_max: Option<f64>,
    /// Number of signal frequencies.
    #[arg(long)]
    pub points: Option<usize>,
    /// CSV destination (standard output if absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Optional SVG plot destination.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// HOM trace CSV with columns tau_s (s) and p.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON destination (standard output if absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

macro_rules! layer {
    ($params:ident, $args:ident; $($field:ident),* $(,)?) => {
        $(if let Some(v) = $args.$field { $params.$field = v.into(); })*
    };
}

impl PipelineArgs {
    fn resolve(self, mut p: PipelineParams) -> PipelineParams {
        layer!(p, self; l, omega, center, output);
        p
    }
}

impl JsaArgs {
    fn resolve(self, mut p: JsaParams) -> JsaParams {
        layer!(p, self; sigma, gamma, a_coef, rde_l, rde_omega, half_width, grid, output, svg);
        p
    }
}

impl HomArgs {
    fn resolve(self, mut p: HomParams) -> HomParams {
        layer!(p, self; tau_c, l, omega, tau_span, points, method, noise_sigma, seed, output, svg);
        p
    }
}

impl PhasematchArgs {
    fn resolve(self, mut p: PhasematchParams) -> PhasematchParams {
        layer!(p, self; cut_angle, pump_thz, f_min, f_max, points, output, svg);
        p
    }
}

impl EstimateArgs {
    fn resolve(self, mut p: EstimateParams) -> EstimateParams {
        layer!(p, self; input, output);
        p
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "rotdop: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Pipeline(a) => commands::pipeline(&a.resolve(file.pipeline)),
        Command::Jsa(a) => commands::jsa(&a.resolve(file.jsa)),
        Command::Hom(a) => commands::hom(&a.resolve(file.hom)),
        Command::Phasematch(a) => commands::phasematch(&a.resolve(file.phasematch)),
        Command::Estimate(a) => commands::estimate(&a.resolve(file.estimate)),
    }
}
