//! Command-line front end for selection-convolution graphs.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use selconv::interp::Interpolation;
use selconv::sampling::SamplingMethod;

pub use config::{RunConfig, Task};

/// Exit code for invalid configuration or arguments.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit code for failures while doing the work.
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Runtime(#[from] anyhow::Error),
}

impl From<selconv::Error> for CliError {
    fn from(e: selconv::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "selconv", version, about = "Run planar CNN weights on spheres and meshes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample points on the sphere and write them (plus an optional preview).
    Sample(Overrides),
    /// Build a graph pyramid for the sphere or a mesh and report statistics.
    Build(Overrides),
    /// Run a network on an equirectangular image or a mesh texture.
    Run(Overrides),
    /// Compare sampling, clustering and interpolation choices.
    Ablate(Overrides),
    /// Describe a point set, pyramid, weight file, network or image.
    Info(Overrides),
    /// Write a bundled network (spec and weights).
    Preset(PresetArgs),
}

/// Flags shared by the main subcommands; they override the config file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_task)]
    pub task: Option<Task>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub method: Option<SamplingMethod>,
    #[arg(long)]
    pub clustering: Option<SamplingMethod>,
    #[arg(long)]
    pub interp: Option<Interpolation>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_theta: Option<f64>,
    #[arg(long)]
    pub fov: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub n_phi: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub subdivisions: Option<usize>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub network: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub preview: Option<PathBuf>,
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long)]
    pub texture: Option<PathBuf>,
}

fn parse_task(s: &str) -> Result<Task, String> {
    match s {
        "sphere" => Ok(Task::Sphere),
        "mesh" => Ok(Task::Mesh),
        _ => Err(format!("unknown task {s:?} (expected sphere or mesh)")),
    }
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    /// identity, average, smooth3 or toy_unet
    pub name: String,
    #[arg(long, default_value_t = 3)]
    pub channels: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub weights: PathBuf,
}

impl Overrides {
    /// Config file (if any) with flags applied on top, validated.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { c.$field = v.clone(); })*
            };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { c.$field = Some(v.clone()); })*
            };
        }
        set!(task, seed, method, interp, k, levels);
        set_opt!(
            clustering, delta_theta, fov, n, n_phi, count, subdivisions, width, height, samples,
            weights, network, input, output, preview, mesh, texture
        );
        c.validate()?;
        Ok(c)
    }
}

/// Runs a parsed command and returns its stdout report.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Sample(o) => commands::cmd_sample(&o.resolve()?),
        Command::Build(o) => commands::cmd_build(&o.resolve()?),
        Command::Run(o) => commands::cmd_run(&o.resolve()?),
        Command::Ablate(o) => commands::cmd_ablate(&o.resolve()?),
        Command::Info(o) => commands::cmd_info(&o.resolve()?),
        Command::Preset(p) => commands::cmd_preset(p),
    }
}
