use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qphase",
    version,
    about = "Phase-space statistical mechanics of finite quantum systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy and heat capacity of a spin-1/2 against temperature, for the
    /// phase-space (Gamma) ensemble and the conventional Gibbs ensemble.
    Curves(CurvesArgs),
    /// Density matrix of a canonical, microcanonical or Gibbs ensemble.
    Estimate(EstimateArgs),
    /// Integrate the Schrodinger flow and report its invariants.
    Dynamics(DynamicsArgs),
    /// Compare Monte Carlo estimates with closed forms; exit 2 on any |z| > 3.
    Crosscheck(CrosscheckArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct HamiltonianSource {
    /// Hamiltonian file (matrix or `spectrum` form).
    #[arg(long, value_name = "PATH")]
    pub hamiltonian: Option<PathBuf>,
    /// Eigenvalues in the standard basis, e.g. `-1,1`.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub levels: Option<String>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent random streams; results depend on this value.
    #[arg(long, default_value_t = 8)]
    pub chunks: usize,
    /// Microcanonical shell width [default: 1% of the spectral range].
    #[arg(long, value_name = "WIDTH")]
    pub shell: Option<f64>,
    /// Kernel half-width for energy densities [default: 2% of the range].
    #[arg(long, value_name = "WIDTH")]
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    /// Level half-splitting (the magnetic energy muB).
    #[arg(long, default_value_t = 1.0)]
    pub h: f64,
    /// Boltzmann's constant.
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long)]
    pub tmin: f64,
    #[arg(long)]
    pub tmax: f64,
    /// Number of temperatures, endpoints included.
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Space temperatures geometrically instead of linearly.
    #[arg(long)]
    pub log: bool,
    /// Output CSV [default: standard output].
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ensemble {
    Canonical,
    Microcanonical,
    Gibbs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub source: HamiltonianSource,
    #[arg(long, value_enum)]
    pub ensemble: Ensemble,
    /// Inverse temperature (canonical, gibbs).
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Energy of the shell (microcanonical).
    #[arg(long, allow_hyphen_values = true)]
    pub energy: Option<f64>,
    #[command(flatten)]
    pub mc: McArgs,
    /// Output JSON [default: standard output].
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write the canonical energy density as CSV.
    #[arg(long, value_name = "PATH")]
    pub pdf: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    #[command(flatten)]
    pub source: HamiltonianSource,
    /// Colatitude from the upper level (two-level systems only).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Azimuth about the energy axis (two-level systems only).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    /// Initial amplitudes as `re,im` pairs separated by spaces
    /// [default: equal superposition].
    #[arg(
        long,
        value_name = "AMPS",
        allow_hyphen_values = true,
        conflicts_with = "theta"
    )]
    pub state: Option<String>,
    /// Final time.
    #[arg(long)]
    pub t: f64,
    /// Integration step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Write every n-th step to the trajectory file.
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    /// Trajectory CSV [default: standard output].
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Invariant report as JSON [default: printed as text].
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrosscheckArgs {
    /// Nondegenerate eigenvalues, e.g. `0,1,2`.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub levels: String,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub beta: f64,
    #[command(flatten)]
    pub mc: McArgs,
    /// Report as JSON [default: printed as text].
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}
