use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ptflat",
    version,
    about = "Flat bands and PT-symmetric gain/loss on quasi-one-dimensional lattice ribbons"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bloch bands on a uniform k-grid.
    Bands(BandsArgs),
    /// All eigenvalues of a finite ribbon, with participation ratios.
    Spectrum(SpectrumArgs),
    /// Stable fraction, mean participation ratio and flat-band count versus rho.
    Scan(ScanArgs),
    /// Propagates a state along z and records power and participation ratio.
    Evolve(EvolveArgs),
    /// Runs the built-in cross-checks at reduced sizes.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Initial {
    /// Compact localized flat-band state (lieb and stub, rho = 0).
    Cls,
    /// A single excited site.
    SingleSite,
    /// Seeded pseudo-random amplitudes.
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file, or `-` for standard output.
    #[arg(long, default_value = "-")]
    pub out: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct BandsArgs {
    /// Built-in lattice name (lieb, kagome, stub) or path to a `.lat` file.
    #[arg(long, default_value = "lieb")]
    pub lattice: String,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 256)]
    pub kpoints: usize,
    /// Add closed-form bands and report the largest deviation on stderr.
    #[arg(long)]
    pub compare_analytic: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value = "lieb")]
    pub lattice: String,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 40)]
    pub cells: usize,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Open)]
    pub boundary: BoundaryArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, default_value = "lieb")]
    pub lattice: String,
    #[arg(long, default_value_t = 0.0)]
    pub rho_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub rho_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub rho_step: f64,
    #[arg(long, default_value_t = 40)]
    pub cells: usize,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Open)]
    pub boundary: BoundaryArg,
    /// An eigenvalue counts as stable when |Im| is at most this (times V).
    #[arg(long, default_value_t = 1e-8)]
    pub tol_stable: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_flat: f64,
    /// Flat-band energy to count; defaults to the built-in lattice's value, or 0.
    #[arg(long)]
    pub flat_value: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[arg(long, default_value = "lieb")]
    pub lattice: String,
    #[arg(long, default_value_t = 0.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 40)]
    pub cells: usize,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Open)]
    pub boundary: BoundaryArg,
    #[arg(long, default_value_t = 100.0)]
    pub z_max: f64,
    #[arg(long, default_value_t = 0.001)]
    pub dz: f64,
    /// Integration steps between recorded samples.
    #[arg(long, default_value_t = 100)]
    pub stride: usize,
    /// Stop once the power exceeds this multiple of its initial value.
    #[arg(long, default_value_t = 1e12)]
    pub blowup_factor: f64,
    #[arg(long, value_enum, default_value_t = Initial::Random)]
    pub initial: Initial,
    /// Seed for `--initial random`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Site row for `--initial single-site` (default: middle of the ribbon).
    #[arg(long)]
    pub site: Option<usize>,
    /// Cell for `--initial cls` (default: middle cell).
    #[arg(long)]
    pub cell: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Restrict the checks to one lattice (built-in name or `.lat` path).
    #[arg(long)]
    pub lattice: Option<String>,
    /// Run the rho-dependent checks at this single value.
    #[arg(long)]
    pub rho: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}
