use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "kforge", version, about = "Exact Kuranishi families for finite-dimensional dg Lie algebras")]
pub struct Cli {
    /// Write a machine-readable run report (includes timing) to this file.
    #[arg(long, global = true, value_name = "FILE")]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check d^2 = 0, graded antisymmetry, Jacobi and Leibniz.
    Validate(ValidateArgs),
    /// Build the Hodge operators and certify Id = P + Laplacian * G.
    Hodge(HodgeArgs),
    /// Solve the Maurer-Cartan equation order by order in harmonic gauge.
    Kuranishi(KuranishiArgs),
    /// Validate an action and check that the Kuranishi family is equivariant.
    Equivariance(EquivarianceArgs),
    /// Average a metric over a finite group.
    AverageMetric(AverageArgs),
    /// Apply the gauge action exp(xi) to a degree-1 series.
    Gauge(GaugeArgs),
    /// Write example dgLas and actions.
    #[command(subcommand)]
    Build(BuildCommand),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub dgla: PathBuf,
    /// Skip the cubic Jacobi check.
    #[arg(long)]
    pub skip_jacobi: bool,
    #[arg(long, value_name = "FILE")]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricArg {
    /// Metric document; defaults to the dgLa's own metric, else identity.
    #[arg(long, value_name = "FILE")]
    pub metric: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HodgeArgs {
    pub dgla: PathBuf,
    #[command(flatten)]
    pub metric: MetricArg,
    /// Also certify the splitting for this many random metrics.
    #[arg(long, default_value_t = 0, value_name = "K")]
    pub random_metrics: usize,
    /// Seed for the random metrics.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KuranishiArgs {
    pub dgla: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub order: u32,
    #[command(flatten)]
    pub metric: MetricArg,
    /// Write the family document here.
    #[arg(long, value_name = "FILE")]
    pub emit: Option<PathBuf>,
    /// Ignore the parameter-count limit.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct EquivarianceArgs {
    pub dgla: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub action: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub order: u32,
    #[command(flatten)]
    pub metric: MetricArg,
    /// Replace the metric by its group average first (finite actions only).
    #[arg(long)]
    pub average_metric: bool,
    #[arg(long, default_value_t = kforge_core::equivariance::DEFAULT_MAX_GROUP_SIZE)]
    pub max_group_size: usize,
    #[arg(long)]
    pub force: bool,
    #[arg(long, value_name = "FILE")]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AverageArgs {
    pub dgla: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub action: PathBuf,
    #[command(flatten)]
    pub metric: MetricArg,
    #[arg(long, default_value_t = kforge_core::equivariance::DEFAULT_MAX_GROUP_SIZE)]
    pub max_group_size: usize,
    /// Write the averaged metric document here.
    #[arg(long, value_name = "FILE")]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GaugeArgs {
    pub dgla: PathBuf,
    /// Degree-0 series document.
    #[arg(long, value_name = "FILE")]
    pub xi: PathBuf,
    /// Degree-1 series document.
    #[arg(long, value_name = "FILE")]
    pub series: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Convention {
    Graded,
    SameWedge,
}

#[derive(Debug, Subcommand)]
pub enum BuildCommand {
    /// gl(r) tensor exterior forms on an n-torus, with zero differential.
    TorusConstants {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        /// Odd-odd bracket convention.
        #[arg(long, value_enum, default_value_t = Convention::Graded)]
        convention: Convention,
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
    /// Abelian Dolbeault complex of a flat line bundle on a 1-torus.
    Twisted {
        #[arg(long, default_value_t = 1)]
        cutoff: usize,
        /// Character offset, written `p/q` or `re,im`.
        #[arg(long, default_value = "0")]
        twist: String,
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
    /// Four-dimensional fixture with a third-order obstruction.
    Toy3 {
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        emit_action: Option<PathBuf>,
    },
    /// Conjugation action A -> h^-1 A h on a torus-constants dgLa.
    Conjugation {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        /// JSON file holding the r x r matrix h.
        #[arg(long, value_name = "FILE")]
        matrix: PathBuf,
        /// Write the action document here.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
}
