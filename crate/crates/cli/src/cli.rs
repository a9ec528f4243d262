//! Command-line grammar.

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

/// Evaluate, audit and simulate product-form exchangeable feature
/// probability functions.
#[derive(Debug, Parser)]
#[command(name = "efpf-kit", version, args_override_self = true)]
pub struct Cli {
    /// Flat key=value file; its entries act as flags placed before the
    /// command-line ones, so flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the EFPF of a model at a count vector.
    Efpf(EfpfArgs),
    /// Check the consistency condition and the V recursion at a count vector.
    Consistency(ConsistencyArgs),
    /// Cotransition probabilities P(K_n = k | K_m = l).
    Cotrans(CotransArgs),
    /// Scan the cotransition ratio along a path omega_m.
    LimitScan(LimitScanArgs),
    /// Draw one feature allocation.
    Sample(SampleArgs),
    /// Monte Carlo check of the almost-sure growth of K_n.
    GrowthLaw(GrowthLawArgs),
    /// Summation identities behind the cotransition normalizers.
    Identities(IdentitiesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// Three-parameter buffet process (0 <= alpha < 1).
    Ibp3,
    /// Two-parameter buffet process (alpha = 0).
    Ibp2,
    /// Finite Beta-Bernoulli model (alpha < 0).
    Bb,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Ibp3 => "ibp3",
            Model::Ibp2 => "ibp2",
            Model::Bb => "bb",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathKind {
    /// omega_m = round(c m^alpha).
    Power,
    /// omega_m = round(gamma ln m).
    Log,
    /// omega_m = N.
    Constant,
    /// omega_m = m, faster than any regular path when alpha < 1.
    Linear,
    /// omega_m = round(sqrt m), faster than the logarithmic path.
    Sqrt,
    /// omega_m = round(ln m) + 1, a divergent path with no limit law.
    Log1p,
}

#[derive(Clone, Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    pub output: Format,
    /// Write the output to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct ModelArgs {
    /// Model family.
    #[arg(long, value_enum, default_value = "ibp3")]
    pub model: Model,
    /// Buffet mass gamma (ibp3, ibp2).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Discount alpha (ibp3, bb).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Concentration theta.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Number of latent features (bb).
    #[arg(long = "N", value_name = "COUNT")]
    pub n_features: Option<u64>,
}

#[derive(Clone, Debug, Args)]
pub struct AssertArgs {
    /// Exit with status 4 when the audit exceeds --tol.
    #[arg(long)]
    pub assert: bool,
    /// Threshold used by --assert.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Clone, Debug, Args)]
pub struct EfpfArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of individuals.
    #[arg(long)]
    pub n: u64,
    /// Feature counts, comma separated (empty for no features).
    #[arg(long, value_delimiter = ',', num_args = 0.., action = ArgAction::Set)]
    pub m: Vec<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct ConsistencyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of individuals.
    #[arg(long)]
    pub n: u64,
    /// Feature counts, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 0.., action = ArgAction::Set)]
    pub m: Vec<u64>,
    /// Largest number of new features summed when V has unbounded support.
    #[arg(long, default_value_t = 300)]
    pub j_max: u64,
    /// Relative size of the last kept term at which a truncated sum stops.
    #[arg(long, default_value_t = 1e-14)]
    pub tail_tol: f64,
    #[command(flatten)]
    pub check: AssertArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct CotransArgs {
    /// Model whose V array drives the brute-force check.
    #[arg(long, value_enum, default_value = "ibp3")]
    pub model: Model,
    /// Buffet mass for the brute-force law (ibp3, ibp2).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Discount alpha.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Concentration theta.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    /// Number of latent features for the brute-force law (bb).
    #[arg(long = "N", value_name = "COUNT")]
    pub n_features: Option<u64>,
    /// Earlier time n.
    #[arg(long)]
    pub n: u64,
    /// Later time m > n.
    #[arg(long)]
    pub m: u64,
    /// Value l of K_m.
    #[arg(long)]
    pub l: u64,
    /// A single value k of K_n; all of 0..=l when omitted.
    #[arg(long)]
    pub k: Option<u64>,
    /// Also compute each probability by enumerating chain paths.
    #[arg(long)]
    pub brute_force: bool,
    #[command(flatten)]
    pub check: AssertArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct LimitScanArgs {
    /// Discount alpha.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Concentration theta.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    /// Time n of the ratio.
    #[arg(long)]
    pub n: u64,
    /// Value k of K_n.
    #[arg(long)]
    pub k: u64,
    /// Path omega_m.
    #[arg(long, value_enum)]
    pub path: PathKind,
    /// Constant of the power path.
    #[arg(long)]
    pub c: Option<f64>,
    /// Constant of the logarithmic path.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Value of the constant path.
    #[arg(long = "N", value_name = "COUNT")]
    pub n_features: Option<u64>,
    /// Grid of m values, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        action = ArgAction::Set,
        default_value = "100,1000,10000,100000,1000000"
    )]
    pub m_grid: Vec<u64>,
    #[command(flatten)]
    pub check: AssertArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of individuals.
    #[arg(long)]
    pub n: u64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generator substream.
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct GrowthLawArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Largest number of individuals.
    #[arg(long)]
    pub n: u64,
    /// Number of independent runs.
    #[arg(long, default_value_t = 1000)]
    pub runs: u64,
    /// Generator seed; run r uses substream stream + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// First generator substream.
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[command(flatten)]
    pub check: AssertArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct IdentitiesArgs {
    /// Discount alpha.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Concentration theta.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: f64,
    /// Lower index n.
    #[arg(long)]
    pub n: u64,
    /// Upper index m > n.
    #[arg(long)]
    pub m: u64,
    /// Power l of the normalizer d^{m,l}.
    #[arg(long, default_value_t = 1)]
    pub l: u64,
    #[command(flatten)]
    pub check: AssertArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}
