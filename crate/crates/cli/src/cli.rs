use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

/// Elliptic-curve rank classification pipeline.
///
/// Every command accepts `--config FILE` with `key = value` lines using the
/// flag names; flags given on the command line win. Relative paths resolve
/// against $ECRANK_DATA_DIR when it is set.
#[derive(Debug, Parser)]
#[command(name = "ecrank", version)]
pub struct Cli {
    /// Worker threads (1 gives fully reproducible runs)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate unlabeled curves (random Weierstrass models and pencil cubics)
    Gen(GenArgs),
    /// Compute a_p for every prime below a bound
    Aps(ApsArgs),
    /// Mestre-Nagao sums S0..S6 per curve
    Sums(SumsArgs),
    /// Train a CNN or FCNN classifier and report test metrics
    Train(TrainArgs),
    /// Evaluate a saved model on a labeled dataset
    Eval(EvalArgs),
    /// Decision boundaries of a one-sum FCNN as a function of the conductor
    Cutoffs(CutoffsArgs),
    /// Random hyperparameter search scored by validation MCC
    Search(SearchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of random Weierstrass curves
    #[arg(long)]
    pub count: Option<usize>,
    /// Pencil curves per k, e.g. `3:100,6:50`
    #[arg(long)]
    pub pencil: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bound on |a4| and |a6|
    #[arg(long)]
    pub coeff_bound: Option<u64>,
    /// Bound on numerators and denominators of pencil base points
    #[arg(long)]
    pub coord_bound: Option<u64>,
    /// Pollard rho iterations allowed per discriminant
    #[arg(long)]
    pub factor_budget: Option<u64>,
    #[arg(long)]
    pub attempts_per_curve: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ApsArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub curves: Option<PathBuf>,
    /// Primes below this bound are covered
    #[arg(long)]
    pub bound: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SumsArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub curves: Option<PathBuf>,
    #[arg(long)]
    pub aps: Option<PathBuf>,
    /// Bound B for S0..S5 (1000, 10000 or 100000)
    #[arg(long)]
    pub bound: Option<u64>,
    /// Delta for S6; the cell stays empty when a_p data stops short of exp(2 pi delta)
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Dataset, split and optimizer settings shared by `train` and `search`.
#[derive(Clone, Debug, Default, Args)]
pub struct TrainOpts {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// cnn, fcnn or omega (FCNN on all seven sums)
    #[arg(long)]
    pub arch: Option<String>,
    /// Labeled curves.csv (CNN)
    #[arg(long)]
    pub curves: Option<PathBuf>,
    /// aps.bin (CNN)
    #[arg(long)]
    pub aps: Option<PathBuf>,
    /// sums.csv (FCNN)
    #[arg(long)]
    pub sums: Option<PathBuf>,
    /// FCNN inputs besides the conductor, e.g. `s0` or `s2,s5`
    #[arg(long)]
    pub features: Option<String>,
    /// CNN bound N: one column per prime below it
    #[arg(long)]
    pub bound: Option<u64>,
    /// Conductor normalization (default: largest conductor in the data)
    #[arg(long)]
    pub n_max: Option<String>,
    /// all (one class per rank) or binary (low/high)
    #[arg(long)]
    pub labels: Option<String>,
    /// Smallest rank counted as high
    #[arg(long)]
    pub threshold: Option<u32>,
    /// Drop curves of larger rank
    #[arg(long)]
    pub max_rank: Option<u32>,
    /// uniform or top-range
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub cut_lo: Option<String>,
    #[arg(long)]
    pub cut_hi: Option<String>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr_max: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long, action = ArgAction::Set)]
    pub cycle_momentum: Option<bool>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub pct_start: Option<f64>,
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Weight the loss by inverse class frequency
    #[arg(long, action = ArgAction::Set)]
    pub class_weights: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub l1: Option<usize>,
    #[arg(long)]
    pub l2: Option<usize>,
    #[arg(long)]
    pub l3: Option<usize>,
    #[arg(long)]
    pub ks: Option<usize>,
    /// Directory for model.bin, history.csv and metrics.json
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub opts: TrainOpts,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub opts: TrainOpts,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub search_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub curves: Option<PathBuf>,
    #[arg(long)]
    pub aps: Option<PathBuf>,
    #[arg(long)]
    pub sums: Option<PathBuf>,
    /// Override the feature set stored with the model
    #[arg(long)]
    pub features: Option<String>,
    /// Override the CNN bound stored with the model
    #[arg(long)]
    pub bound: Option<u64>,
    /// all, or test to rebuild the training-time test split
    #[arg(long)]
    pub subset: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CutoffsArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// log10 conductor grid `lo:hi:count`
    #[arg(long, allow_hyphen_values = true)]
    pub conductors: Option<String>,
    /// Sum value grid `lo:hi:count`
    #[arg(long, allow_hyphen_values = true)]
    pub sum_grid: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
