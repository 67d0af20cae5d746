use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "mbot", version, about = "Minibatch optimal transport estimators, plans, flows and color transfer")]
pub struct Cli {
    /// JSON file with default settings; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed (falls back to MBOT_SEED, then 42).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for batch loops.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Output directory for CSV and image files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    /// w1, w2, w2sq, wp, wpp, entropic, sinkhorn or gw.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Batch size.
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of batch pairs (incomplete mode).
    #[arg(long)]
    pub k: Option<usize>,
    /// Ground cost exponent.
    #[arg(long)]
    pub p: Option<f64>,
    /// Entropic regularization.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Sampling law: with or without (replacement).
    #[arg(long)]
    pub law: Option<String>,
    /// Reweighting: uniform or normalized.
    #[arg(long)]
    pub reweight: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minibatch loss between two point clouds.
    Estimate {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
        /// complete (exhaustive enumeration) or incomplete (k sampled pairs).
        #[arg(long)]
        mode: Option<String>,
        /// Debiased loss h(a,b) - (h(a,a) + h(b,b)) / 2.
        #[arg(long)]
        debiased: bool,
        /// CSV file the result row is appended to (default: OUT/estimate.csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Averaged or incomplete minibatch transport plan.
    Plan {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
        /// complete, incomplete or closed-form (1D, uniform, without replacement).
        #[arg(long)]
        mode: Option<String>,
        /// Plan CSV path (default: OUT/plan.csv).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Gradient flow of a source cloud towards a target cloud.
    Flow {
        x0: PathBuf,
        y: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        /// raw or debiased.
        #[arg(long)]
        loss: Option<String>,
        /// Snapshot every this many iterations.
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Barycentric color transfer from a target image onto a source image.
    Color {
        src: PathBuf,
        tgt: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
        /// Output PNG path (default: OUT/color.png).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Runs one experiment of the suite and writes OUT/<name>.csv.
    Experiment {
        /// marginals, sparsity, sample-complexity, positivity, gw-invariance or deviation.
        name: String,
        /// Repetitions per grid cell.
        #[arg(long)]
        reps: Option<usize>,
        /// Source image for the sparsity experiment.
        #[arg(long)]
        src: Option<PathBuf>,
        /// Target image for the sparsity experiment.
        #[arg(long)]
        tgt: Option<PathBuf>,
    },
    /// Brute-force enumerations used as test fixtures.
    Oracle {
        #[command(subcommand)]
        what: OracleCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Complete minibatch loss by exhaustive enumeration.
    Loss {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Averaged minibatch plan by exhaustive enumeration.
    Plan {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact rational 1D closed-form plan for sorted uniform inputs.
    Plan1d {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}
