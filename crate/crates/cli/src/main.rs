//! `topo-trojan`: command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or I/O error, 3 numeric
//! failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use topo_trojan::netlab::MixtureKind;
use topo_trojan::trace::Kernel;

#[derive(Parser, Debug)]
#[command(name = "topo-trojan", about = "Topological Trojan detection toolkit", disable_version_flag = true)]
struct Cli {
    /// Print the format version of every file type and exit.
    #[arg(long)]
    version: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a labelled Gaussian mixture dataset.
    GenGaussian {
        /// Mixture to sample: D1, D2 or D3.
        #[arg(long)]
        which: MixtureKind,
        /// Number of points.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        /// Input dimension.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        /// Output dataset CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a labelled population of clean and Trojaned networks.
    GenZoo {
        /// Networks per class.
        #[arg(long, default_value_t = 40)]
        models_per_class: usize,
        /// Training points per network.
        #[arg(long, default_value_t = 400)]
        train_samples: usize,
        /// Clean probe inputs written to `clean.csv`.
        #[arg(long, default_value_t = 4)]
        clean_samples: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        /// Output directory for network files, `zoo.csv` and `clean.csv`.
        #[arg(long)]
        dir: PathBuf,
    },
    /// Replicate every input with one random patch resampled uniformly.
    Perturb {
        /// Input dataset CSV.
        #[arg(long = "in")]
        input: PathBuf,
        /// Perturbed copies per input.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Number of contiguous coordinates resampled per copy.
        #[arg(long, default_value_t = 1)]
        patch: usize,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long)]
        seed: u64,
        /// Output dataset CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Record hidden-neuron activations of a network on a dataset.
    Trace {
        /// Network file.
        #[arg(long)]
        net: PathBuf,
        /// Input dataset CSV.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output trace file.
        #[arg(long)]
        out: PathBuf,
        /// Write CSV instead of the binary trace format.
        #[arg(long)]
        csv: bool,
    },
    /// Correlation matrix of a trace.
    Corr {
        /// Trace file (binary, or CSV when the name ends in `.csv`).
        #[arg(long)]
        trace: PathBuf,
        /// Correlation kernel: pearson or cosine.
        #[arg(long, default_value = "pearson")]
        kernel: Kernel,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the Rips filtration of a correlation matrix.
    Complex {
        #[command(flatten)]
        corr: CorrArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// 0- and 1-dimensional persistence diagrams.
    Persist {
        #[command(flatten)]
        corr: CorrArgs,
        /// Keep zero-persistence dots.
        #[arg(long)]
        keep_zero: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Representative cycles of the most persistent 1-dimensional classes.
    Cycles {
        #[command(flatten)]
        corr: CorrArgs,
        /// Keep the `k` most persistent cycles.
        #[arg(long, conflicts_with = "death_cutoff", required_unless_present = "death_cutoff")]
        top_k: Option<usize>,
        /// Keep every cycle dying at or below this value.
        #[arg(long)]
        death_cutoff: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bottleneck distance between two diagram files.
    Bottleneck {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Homology dimension to compare.
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
    /// Time the coboundary and pruned boundary reductions.
    Bench {
        /// One or more correlation CSVs.
        #[arg(long, required = true, num_args = 1..)]
        corr: Vec<PathBuf>,
    },
    /// Topological feature table row from a diagram.
    Features {
        /// Diagram CSV.
        #[arg(long)]
        dg: PathBuf,
        /// Correlation CSV used for the baseline features.
        #[arg(long, requires = "baseline")]
        corr: Option<PathBuf>,
        /// Append correlation baseline features.
        #[arg(long, requires = "corr")]
        baseline: bool,
        /// Model name; defaults to the diagram file stem.
        #[arg(long)]
        model: Option<String>,
        /// Class label (0 clean, 1 Trojaned).
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        label: Option<u8>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-sample test on one feature across two feature tables.
    Compare {
        #[arg(long)]
        features_a: PathBuf,
        #[arg(long)]
        features_b: PathBuf,
        /// Feature column, e.g. f04.
        #[arg(long)]
        feature: String,
        /// Test to run; only welch is supported.
        #[arg(long, default_value = "welch", value_parser = ["welch"])]
        test: String,
    },
    /// Layer lengths of cycle edges and, with a correlation matrix, of 0-dimensional death edges.
    Shortcut {
        /// Cycle file.
        #[arg(long)]
        cycles: PathBuf,
        #[arg(long, default_value_t = 500)]
        top_k: usize,
        /// Correlation CSV for death-edge lengths.
        #[arg(long)]
        corr: Option<PathBuf>,
        /// Filtration cutoff used with `--corr`.
        #[arg(long, default_value_t = 2.0)]
        cutoff: f64,
    },
    /// Train a detector on a labelled model zoo.
    DetectTrain {
        #[command(flatten)]
        zoo: ZooArgs,
        #[arg(long, default_value_t = 32)]
        hidden: usize,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 1e-4)]
        l2: f64,
        /// Output detector file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a trained detector on a labelled model zoo.
    DetectEval {
        /// Detector file.
        #[arg(long)]
        detector: PathBuf,
        #[command(flatten)]
        zoo: ZooArgs,
    },
    /// Bottleneck distance between the two constructed networks, with risks.
    Theorem1 {
        /// Sampled points per mixture.
        #[arg(long, default_value_t = 50_000)]
        samples: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Bottleneck error of sampled diagrams against the analytic one.
    Convergence {
        /// Increasing sample sizes.
        #[arg(long, value_delimiter = ',', default_value = "400,1600,6400,25600")]
        grid: Vec<usize>,
        /// Repeats per grid point.
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[arg(long, default_value = "cosine")]
        kernel: Kernel,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Target error for the printed sample budget.
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Failure probability for the printed sample budget.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Args, Debug)]
struct CorrArgs {
    /// Correlation CSV.
    #[arg(long)]
    corr: PathBuf,
    /// Filtration cutoff on dissimilarity.
    #[arg(long, default_value_t = 2.0)]
    cutoff: f64,
}

#[derive(Args, Debug)]
struct ZooArgs {
    /// Manifest CSV with columns net_path,label.
    #[arg(long)]
    zoo: PathBuf,
    /// Clean inputs (dataset CSV) to perturb.
    #[arg(long)]
    samples: PathBuf,
    /// Perturbed copies per clean input.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    patch: usize,
    #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
    hi: f64,
    #[arg(long)]
    seed: u64,
    /// Worker threads for per-model feature extraction.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.version {
        println!("topo-trojan {}", env!("CARGO_PKG_VERSION"));
        for (name, v) in topo_trojan::format_versions() {
            println!("{name} v{v}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (see --help)");
        return ExitCode::from(1);
    };
    match commands::run(command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if f.code == 0 => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
