//! Thin command-line front end over the experiment runners.
//!
//! All real work lives in the library (`kakeya_lab::lab`); this binary
//! parses flags, folds them over an optional configuration file, runs one
//! command, prints its summary, and maps failures to exit codes: 0 on
//! success, 1 when check mode finds a violation, 2 on errors.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use kakeya_lab::lab::{self, Command, ExperimentConfig, LabError};

#[derive(Parser)]
#[command(
    name = "kakeya-lab",
    version,
    about = "Experiments on dyadic direction trees, sticky maps, and random parallelogram unions"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Splitting values, lacunary value, and separation of a tree.
    TreeInfo(CommonArgs),
    /// Prune a family tree to uniform splitting order.
    Prune(CommonArgs),
    /// Sample a sticky map and render its parallelogram union as SVG.
    Ksigma(CommonArgs),
    /// Exact and Monte-Carlo strip measures of a sampled union.
    Measure(CommonArgs),
    /// Membership probability scan over a vertical grid of points.
    Prob(CommonArgs),
    /// Coarsened choice tree and its percolation survival at a point.
    Gtree(CommonArgs),
    /// Critical survival probabilities on the full binary tree.
    Percolation(CommonArgs),
    /// Verify the forced-hit construction: every sticky map covers the point.
    Counterexample(CommonArgs),
    /// Separation eta_max across the orders of a family.
    SeparationScan(CommonArgs),
    /// Strip-measure scaling statistics over many sticky maps.
    LemmaScaling(CommonArgs),
}

impl CliCommand {
    fn split(self) -> (Command, CommonArgs) {
        match self {
            CliCommand::TreeInfo(a) => (Command::TreeInfo, a),
            CliCommand::Prune(a) => (Command::Prune, a),
            CliCommand::Ksigma(a) => (Command::Ksigma, a),
            CliCommand::Measure(a) => (Command::Measure, a),
            CliCommand::Prob(a) => (Command::Prob, a),
            CliCommand::Gtree(a) => (Command::Gtree, a),
            CliCommand::Percolation(a) => (Command::Percolation, a),
            CliCommand::Counterexample(a) => (Command::Counterexample, a),
            CliCommand::SeparationScan(a) => (Command::SeparationScan, a),
            CliCommand::LemmaScaling(a) => (Command::LemmaScaling, a),
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file with one key=value per line (# for comments).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Direction family: quarter-cantor, tournament, or vanishing.
    #[arg(long)]
    family: Option<String>,
    /// Order or inclusive order range, e.g. 3 or 2..5.
    #[arg(long = "N")]
    n: Option<String>,
    /// Tree depth (required with explicit directions).
    #[arg(long)]
    depth: Option<String>,
    /// Separation parameter as a dyadic, e.g. 1/2^1.
    #[arg(long)]
    eta: Option<String>,
    /// Monte-Carlo sample count.
    #[arg(long)]
    samples: Option<String>,
    /// Base seed for all deterministic sampling.
    #[arg(long)]
    seed: Option<String>,
    /// Vertical strip as x0..x1 with dyadic endpoints.
    #[arg(long)]
    strip: Option<String>,
    /// Directory for CSV/JSON/SVG artifacts; nothing is written without it.
    #[arg(long)]
    out: Option<String>,
    /// Judge results against the built-in thresholds; exit 1 on violation.
    #[arg(long)]
    check: bool,
    /// Cap on exact enumeration size.
    #[arg(long = "cap-enum")]
    cap_enum: Option<String>,
    /// Cap on generated tree depth.
    #[arg(long = "cap-depth")]
    cap_depth: Option<String>,
    /// Extra overrides as KEY=VALUE (directions, x, y, grid, draws).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn build_config(args: &CommonArgs) -> Result<ExperimentConfig, LabError> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    let overrides = [
        ("family", &args.family),
        ("N", &args.n),
        ("depth", &args.depth),
        ("eta", &args.eta),
        ("samples", &args.samples),
        ("seed", &args.seed),
        ("strip", &args.strip),
        ("out", &args.out),
        ("cap-enum", &args.cap_enum),
        ("cap-depth", &args.cap_depth),
    ];
    for (key, value) in overrides {
        if let Some(value) = value {
            config.apply(key, value)?;
        }
    }
    for pair in &args.set {
        let Some((key, value)) = pair.split_once('=') else {
            return Err(LabError::Config(format!(
                "--set expects KEY=VALUE, got {pair:?}"
            )));
        };
        config.apply(key.trim(), value.trim())?;
    }
    if args.check {
        config.check = true;
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<u8, LabError> {
    let (command, args) = cli.command.split();
    let config = build_config(&args)?;
    let summary = lab::run(command, &config)?;
    for line in &summary.lines {
        println!("{line}");
    }
    for path in &summary.artifacts {
        println!("wrote {}", path.display());
    }
    if summary.check_failures.is_empty() {
        Ok(0)
    } else {
        for failure in &summary.check_failures {
            eprintln!("check failed: {failure}");
        }
        Ok(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(2)
        }
    }
}
