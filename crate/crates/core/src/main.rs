//! Command-line front end: run the experiment matrix over a corpus, generate
//! a synthetic corpus, or re-render a finished run's artifacts.
//!
//! Exit codes: 0 on success, 1 when a cell or I/O step fails, 2 for
//! configuration and usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use daysift::dataset::synth::{generate, SyntheticConfig};
use daysift::dataset::write_corpus;
use daysift::runner::{run_experiments, write_outputs, Method, RunConfig, RunManifest};
use daysift::{Error, FeatureMode, Result};

#[derive(Parser)]
#[command(
    name = "daysift",
    version,
    about = "Detects non-routine days in egocentric photo-stream feature data"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every configured (method, feature-mode) detector cell per user
    /// and write results.csv, manifest.json and plots/.
    Run(RunArgs),
    /// Generate a synthetic study corpus.
    Synth(SynthArgs),
    /// Re-render results.csv and plots from an existing run's manifest.
    Report(ReportArgs),
}

/// Every config-file key has a matching override flag.
#[derive(Args)]
struct RunArgs {
    /// Run configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Corpus directory (replaces the config's data source).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Expected fraction of non-routine days, in (0, 0.5].
    #[arg(long)]
    contamination: Option<f64>,
    /// Detectors to run (comma-separated: robust-covariance, one-class-svm,
    /// dbscan, spectral, isolation-forest).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Feature modes to run (comma-separated: act, glo, act-glo).
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<FeatureMode>>,
    /// Force per-user z-scoring on (true) or off (false) for every mode.
    #[arg(long)]
    standardize: Option<bool>,
    /// Trees per isolation forest.
    #[arg(long)]
    n_trees: Option<usize>,
    /// Days subsampled per tree.
    #[arg(long)]
    subsample_size: Option<usize>,
    /// DBSCAN density threshold.
    #[arg(long)]
    min_pts: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory to write the corpus into.
    #[arg(long)]
    out: PathBuf,
    /// Override the generator seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directory containing manifest.json.
    #[arg(long = "in")]
    in_dir: PathBuf,
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut cfg = RunConfig::from_toml(&read_config(&args.config)?)?;
    if let Some(corpus) = args.corpus {
        cfg.corpus = Some(corpus);
        cfg.synth = None;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if let Some(c) = args.contamination {
        cfg.contamination = c;
    }
    if let Some(methods) = args.methods {
        cfg.methods = methods;
    }
    if let Some(modes) = args.modes {
        cfg.modes = modes;
    }
    if args.standardize.is_some() {
        cfg.standardize = args.standardize;
    }
    if let Some(n) = args.n_trees {
        cfg.n_trees = n;
    }
    if let Some(n) = args.subsample_size {
        cfg.subsample_size = n;
    }
    if let Some(n) = args.min_pts {
        cfg.min_pts = n;
    }

    let config_dir = args.config.parent().unwrap_or(Path::new("."));
    let dataset = cfg.load_dataset(config_dir)?;
    let mut manifest = run_experiments(&dataset, &cfg.options())?;
    write_outputs(&cfg.out, &mut manifest)?;
    print!("{}", manifest.render_results_csv());
    eprintln!(
        "wrote {} artifacts to {}",
        manifest.artifacts.len(),
        cfg.out.display()
    );

    let failed = manifest.failed_cells();
    if !failed.is_empty() {
        for cell in &failed {
            eprintln!(
                "cell {}/{}/{} failed: {}",
                cell.user,
                cell.method,
                cell.mode,
                cell.error.as_deref().unwrap_or("unknown")
            );
        }
        return Err(Error::InvalidInput(format!(
            "{} of {} cells failed",
            failed.len(),
            manifest.cells.len()
        )));
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let mut cfg: SyntheticConfig = toml::from_str(&read_config(&args.config)?)
        .map_err(|e| Error::Config(e.to_string()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let dataset = generate(&cfg)?;
    write_corpus(&args.out, &dataset)?;
    eprintln!(
        "wrote {} users / {} days to {}",
        dataset.users.len(),
        dataset.n_days(),
        args.out.display()
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let path = args.in_dir.join("manifest.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let mut manifest = RunManifest::from_json(&text)?;
    write_outputs(&args.in_dir, &mut manifest)?;
    print!("{}", manifest.render_results_csv());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Synth(args) => cmd_synth(args),
        Cmd::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
