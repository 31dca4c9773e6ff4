mod config;
mod corpus_cmd;
mod errors;
mod evaluate;
mod plot;
mod segment;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "topicseg",
    version,
    about = "Topic segmentation, corpus building and evaluation"
)]
struct Cli {
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment every document of a corpus.
    Segment(segment::SegmentArgs),
    /// Score results files against reference corpora.
    Evaluate(evaluate::EvaluateArgs),
    /// Build and clean corpora.
    #[command(subcommand)]
    Corpus(corpus_cmd::CorpusCommand),
    /// Render SVG plots.
    #[command(subcommand)]
    Plot(plot::PlotCommand),
}

/// Flags that override the config file.
#[derive(Args, Debug, Default, Clone)]
pub struct Settings {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; documents are processed in parallel.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Boundary match distance.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Pk / WindowDiff probe width.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub min_words: Option<usize>,
    #[arg(long, global = true)]
    pub max_words: Option<usize>,
    /// Token budget of one prompt window.
    #[arg(long, global = true)]
    pub window_budget: Option<usize>,
    #[arg(long, global = true)]
    pub overlap: Option<usize>,
}

impl Settings {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        if let Some(j) = self.jobs {
            cfg.jobs = Some(j);
        }
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(n) = self.n {
            cfg.metrics.n = n;
        }
        if let Some(k) = self.k {
            cfg.metrics.k = Some(k);
        }
        if let Some(w) = self.min_words {
            cfg.segmenter.min_segment_words = w;
            cfg.baselines.trough.min_words = w;
        }
        if let Some(w) = self.max_words {
            cfg.segmenter.max_segment_words = w;
            cfg.baselines.trough.max_words = w;
        }
        if let Some(w) = self.window_budget {
            cfg.segmenter.window.window_budget = w;
        }
        if let Some(o) = self.overlap {
            cfg.segmenter.window.overlap = o;
        }
        cfg.check()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Segment(args) => segment::run(&args, &cli.settings.resolve()?),
        Command::Evaluate(args) => evaluate::run(&args, &cli.settings.resolve()?),
        Command::Corpus(cmd) => corpus_cmd::run(&cmd, &cli.settings.resolve()?),
        Command::Plot(cmd) => plot::run(&cmd),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(errors::classify(&e) as u8)
        }
    }
}
