use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Subcommand;
use serde_json::Value;
use topicseg::corpus::{
    apply_filters, filter_report_csv, ingest_headed, make_concatenated, make_concatenated_batch,
    parse_headings, read_jsonl, write_jsonl, ConcatOptions, CorpusDocument, HeadingFormat,
    IngestOptions, Source,
};

use crate::config::RunConfig;
use crate::errors::config_error;

#[derive(Subcommand, Debug)]
pub enum CorpusCommand {
    /// Turn headed articles into corpus documents, one per file.
    Ingest {
        /// Article files, or directories of them (read in name order).
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// wiki or markdown.
        #[arg(long, default_value = "wiki")]
        format: String,
        #[arg(long, default_value = "wiki")]
        source: String,
        /// Heading levels below the top that also start a segment.
        #[arg(long)]
        depth: Option<usize>,
        /// Stored as `meta.category` on every document.
        #[arg(long)]
        category: Option<String>,
    },
    /// Keep documents that pass every rule; report why the rest were dropped.
    Filter {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// CSV with id, kept, reasons.
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        min_segments: Option<usize>,
        #[arg(long)]
        min_segment_words: Option<usize>,
        #[arg(long)]
        max_non_alpha: Option<f64>,
    },
    /// Concatenate segments drawn from different documents.
    Concat {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Segments per output document.
        #[arg(long)]
        segments: usize,
        /// Number of documents to build.
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Draw at most one document per `meta.category`.
        #[arg(long)]
        category_strict: bool,
    },
}

fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|e| e.is_file())
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn ingest_file(
    path: &Path,
    format: HeadingFormat,
    source: Source,
    opts: &IngestOptions,
) -> Result<CorpusDocument> {
    let raw = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let id = path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    );
    ingest_headed(id, source, &parse_headings(&raw, format), opts)
        .with_context(|| format!("ingesting {}", path.display()))
}

fn guard(input: &Path, outputs: &[&Path]) -> Result<()> {
    let canonical = fs::canonicalize(input).ok();
    for o in outputs {
        if canonical.is_some() && fs::canonicalize(o).ok() == canonical {
            return Err(config_error("refusing to overwrite the input corpus"));
        }
    }
    Ok(())
}

pub fn run(cmd: &CorpusCommand, cfg: &RunConfig) -> Result<()> {
    match cmd {
        CorpusCommand::Ingest {
            inputs,
            out,
            format,
            source,
            depth,
            category,
        } => {
            let format: HeadingFormat = format.parse().map_err(config_error)?;
            let source: Source = source.parse().map_err(config_error)?;
            let mut opts = cfg.corpus.ingest;
            if let Some(d) = depth {
                opts.depth = *d;
            }
            let mut docs = Vec::new();
            for path in expand_inputs(inputs)? {
                let mut doc = ingest_file(&path, format, source, &opts)?;
                if let Some(c) = category {
                    doc.meta.insert("category".into(), Value::String(c.clone()));
                }
                docs.push(doc);
            }
            write_jsonl(out, &docs)?;
            eprintln!("ingested {} documents", docs.len());
        }
        CorpusCommand::Filter {
            input,
            out,
            report,
            min_segments,
            min_segment_words,
            max_non_alpha,
        } => {
            guard(input, &[out, report])?;
            let mut rules = cfg.corpus.filter;
            if let Some(v) = min_segments {
                rules.min_segments = *v;
            }
            if let Some(v) = min_segment_words {
                rules.min_segment_words = *v;
            }
            if let Some(v) = max_non_alpha {
                rules.max_non_alpha_ratio = *v;
            }
            let docs = read_jsonl(input)?;
            let decisions: Vec<_> = docs.iter().map(|d| apply_filters(d, &rules)).collect();
            let kept: Vec<CorpusDocument> = docs
                .into_iter()
                .zip(&decisions)
                .filter(|(_, d)| d.kept)
                .map(|(doc, _)| doc)
                .collect();
            write_jsonl(out, &kept)?;
            fs::write(report, filter_report_csv(&decisions))
                .with_context(|| format!("writing {}", report.display()))?;
            eprintln!("kept {}/{} documents", kept.len(), decisions.len());
        }
        CorpusCommand::Concat {
            input,
            out,
            segments,
            count,
            category_strict,
        } => {
            guard(input, &[out])?;
            let pool = read_jsonl(input)?;
            let seed = cfg.seed.unwrap_or(0);
            let opts = ConcatOptions {
                category_strict: *category_strict || cfg.corpus.concat.category_strict,
            };
            let docs = if *count == 1 {
                vec![make_concatenated(&pool, *segments, seed, &opts)?]
            } else {
                make_concatenated_batch(&pool, *count, *segments, seed, &opts)?
            };
            write_jsonl(out, &docs)?;
            eprintln!("built {} documents", docs.len());
        }
    }
    Ok(())
}
