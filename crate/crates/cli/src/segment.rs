use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use topicseg::baselines::{
    graph_segmenter, split_every_k, trough_segmenter, EmbeddingError, EmbeddingProvider,
    HashingEmbedder, PrecomputedEmbeddings, RemoteEmbeddings,
};
use topicseg::corpus::{read_jsonl, CorpusDocument};
use topicseg::gateway::{ChatCompletionsProvider, ChatProvider, MockProvider, UreqTransport};
use topicseg::segmenter::{Pipeline, SegmentFlag, SegmentationTrace};

use crate::config::RunConfig;
use crate::errors::{classify, config_error, DocumentFailures, ExitClass};

#[derive(Args, Debug)]
pub struct SegmentArgs {
    /// Corpus JSONL.
    pub input: PathBuf,
    /// Results JSONL, one record per input document.
    pub output: PathBuf,
    /// llm, split<k> (e.g. split5), trough or graph.
    #[arg(long, default_value = "llm")]
    pub segmenter: String,
    /// Mock script (JSON rule list) or `http` for the configured endpoint.
    #[arg(long, default_value = "http")]
    pub provider: String,
    /// hashing, http, or a vectors file.
    #[arg(long)]
    pub embeddings: Option<String>,
    /// Include prompt transcripts in the results.
    #[arg(long)]
    pub trace: bool,
    /// Similarity series of the trough segmenter, as JSONL.
    #[arg(long)]
    pub series_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmenterKind {
    Llm,
    Split(usize),
    Trough,
    Graph,
}

impl FromStr for SegmenterKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "llm" => Ok(Self::Llm),
            "trough" => Ok(Self::Trough),
            "graph" => Ok(Self::Graph),
            _ => match s.strip_prefix("split").map(str::parse::<usize>) {
                Some(Ok(k)) if k > 0 => Ok(Self::Split(k)),
                _ => Err(format!(
                    "unknown segmenter {s:?}; expected llm, split<k>, trough or graph"
                )),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordError {
    pub class: String,
    pub message: String,
}

/// One line of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub doc_id: String,
    pub segmenter: String,
    pub num_sentences: usize,
    pub boundaries: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<SegmentFlag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<SegmentationTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<RecordError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub doc_id: String,
    pub threshold: f64,
    pub values: Vec<f64>,
    pub boundaries: Vec<usize>,
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).with_context(|| format!("{} line {}", path.display(), i + 1))
        })
        .collect()
}

fn build_embedder(
    cfg: &RunConfig,
    flag: Option<&str>,
    default_hashing: bool,
) -> Result<Option<Box<dyn EmbeddingProvider>>> {
    let source = flag
        .map(str::to_string)
        .or_else(|| cfg.embeddings.source.clone())
        .or_else(|| default_hashing.then(|| "hashing".to_string()));
    let Some(source) = source else {
        return Ok(None);
    };
    let e: Box<dyn EmbeddingProvider> = match source.as_str() {
        "hashing" => Box::new(HashingEmbedder {
            dimension: cfg.embeddings.dimension,
        }),
        "http" => Box::new(
            RemoteEmbeddings::new(
                cfg.embeddings.provider.clone(),
                cfg.embeddings.dimension,
                UreqTransport,
            )
            .context("embedding provider")?,
        ),
        path => Box::new(
            PrecomputedEmbeddings::from_path(path)
                .map_err(|e| config_error(format!("embeddings {path}: {e}")))?,
        ),
    };
    Ok(Some(e))
}

fn build_provider(cfg: &RunConfig, choice: &str) -> Result<Box<dyn ChatProvider>> {
    if choice == "http" {
        let p =
            ChatCompletionsProvider::from_config(cfg.provider.clone()).context("chat provider")?;
        Ok(Box::new(p))
    } else {
        Ok(Box::new(
            MockProvider::from_file(choice).context("mock provider")?,
        ))
    }
}

struct Job<'a> {
    cfg: &'a RunConfig,
    kind: SegmenterKind,
    name: &'a str,
    provider: Option<Box<dyn ChatProvider>>,
    embedder: Option<Box<dyn EmbeddingProvider>>,
    trace: bool,
}

struct Outcome {
    record: ResultRecord,
    series: Option<SeriesRecord>,
    failure: Option<ExitClass>,
}

fn embed(
    ctx: &Job,
    doc: &CorpusDocument,
    sentences: &[&str],
) -> Result<Vec<Vec<f32>>, EmbeddingError> {
    ctx.embedder
        .as_ref()
        .expect("embedder built for this segmenter")
        .embed_document(&doc.id, sentences)
}

fn segment_one(ctx: &Job, doc: &CorpusDocument) -> Result<(ResultRecord, Option<SeriesRecord>)> {
    let index = doc.sentences();
    let sentences: Vec<&str> = index.sentences().collect();
    let mut record = ResultRecord {
        doc_id: doc.id.clone(),
        segmenter: ctx.name.to_string(),
        num_sentences: index.count(),
        boundaries: Vec::new(),
        flags: Vec::new(),
        trace: None,
        error: None,
    };
    let mut series = None;
    match ctx.kind {
        SegmenterKind::Split(k) => {
            record.boundaries = split_every_k(index.count(), k).boundaries().to_vec();
        }
        SegmenterKind::Graph => {
            let e = embed(ctx, doc, &sentences)?;
            record.boundaries = graph_segmenter(&e, &ctx.cfg.baselines.graph)?
                .boundaries()
                .to_vec();
        }
        SegmenterKind::Trough => {
            let e = embed(ctx, doc, &sentences)?;
            let params = &ctx.cfg.baselines.trough;
            let (seg, s) = trough_segmenter(&index, &e, params)?;
            record.boundaries = seg.boundaries().to_vec();
            series = Some(SeriesRecord {
                doc_id: doc.id.clone(),
                threshold: params.threshold,
                values: s.values,
                boundaries: record.boundaries.clone(),
            });
        }
        SegmenterKind::Llm => {
            let provider = ctx.provider.as_deref().expect("provider built for llm");
            let vectors = match ctx.embedder {
                Some(_) => Some(embed(ctx, doc, &sentences)?),
                None => None,
            };
            let mut pipeline = Pipeline::new(&ctx.cfg.segmenter, provider);
            if let Some(v) = &vectors {
                pipeline = pipeline.with_embeddings(v);
            }
            let out = pipeline.run(&index)?;
            record.boundaries = out.segmentation.boundaries().to_vec();
            record.flags = out.flags;
            if ctx.trace {
                record.trace = Some(out.trace);
            }
        }
    }
    Ok((record, series))
}

fn process(ctx: &Job, doc: &CorpusDocument) -> Outcome {
    match segment_one(ctx, doc) {
        Ok((record, series)) => Outcome {
            record,
            series,
            failure: None,
        },
        Err(e) => {
            let class = classify(&e);
            Outcome {
                record: ResultRecord {
                    doc_id: doc.id.clone(),
                    segmenter: ctx.name.to_string(),
                    num_sentences: doc.reference.num_sentences(),
                    boundaries: Vec::new(),
                    flags: Vec::new(),
                    trace: None,
                    error: Some(RecordError {
                        class: class.name().to_string(),
                        message: format!("{e:#}"),
                    }),
                },
                series: None,
                failure: Some(class),
            }
        }
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}

fn to_lines<T: Serialize>(items: impl Iterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("records serialise"));
        out.push('\n');
    }
    out
}

pub fn run(args: &SegmentArgs, cfg: &RunConfig) -> Result<()> {
    let kind: SegmenterKind = args.segmenter.parse().map_err(config_error)?;
    if same_file(&args.input, &args.output)
        || args
            .series_out
            .as_deref()
            .is_some_and(|s| same_file(&args.input, s))
    {
        return Err(config_error("refusing to overwrite the input corpus"));
    }
    if args.series_out.is_some() && kind != SegmenterKind::Trough {
        return Err(config_error("--series-out needs --segmenter trough"));
    }
    // Everything that can fail on configuration is resolved before the
    // first request.
    let provider = match kind {
        SegmenterKind::Llm => Some(build_provider(cfg, &args.provider)?),
        _ => None,
    };
    let embedder = match kind {
        SegmenterKind::Trough | SegmenterKind::Graph => {
            build_embedder(cfg, args.embeddings.as_deref(), true)?
        }
        SegmenterKind::Llm => build_embedder(cfg, args.embeddings.as_deref(), false)?,
        SegmenterKind::Split(_) => None,
    };
    let docs =
        read_jsonl(&args.input).with_context(|| format!("reading {}", args.input.display()))?;

    let ctx = Job {
        cfg,
        kind,
        name: &args.segmenter,
        provider,
        embedder,
        trace: args.trace,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .context("worker pool")?;
    let outcomes: Vec<Outcome> =
        pool.install(|| docs.par_iter().map(|d| process(&ctx, d)).collect());

    fs::write(&args.output, to_lines(outcomes.iter().map(|o| &o.record)))
        .with_context(|| format!("writing {}", args.output.display()))?;
    if let Some(path) = &args.series_out {
        fs::write(
            path,
            to_lines(outcomes.iter().filter_map(|o| o.series.as_ref())),
        )
        .with_context(|| format!("writing {}", path.display()))?;
    }

    let failures: Vec<(&str, ExitClass)> = outcomes
        .iter()
        .filter_map(|o| o.failure.map(|c| (o.record.doc_id.as_str(), c)))
        .collect();
    let mut stderr = std::io::stderr().lock();
    for (id, _) in &failures {
        let _ = writeln!(stderr, "failed: {id}");
    }
    let _ = writeln!(
        stderr,
        "segmented {}/{} documents with {}",
        docs.len() - failures.len(),
        docs.len(),
        args.segmenter
    );
    match failures.iter().map(|&(_, c)| c).max() {
        None => Ok(()),
        Some(class) => Err(DocumentFailures {
            failed: failures.len(),
            total: docs.len(),
            class,
        }
        .into()),
    }
}
