use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use topicseg::corpus::{read_jsonl, CorpusDocument};
use topicseg::metrics::{DocumentScores, EvalReport, MatchConfig, MetricMeans, ReportTable};
use topicseg::text::Segmentation;

use crate::config::RunConfig;
use crate::errors::{config_error, IdMismatch};
use crate::segment::{read_results, ResultRecord};

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Reference corpus as DATASET=PATH; a bare PATH is named after its file stem.
    #[arg(long = "ref", required = true)]
    pub references: Vec<String>,
    /// Results files written by `segment`.
    #[arg(required = true)]
    pub results: Vec<PathBuf>,
    /// Directory for per_document.csv, report.csv, report.txt and report.json.
    #[arg(long)]
    pub out: PathBuf,
}

struct Dataset {
    name: String,
    docs: Vec<CorpusDocument>,
}

impl Dataset {
    fn ids(&self) -> BTreeSet<&str> {
        self.docs.iter().map(|d| d.id.as_str()).collect()
    }
}

/// Means only, for plotting.
#[derive(Debug, Serialize)]
pub struct ReportSummary<'a> {
    pub segmenter: &'a str,
    pub dataset: &'a str,
    pub means: MetricMeans,
}

fn parse_reference(arg: &str) -> (String, PathBuf) {
    match arg.split_once('=') {
        Some((name, path)) if !name.is_empty() => (name.to_string(), PathBuf::from(path)),
        _ => {
            let path = PathBuf::from(arg);
            let name = path
                .file_stem()
                .map_or_else(|| arg.to_string(), |s| s.to_string_lossy().into_owned());
            (name, path)
        }
    }
}

/// The reference whose id set equals the results' id set. Failed documents
/// count as missing.
fn match_dataset<'a>(
    datasets: &'a [Dataset],
    results_path: &Path,
    records: &[ResultRecord],
) -> Result<&'a Dataset> {
    let ids: BTreeSet<&str> = records
        .iter()
        .filter(|r| r.error.is_none())
        .map(|r| r.doc_id.as_str())
        .collect();
    if let Some(d) = datasets.iter().find(|d| d.ids() == ids) {
        return Ok(d);
    }
    let closest = datasets
        .iter()
        .max_by_key(|d| {
            (
                d.ids().intersection(&ids).count(),
                std::cmp::Reverse(d.docs.len()),
            )
        })
        .expect("at least one reference");
    let reference = closest.ids();
    Err(IdMismatch {
        hyp: results_path.display().to_string(),
        missing: reference.difference(&ids).map(|s| s.to_string()).collect(),
        unexpected: ids.difference(&reference).map(|s| s.to_string()).collect(),
    }
    .into())
}

fn score(
    dataset: &Dataset,
    records: &[ResultRecord],
    cfg: &RunConfig,
) -> Result<Vec<DocumentScores>> {
    let by_id: BTreeMap<&str, &ResultRecord> =
        records.iter().map(|r| (r.doc_id.as_str(), r)).collect();
    let mcfg = MatchConfig { n: cfg.metrics.n };
    dataset
        .docs
        .iter()
        .map(|doc| {
            let r = by_id[doc.id.as_str()];
            let s = doc.reference.num_sentences();
            if r.num_sentences != s {
                return Err(config_error(format!(
                    "{}: results have {} sentences, reference has {s}",
                    doc.id, r.num_sentences
                )));
            }
            let hyp = Segmentation::new(s, r.boundaries.clone())
                .map_err(|e| config_error(format!("{}: {e}", doc.id)))?;
            Ok(DocumentScores::evaluate(
                &doc.id,
                &hyp,
                &doc.reference,
                &mcfg,
                cfg.metrics.k,
            )?)
        })
        .collect()
}

fn segmenter_name(path: &Path, records: &[ResultRecord]) -> Result<String> {
    let names: BTreeSet<&str> = records.iter().map(|r| r.segmenter.as_str()).collect();
    match names.len() {
        1 => Ok(names.into_iter().next().unwrap().to_string()),
        0 => Err(config_error(format!("{}: no records", path.display()))),
        _ => Err(config_error(format!(
            "{}: mixes segmenters {}",
            path.display(),
            names.into_iter().collect::<Vec<_>>().join(", ")
        ))),
    }
}

pub fn build_reports(
    references: &[(String, PathBuf)],
    results: &[PathBuf],
    cfg: &RunConfig,
) -> Result<Vec<EvalReport>> {
    let datasets: Vec<Dataset> = references
        .iter()
        .map(|(name, path)| {
            let docs = read_jsonl(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(Dataset {
                name: name.clone(),
                docs,
            })
        })
        .collect::<Result<_>>()?;
    let mut seen = BTreeSet::new();
    let mut reports = Vec::new();
    for path in results {
        let records = read_results(path)?;
        let segmenter = segmenter_name(path, &records)?;
        let dataset = match_dataset(&datasets, path, &records)?;
        if !seen.insert((segmenter.clone(), dataset.name.clone())) {
            return Err(config_error(format!(
                "{} repeats segmenter {segmenter} on dataset {}",
                path.display(),
                dataset.name
            )));
        }
        let scores = score(dataset, &records, cfg)?;
        reports.push(
            EvalReport::new(&segmenter, &dataset.name, scores)
                .map_err(|e| config_error(format!("{}: {e}", dataset.name)))?,
        );
    }
    Ok(reports)
}

pub fn write_reports(out: &Path, reports: &[EvalReport]) -> Result<String> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut per_doc = String::new();
    let mut table = ReportTable::default();
    for (i, r) in reports.iter().enumerate() {
        let csv = r.per_document_csv();
        per_doc.push_str(if i == 0 {
            &csv
        } else {
            csv.split_once('\n').map_or("", |(_, rest)| rest)
        });
        table.push(r);
    }
    let summary: Vec<ReportSummary> = reports
        .iter()
        .map(|r| ReportSummary {
            segmenter: &r.segmenter,
            dataset: &r.dataset,
            means: r.means,
        })
        .collect();
    let text = table.render_text();
    let write = |name: &str, content: &str| {
        let p = out.join(name);
        fs::write(&p, content).with_context(|| format!("writing {}", p.display()))
    };
    write("per_document.csv", &per_doc)?;
    write("report.csv", &table.to_csv())?;
    write("report.txt", &text)?;
    write(
        "report.json",
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    Ok(text)
}

pub fn run(args: &EvaluateArgs, cfg: &RunConfig) -> Result<()> {
    let references: Vec<(String, PathBuf)> =
        args.references.iter().map(|s| parse_reference(s)).collect();
    let names: BTreeSet<&str> = references.iter().map(|(n, _)| n.as_str()).collect();
    if names.len() != references.len() {
        return Err(config_error("reference dataset names must be distinct"));
    }
    let reports = build_reports(&references, &args.results, cfg)?;
    let text = write_reports(&args.out, &reports)?;
    print!("{text}");
    Ok(())
}
