use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Subcommand;
use serde::Deserialize;
use topicseg::metrics::MetricMeans;

use crate::segment::SeriesRecord;
use crate::svg;

#[derive(Subcommand, Debug)]
pub enum PlotCommand {
    /// Similarity series written by `segment --series-out`.
    Series {
        input: PathBuf,
        output: PathBuf,
        /// Document to plot; defaults to the first record.
        #[arg(long)]
        doc: Option<String>,
    },
    /// Boundary similarity per segmenter from an evaluate report.json.
    Report { input: PathBuf, output: PathBuf },
}

#[derive(Debug)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error: {}", self.0)
    }
}

impl std::error::Error for ParseError {}

#[derive(Deserialize)]
struct Summary {
    segmenter: String,
    dataset: String,
    means: MetricMeans,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn series_svg(text: &str, doc: Option<&str>) -> Result<String, ParseError> {
    let mut first = None;
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let r: SeriesRecord =
            serde_json::from_str(line).map_err(|e| ParseError(format!("line {}: {e}", i + 1)))?;
        if doc.is_none_or(|d| d == r.doc_id) {
            first = Some(r);
            break;
        }
    }
    let r = first.ok_or_else(|| match doc {
        Some(d) => ParseError(format!("no series for document {d}")),
        None => ParseError("no series records".into()),
    })?;
    if r.values.is_empty() {
        return Err(ParseError(format!("series for {} is empty", r.doc_id)));
    }
    Ok(svg::series_plot(
        &r.doc_id,
        &r.values,
        r.threshold,
        &r.boundaries,
    ))
}

pub fn report_svg(text: &str) -> Result<String, ParseError> {
    let rows: Vec<Summary> = serde_json::from_str(text).map_err(|e| ParseError(e.to_string()))?;
    if rows.is_empty() {
        return Err(ParseError("report has no rows".into()));
    }
    let mut datasets: Vec<String> = Vec::new();
    let mut segmenters: Vec<String> = Vec::new();
    for r in &rows {
        if !datasets.contains(&r.dataset) {
            datasets.push(r.dataset.clone());
        }
        if !segmenters.contains(&r.segmenter) {
            segmenters.push(r.segmenter.clone());
        }
    }
    let mut values = vec![vec![None; datasets.len()]; segmenters.len()];
    for r in &rows {
        let s = segmenters.iter().position(|x| *x == r.segmenter).unwrap();
        let d = datasets.iter().position(|x| *x == r.dataset).unwrap();
        values[s][d] = Some(r.means.b);
    }
    Ok(svg::grouped_bars(
        "Boundary similarity (B)",
        &datasets,
        &segmenters,
        &values,
    ))
}

pub fn run(cmd: &PlotCommand) -> Result<()> {
    let (output, svg) = match cmd {
        PlotCommand::Series { input, output, doc } => {
            (output, series_svg(&read(input)?, doc.as_deref())?)
        }
        PlotCommand::Report { input, output } => (output, report_svg(&read(input)?)?),
    };
    fs::write(output, svg).with_context(|| format!("writing {}", output.display()))
}
