use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    match_boundaries, pk, precision_recall_from_matching, similarity_from_matching, window_diff,
    MatchConfig, MetricError,
};
use crate::text::Segmentation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentScores {
    pub doc_id: String,
    pub b: f64,
    pub bp: f64,
    pub br: f64,
    pub pk: f64,
    pub wd: f64,
    /// Hypothesis and reference both have no boundaries; B/BP/BR are 1 by
    /// convention.
    pub both_empty: bool,
}

impl DocumentScores {
    /// Pk and WindowDiff are reported as 0 for single-sentence documents.
    pub fn evaluate(
        doc_id: impl Into<String>,
        hyp: &Segmentation,
        reference: &Segmentation,
        cfg: &MatchConfig,
        k: Option<usize>,
    ) -> Result<Self, MetricError> {
        let m = match_boundaries(hyp, reference, cfg)?;
        let (bp, br) = precision_recall_from_matching(&m);
        let (pk, wd) = if reference.num_sentences() < 2 {
            (0.0, 0.0)
        } else {
            (pk(hyp, reference, k)?, window_diff(hyp, reference, k)?)
        };
        Ok(Self {
            doc_id: doc_id.into(),
            b: similarity_from_matching(&m),
            bp,
            br,
            pk,
            wd,
            both_empty: hyp.boundaries().is_empty() && reference.boundaries().is_empty(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricMeans {
    pub documents: usize,
    pub b: f64,
    pub bp: f64,
    pub br: f64,
    pub pk: f64,
    pub wd: f64,
    pub both_empty: usize,
}

/// Unweighted mean over documents.
pub fn aggregate(docs: &[DocumentScores]) -> Result<MetricMeans, MetricError> {
    if docs.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let n = docs.len() as f64;
    let mean = |f: fn(&DocumentScores) -> f64| docs.iter().map(f).sum::<f64>() / n;
    Ok(MetricMeans {
        documents: docs.len(),
        b: mean(|d| d.b),
        bp: mean(|d| d.bp),
        br: mean(|d| d.br),
        pk: mean(|d| d.pk),
        wd: mean(|d| d.wd),
        both_empty: docs.iter().filter(|d| d.both_empty).count(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub segmenter: String,
    pub dataset: String,
    pub documents: Vec<DocumentScores>,
    pub means: MetricMeans,
}

impl EvalReport {
    pub fn new(
        segmenter: impl Into<String>,
        dataset: impl Into<String>,
        documents: Vec<DocumentScores>,
    ) -> Result<Self, MetricError> {
        let means = aggregate(&documents)?;
        Ok(Self {
            segmenter: segmenter.into(),
            dataset: dataset.into(),
            documents,
            means,
        })
    }

    pub fn per_document_csv(&self) -> String {
        let mut out = String::from("segmenter,dataset,doc_id,B,BP,BR,Pk,WD,both_empty\n");
        for d in &self.documents {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                csv_field(&self.segmenter),
                csv_field(&self.dataset),
                csv_field(&d.doc_id),
                d.b,
                d.bp,
                d.br,
                d.pk,
                d.wd,
                d.both_empty
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub segmenter: String,
    pub dataset: String,
    pub means: MetricMeans,
}

/// Segmenters as rows, one column group of metrics per dataset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
}

const METRICS: [&str; 5] = ["B", "BP", "BR", "Pk", "WD"];

impl ReportTable {
    pub fn push(&mut self, report: &EvalReport) {
        self.rows.push(ReportRow {
            segmenter: report.segmenter.clone(),
            dataset: report.dataset.clone(),
            means: report.means,
        });
    }

    fn ordered(&self, key: fn(&ReportRow) -> &str) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for r in &self.rows {
            let k = key(r);
            if seen.insert(k) {
                out.push(k);
            }
        }
        out
    }

    fn lookup(&self, segmenter: &str, dataset: &str) -> Option<&MetricMeans> {
        self.rows
            .iter()
            .find(|r| r.segmenter == segmenter && r.dataset == dataset)
            .map(|r| &r.means)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("segmenter,dataset,documents,B,BP,BR,Pk,WD\n");
        for r in &self.rows {
            let m = &r.means;
            let _ = writeln!(
                out,
                "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4}",
                csv_field(&r.segmenter),
                csv_field(&r.dataset),
                m.documents,
                m.b,
                m.bp,
                m.br,
                m.pk,
                m.wd
            );
        }
        out
    }

    /// Aligned plain-text table.
    pub fn render_text(&self) -> String {
        let segmenters = self.ordered(|r| r.segmenter.as_str());
        let datasets = self.ordered(|r| r.dataset.as_str());
        let name_w = segmenters.iter().map(|s| s.len()).max().unwrap_or(0).max(9);
        let cell = 6;
        let group_w = METRICS.len() * (cell + 1) - 1;

        let mut out = String::new();
        let _ = write!(out, "{:name_w$}", "");
        for d in &datasets {
            let _ = write!(out, " | {d:^group_w$}");
        }
        out.push('\n');
        let _ = write!(out, "{:name_w$}", "segmenter");
        for _ in &datasets {
            out.push_str(" |");
            for m in METRICS {
                let _ = write!(out, " {m:>cell$}");
            }
        }
        out.push('\n');
        out.push_str(&"-".repeat(name_w));
        for _ in &datasets {
            let _ = write!(out, "-+{}", "-".repeat(group_w + 1));
        }
        out.push('\n');
        for s in &segmenters {
            let _ = write!(out, "{s:name_w$}");
            for d in &datasets {
                out.push_str(" |");
                match self.lookup(s, d) {
                    Some(m) => {
                        for v in [m.b, m.bp, m.br, m.pk, m.wd] {
                            let _ = write!(out, " {v:>cell$.2}");
                        }
                    }
                    None => {
                        for _ in METRICS {
                            let _ = write!(out, " {:>cell$}", "-");
                        }
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}
