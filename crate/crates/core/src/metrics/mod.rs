//! Segmentation evaluation.
//!
//! Boundaries of a hypothesis and a reference are paired one-to-one,
//! without crossings, when they lie fewer than `n` positions apart. A pair
//! at distance `d` scores `1 - d/n`. Among all such matchings the matcher
//! picks the one with the highest total score, and among those the one with
//! the most pairs. Scores are kept as integers `n - d` internally so that
//! totals are exact.

mod report;

pub use report::{aggregate, DocumentScores, EvalReport, MetricMeans, ReportRow, ReportTable};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::Segmentation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("hypothesis has {hyp} sentences but reference has {reference}")]
    SentenceCountMismatch { hyp: usize, reference: usize },
    #[error("Pk and WindowDiff need at least two sentences")]
    TooShort,
    #[error("nothing to aggregate")]
    EmptyInput,
    #[error("match distance n must be at least 1")]
    InvalidN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchConfig {
    pub n: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self { n: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryPair {
    pub hyp: usize,
    pub reference: usize,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryMatching {
    pub n: usize,
    pub pairs: Vec<BoundaryPair>,
    pub unmatched_hyp: Vec<usize>,
    pub unmatched_ref: Vec<usize>,
}

impl BoundaryMatching {
    /// Total pair score in units of `1/n`.
    pub fn score_units(&self) -> usize {
        self.pairs.iter().map(|p| self.n - p.distance).sum()
    }

    pub fn total_score(&self) -> f64 {
        self.score_units() as f64 / self.n as f64
    }

    pub fn num_hyp(&self) -> usize {
        self.pairs.len() + self.unmatched_hyp.len()
    }

    pub fn num_ref(&self) -> usize {
        self.pairs.len() + self.unmatched_ref.len()
    }
}

fn check_counts(hyp: &Segmentation, reference: &Segmentation) -> Result<(), MetricError> {
    if hyp.num_sentences() != reference.num_sentences() {
        return Err(MetricError::SentenceCountMismatch {
            hyp: hyp.num_sentences(),
            reference: reference.num_sentences(),
        });
    }
    Ok(())
}

/// Optimal non-crossing matching by dynamic programming over the two
/// sorted boundary lists.
pub fn match_boundaries(
    hyp: &Segmentation,
    reference: &Segmentation,
    cfg: &MatchConfig,
) -> Result<BoundaryMatching, MetricError> {
    check_counts(hyp, reference)?;
    if cfg.n == 0 {
        return Err(MetricError::InvalidN);
    }
    let (h, r, n) = (hyp.boundaries(), reference.boundaries(), cfg.n);
    // best[i][j] = (score units, pairs) over the suffixes h[i..], r[j..]
    let mut best = vec![vec![(0usize, 0usize); r.len() + 1]; h.len() + 1];
    for i in (0..h.len()).rev() {
        for j in (0..r.len()).rev() {
            let mut v = best[i + 1][j].max(best[i][j + 1]);
            let d = h[i].abs_diff(r[j]);
            if d < n {
                let (s, p) = best[i + 1][j + 1];
                v = v.max((s + n - d, p + 1));
            }
            best[i][j] = v;
        }
    }

    let (mut i, mut j) = (0, 0);
    let mut m = BoundaryMatching {
        n,
        pairs: Vec::new(),
        unmatched_hyp: Vec::new(),
        unmatched_ref: Vec::new(),
    };
    while i < h.len() && j < r.len() {
        let d = h[i].abs_diff(r[j]);
        if d < n {
            let (s, p) = best[i + 1][j + 1];
            if best[i][j] == (s + n - d, p + 1) {
                m.pairs.push(BoundaryPair {
                    hyp: h[i],
                    reference: r[j],
                    distance: d,
                });
                i += 1;
                j += 1;
                continue;
            }
        }
        if best[i][j] == best[i + 1][j] {
            m.unmatched_hyp.push(h[i]);
            i += 1;
        } else {
            m.unmatched_ref.push(r[j]);
            j += 1;
        }
    }
    m.unmatched_hyp.extend_from_slice(&h[i..]);
    m.unmatched_ref.extend_from_slice(&r[j..]);
    Ok(m)
}

/// Mean score over pairs and unmatched boundaries; 1 when both sides are
/// empty.
pub fn similarity_from_matching(m: &BoundaryMatching) -> f64 {
    let denom = m.pairs.len() + m.unmatched_hyp.len() + m.unmatched_ref.len();
    if denom == 0 {
        return 1.0;
    }
    m.score_units() as f64 / (m.n * denom) as f64
}

/// `(BP, BR)`. An empty side scores 1 if the other side is empty too and 0
/// otherwise.
pub fn precision_recall_from_matching(m: &BoundaryMatching) -> (f64, f64) {
    let units = m.score_units();
    let ratio = |count: usize, other: usize| {
        if count == 0 {
            if other == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            units as f64 / (m.n * count) as f64
        }
    };
    (
        ratio(m.num_hyp(), m.num_ref()),
        ratio(m.num_ref(), m.num_hyp()),
    )
}

pub fn boundary_similarity(
    hyp: &Segmentation,
    reference: &Segmentation,
    cfg: &MatchConfig,
) -> Result<f64, MetricError> {
    Ok(similarity_from_matching(&match_boundaries(
        hyp, reference, cfg,
    )?))
}

pub fn boundary_precision_recall(
    hyp: &Segmentation,
    reference: &Segmentation,
    cfg: &MatchConfig,
) -> Result<(f64, f64), MetricError> {
    Ok(precision_recall_from_matching(&match_boundaries(
        hyp, reference, cfg,
    )?))
}

/// Half the mean reference segment length, rounded, at least 2, and at most
/// `S - 1` so there is always one probe.
pub fn default_probe_width(reference: &Segmentation) -> usize {
    let mean = reference.num_sentences() as f64 / reference.num_segments() as f64;
    let k = ((mean / 2.0).round() as usize).max(2);
    k.min(reference.num_sentences().saturating_sub(1)).max(1)
}

fn probe_width(reference: &Segmentation, k: Option<usize>) -> Result<usize, MetricError> {
    let s = reference.num_sentences();
    if s < 2 {
        return Err(MetricError::TooShort);
    }
    Ok(k.unwrap_or_else(|| default_probe_width(reference))
        .clamp(1, s - 1))
}

fn boundary_prefix(seg: &Segmentation) -> Vec<usize> {
    // prefix[i] = number of boundaries b with b < i (boundary b sits between i=b and b+1)
    let mut prefix = vec![0usize; seg.num_sentences() + 1];
    for &b in seg.boundaries() {
        prefix[b + 1] += 1;
    }
    for i in 1..prefix.len() {
        prefix[i] += prefix[i - 1];
    }
    prefix
}

/// Fraction of probe pairs `(i, i + k)` on which hypothesis and reference
/// disagree about whether both sentences share a segment.
pub fn pk(
    hyp: &Segmentation,
    reference: &Segmentation,
    k: Option<usize>,
) -> Result<f64, MetricError> {
    check_counts(hyp, reference)?;
    let k = probe_width(reference, k)?;
    let (ph, pr) = (boundary_prefix(hyp), boundary_prefix(reference));
    let s = reference.num_sentences();
    let errors = (1..=s - k)
        .filter(|&i| (ph[i + k] - ph[i] == 0) != (pr[i + k] - pr[i] == 0))
        .count();
    Ok(errors as f64 / (s - k) as f64)
}

/// Fraction of windows `[i, i + k)` whose boundary counts differ.
pub fn window_diff(
    hyp: &Segmentation,
    reference: &Segmentation,
    k: Option<usize>,
) -> Result<f64, MetricError> {
    check_counts(hyp, reference)?;
    let k = probe_width(reference, k)?;
    let (ph, pr) = (boundary_prefix(hyp), boundary_prefix(reference));
    let s = reference.num_sentences();
    let errors = (1..=s - k)
        .filter(|&i| ph[i + k] - ph[i] != pr[i + k] - pr[i])
        .count();
    Ok(errors as f64 / (s - k) as f64)
}
