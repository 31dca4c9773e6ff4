//! Similarity-trough segmentation over sentence embeddings.

use serde::{Deserialize, Serialize};

use super::embeddings::{check_vectors, cosine, EmbeddingError, EmbeddingProvider};
use crate::text::{word_count, Segmentation, SentenceIndex, SentenceRange};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesParams {
    /// How many preceding sentences each value looks back over.
    pub window: usize,
    /// Ratio of the geometric default weights `1, r, r^2, ...`.
    pub ratio: f64,
    /// Explicit weights `w_1..w_window`; overrides `ratio` when set.
    pub weights: Option<Vec<f64>>,
}

impl Default for SeriesParams {
    fn default() -> Self {
        Self {
            window: 5,
            ratio: 0.5,
            weights: None,
        }
    }
}

impl SeriesParams {
    fn weights(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) => w.iter().copied().take(self.window).collect(),
            None => (0..self.window)
                .map(|j| self.ratio.powi(j as i32))
                .collect(),
        }
    }
}

/// One value per boundary position; `values[i - 1]` belongs to boundary `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySeries {
    pub values: Vec<f64>,
}

impl SimilaritySeries {
    pub fn at(&self, boundary: usize) -> f64 {
        self.values[boundary - 1]
    }

    pub fn num_sentences(&self) -> usize {
        self.values.len() + 1
    }
}

/// Value at boundary `i` is the weighted mean of `cos(e[i+1], e[i+1-j])`
/// for `j = 1..=min(window, i)`, weights renormalised over the positions
/// that exist.
pub fn similarity_series(
    embeddings: &[Vec<f32>],
    params: &SeriesParams,
) -> Result<SimilaritySeries, EmbeddingError> {
    if let Some(first) = embeddings.first() {
        check_vectors("", embeddings, first.len())?;
    }
    let weights = params.weights();
    let values = (1..embeddings.len())
        .map(|i| {
            let next = &embeddings[i];
            let span = weights.len().min(i);
            let (mut acc, mut total) = (0.0, 0.0);
            for (j, &w) in weights[..span].iter().enumerate() {
                acc += w * cosine(next, &embeddings[i - 1 - j]);
                total += w;
            }
            if total > 0.0 {
                (acc / total).clamp(-1.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    Ok(SimilaritySeries { values })
}

pub fn similarity_series_for(
    doc_id: &str,
    index: &SentenceIndex,
    provider: &dyn EmbeddingProvider,
    params: &SeriesParams,
) -> Result<SimilaritySeries, EmbeddingError> {
    let sentences: Vec<&str> = index.sentences().collect();
    let embeddings = provider.embed_document(doc_id, &sentences)?;
    check_vectors(doc_id, &embeddings, provider.dimension())?;
    similarity_series(&embeddings, params)
}

/// Boundaries at sub-threshold weak local minima (no larger than either
/// existing neighbour). Of a run of equal qualifying values only the first
/// position is kept.
pub fn trough_boundaries(series: &SimilaritySeries, threshold: f64) -> Segmentation {
    let v = &series.values;
    let qualifies = |i: usize| {
        v[i] < threshold && (i == 0 || v[i] <= v[i - 1]) && (i + 1 == v.len() || v[i] <= v[i + 1])
    };
    let boundaries = (0..v.len())
        .filter(|&i| qualifies(i) && !(i > 0 && v[i - 1] == v[i] && qualifies(i - 1)))
        .map(|i| i + 1)
        .collect();
    Segmentation::new(series.num_sentences(), boundaries).expect("positions are interior")
}

/// Splits segments longer than `max_words` at their lowest interior series
/// value, then merges segments shorter than `min_words` toward the more
/// similar neighbour, as long as the merge stays within `max_words`.
pub fn length_postprocess(
    index: &SentenceIndex,
    seg: &Segmentation,
    min_words: usize,
    max_words: usize,
    series: &SimilaritySeries,
) -> Segmentation {
    let mut prefix = vec![0usize];
    for s in index.sentences() {
        prefix.push(prefix.last().unwrap() + word_count(s));
    }
    let words = |r: &SentenceRange| prefix[r.end] - prefix[r.start - 1];

    let mut ranges = seg.segment_ranges();
    let mut i = 0;
    while i < ranges.len() {
        let r = ranges[i];
        if words(&r) > max_words && r.len() > 1 {
            let cut = (r.start..r.end)
                .min_by(|&a, &b| series.at(a).total_cmp(&series.at(b)))
                .unwrap();
            ranges[i] = SentenceRange::new(r.start, cut);
            ranges.insert(i + 1, SentenceRange::new(cut + 1, r.end));
        } else {
            i += 1;
        }
    }

    let mut i = 0;
    while i < ranges.len() && ranges.len() > 1 {
        let r = ranges[i];
        if words(&r) >= min_words {
            i += 1;
            continue;
        }
        let left = (i > 0).then(|| (series.at(ranges[i - 1].end), i - 1));
        let right = (i + 1 < ranges.len()).then(|| (series.at(r.end), i + 1));
        let mut options: Vec<(f64, usize)> = left.into_iter().chain(right).collect();
        // higher similarity first; stable sort keeps left on ties
        options.sort_by(|a, b| b.0.total_cmp(&a.0));
        let merged = options.into_iter().find_map(|(_, j)| {
            let (lo, hi) = if j < i { (j, i) } else { (i, j) };
            let joined = SentenceRange::new(ranges[lo].start, ranges[hi].end);
            (words(&joined) <= max_words).then_some((lo, joined))
        });
        match merged {
            Some((lo, joined)) => {
                ranges[lo] = joined;
                ranges.remove(lo + 1);
                i = lo;
            }
            None => i += 1,
        }
    }
    Segmentation::from_ranges(&ranges).expect("ranges still tile the document")
}
