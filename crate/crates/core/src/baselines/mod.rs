//! Non-LLM segmenters: fixed stride, similarity troughs and graph clustering.

pub mod embeddings;
mod graph;
mod trough;

pub use embeddings::{
    cosine, EmbeddingError, EmbeddingProvider, EmbeddingRecord, HashingEmbedder,
    PrecomputedEmbeddings, RemoteEmbeddings,
};
pub use graph::{cluster_labels, graph_segmenter, repair_contiguity, GraphParams};
pub use trough::{
    length_postprocess, similarity_series, similarity_series_for, trough_boundaries, SeriesParams,
    SimilaritySeries,
};

use serde::{Deserialize, Serialize};

use crate::text::{Segmentation, SentenceIndex};

/// Boundaries every `k` sentences: `{k, 2k, ...}` below `num_sentences`.
pub fn split_every_k(num_sentences: usize, k: usize) -> Segmentation {
    assert!(num_sentences >= 1 && k >= 1);
    Segmentation::new(num_sentences, (k..num_sentences).step_by(k).collect())
        .expect("multiples of k below S are interior")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TroughParams {
    pub series: SeriesParams,
    pub threshold: f64,
    pub min_words: usize,
    pub max_words: usize,
}

impl Default for TroughParams {
    fn default() -> Self {
        Self {
            series: SeriesParams::default(),
            threshold: 0.3,
            min_words: 50,
            max_words: 500,
        }
    }
}

/// Full similarity-trough pipeline: series, troughs, then length repair.
pub fn trough_segmenter(
    index: &SentenceIndex,
    embeddings: &[Vec<f32>],
    params: &TroughParams,
) -> Result<(Segmentation, SimilaritySeries), EmbeddingError> {
    if index.count() == 1 {
        return Ok((Segmentation::whole(1), SimilaritySeries { values: vec![] }));
    }
    let series = similarity_series(embeddings, &params.series)?;
    let troughs = trough_boundaries(&series, params.threshold);
    let seg = length_postprocess(index, &troughs, params.min_words, params.max_words, &series);
    Ok((seg, series))
}
