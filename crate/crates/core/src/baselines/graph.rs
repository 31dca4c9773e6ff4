//! Graph-clustering segmenter.
//!
//! Sentences are nodes; an edge joins two sentences at most `max_distance`
//! apart whose cosine similarity reaches `edge_threshold`. Communities come
//! from weighted label propagation. Edges joining different communities are
//! removed and propagation rerun until none remain, after which connected
//! components are the clusters. A majority vote over a small neighbourhood
//! then smooths isolated labels so segments come out contiguous.
//!
//! This approximates the cited graph segmenter; it is not a replica.

use serde::{Deserialize, Serialize};

use super::embeddings::{check_vectors, cosine, EmbeddingError};
use crate::text::Segmentation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphParams {
    pub edge_threshold: f64,
    pub max_distance: usize,
    /// Neighbourhood radius of the contiguity vote.
    pub repair_radius: usize,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            edge_threshold: 0.5,
            max_distance: 10,
            repair_radius: 2,
        }
    }
}

type Edge = (usize, usize, f64);

fn propagate(n: usize, edges: &[Edge]) -> Vec<usize> {
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(a, b, w) in edges {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    let mut labels: Vec<usize> = (0..n).collect();
    for _ in 0..100 {
        let mut changed = false;
        for i in 0..n {
            if adj[i].is_empty() {
                continue;
            }
            let mut votes: Vec<(usize, f64)> = Vec::new();
            for &(j, w) in &adj[i] {
                match votes.iter_mut().find(|(l, _)| *l == labels[j]) {
                    Some(v) => v.1 += w,
                    None => votes.push((labels[j], w)),
                }
            }
            // heaviest label, smallest id on ties
            let best = votes
                .iter()
                .copied()
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
                .unwrap()
                .0;
            if best != labels[i] {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    labels
}

fn components(n: usize, edges: &[Edge]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for &(a, b, _) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..n).map(|i| find(&mut parent, i)).collect()
}

/// Cluster label per sentence before contiguity repair.
pub fn cluster_labels(embeddings: &[Vec<f32>], params: &GraphParams) -> Vec<usize> {
    let n = embeddings.len();
    let mut edges: Vec<Edge> = Vec::new();
    for a in 0..n {
        for b in a + 1..n.min(a + params.max_distance + 1) {
            let w = cosine(&embeddings[a], &embeddings[b]);
            if w >= params.edge_threshold {
                edges.push((a, b, w));
            }
        }
    }
    loop {
        let labels = propagate(n, &edges);
        let before = edges.len();
        edges.retain(|&(a, b, _)| labels[a] == labels[b]);
        if edges.len() == before {
            break;
        }
    }
    components(n, &edges)
}

/// Each sentence takes the most frequent label within `radius`; ties keep
/// the current label.
pub fn repair_contiguity(labels: &[usize], radius: usize) -> Vec<usize> {
    (0..labels.len())
        .map(|i| {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(labels.len());
            let mut counts: Vec<(usize, usize)> = Vec::new();
            for &l in &labels[lo..hi] {
                match counts.iter_mut().find(|(x, _)| *x == l) {
                    Some(c) => c.1 += 1,
                    None => counts.push((l, 1)),
                }
            }
            let own = counts.iter().find(|(l, _)| *l == labels[i]).unwrap().1;
            counts
                .iter()
                .filter(|(_, c)| *c > own)
                .max_by_key(|(_, c)| *c)
                .map_or(labels[i], |(l, _)| *l)
        })
        .collect()
}

pub fn graph_segmenter(
    embeddings: &[Vec<f32>],
    params: &GraphParams,
) -> Result<Segmentation, EmbeddingError> {
    let n = embeddings.len();
    if n == 0 {
        return Err(EmbeddingError::ProviderFailure("no sentences".into()));
    }
    check_vectors("", embeddings, embeddings[0].len())?;
    let labels = repair_contiguity(&cluster_labels(embeddings, params), params.repair_radius);
    let boundaries = (1..n).filter(|&i| labels[i - 1] != labels[i]).collect();
    Ok(Segmentation::new(n, boundaries).expect("label changes are interior"))
}
