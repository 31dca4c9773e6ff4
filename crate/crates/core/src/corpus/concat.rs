//! Incoherent documents built from segments of unrelated sources.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{assemble, CorpusDocument, CorpusError, Source};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConcatOptions {
    /// Also require distinct `meta.category` values.
    pub category_strict: bool,
}

fn draw(
    pool: &[CorpusDocument],
    k: usize,
    rng: &mut ChaCha8Rng,
    opts: &ConcatOptions,
) -> Result<Vec<(usize, usize)>, CorpusError> {
    let usable: Vec<usize> = (0..pool.len())
        .filter(|&i| !pool[i].text.trim().is_empty())
        .collect();
    let available = if opts.category_strict {
        usable
            .iter()
            .map(|&i| pool[i].category().unwrap_or(""))
            .collect::<HashSet<_>>()
            .len()
    } else {
        usable.len()
    };
    if k == 0 || available < k {
        return Err(CorpusError::InsufficientPool {
            needed: k,
            available,
        });
    }
    let order = sample(rng, usable.len(), usable.len()).into_vec();
    let mut chosen = Vec::with_capacity(k);
    let mut categories = HashSet::new();
    for pos in order {
        let doc = usable[pos];
        if opts.category_strict && !categories.insert(pool[doc].category().unwrap_or("")) {
            continue;
        }
        chosen.push(doc);
        if chosen.len() == k {
            break;
        }
    }
    Ok(chosen
        .into_iter()
        .map(|doc| (doc, rng.gen_range(0..pool[doc].reference.num_segments())))
        .collect())
}

fn build(
    id: String,
    pool: &[CorpusDocument],
    picks: &[(usize, usize)],
) -> Result<CorpusDocument, CorpusError> {
    let parts: Vec<&str> = picks
        .iter()
        .map(|&(doc, seg)| pool[doc].segment_texts()[seg])
        .collect();
    let (text, reference) = assemble(&parts)?;
    let mut meta = Map::new();
    meta.insert(
        "parts".into(),
        Value::Array(
            picks
                .iter()
                .map(|&(doc, seg)| json!({"doc": pool[doc].id, "segment": seg + 1}))
                .collect(),
        ),
    );
    Ok(CorpusDocument::new(
        id,
        Source::Conc,
        text,
        reference,
        meta,
    )?)
}

/// `k` segments, each from a different source document, joined in draw
/// order with a boundary at every seam.
pub fn make_concatenated(
    pool: &[CorpusDocument],
    k: usize,
    seed: u64,
    opts: &ConcatOptions,
) -> Result<CorpusDocument, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = draw(pool, k, &mut rng, opts)?;
    build(format!("conc-{seed}"), pool, &picks)
}

/// `count` documents from one seeded stream.
pub fn make_concatenated_batch(
    pool: &[CorpusDocument],
    count: usize,
    k: usize,
    seed: u64,
    opts: &ConcatOptions,
) -> Result<Vec<CorpusDocument>, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let picks = draw(pool, k, &mut rng, opts)?;
            build(format!("conc-{seed}-{:04}", i + 1), pool, &picks)
        })
        .collect()
}
