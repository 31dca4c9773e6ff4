//! Sentence embedding sources.
//!
//! Binary vectors file layout (all integers little-endian):
//!
//! ```text
//! u32 dimension | u32 count
//! count x { u32 id_len | id_len bytes doc_id (UTF-8) | u32 sentence_index | dimension x f32 }
//! ```
//!
//! Sentence indices are 1-based, like everywhere else in the crate. The JSONL
//! variant holds one `{"doc_id", "sentence_index", "vector"}` object per line.

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{GatewayError, HttpTransport, ProviderConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("embedding provider failed: {0}")]
    ProviderFailure(String),
    #[error("expected {expected}-dimensional vectors, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector for {doc_id} sentence {sentence} has non-finite values")]
    NonFinite { doc_id: String, sentence: usize },
    #[error("no vector for {doc_id} sentence {sentence}")]
    Missing { doc_id: String, sentence: usize },
    #[error("vectors file: {0}")]
    Format(String),
}

impl From<GatewayError> for EmbeddingError {
    fn from(e: GatewayError) -> Self {
        EmbeddingError::ProviderFailure(e.to_string())
    }
}

pub trait EmbeddingProvider: Send + Sync {
    fn dimension(&self) -> usize;

    /// One vector per sentence, in order.
    fn embed_document(
        &self,
        doc_id: &str,
        sentences: &[&str],
    ) -> Result<Vec<Vec<f32>>, EmbeddingError>;
}

/// Cosine similarity; zero vectors score 0.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

pub(crate) fn check_vectors(
    doc_id: &str,
    vectors: &[Vec<f32>],
    dimension: usize,
) -> Result<(), EmbeddingError> {
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dimension {
            return Err(EmbeddingError::DimensionMismatch {
                expected: dimension,
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::NonFinite {
                doc_id: doc_id.into(),
                sentence: i + 1,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub doc_id: String,
    pub sentence_index: usize,
    pub vector: Vec<f32>,
}

/// Vectors loaded from a file, keyed by document and sentence.
#[derive(Debug, Clone, Default)]
pub struct PrecomputedEmbeddings {
    dimension: usize,
    vectors: HashMap<String, HashMap<usize, Vec<f32>>>,
}

impl PrecomputedEmbeddings {
    pub fn from_records(
        dimension: usize,
        records: impl IntoIterator<Item = EmbeddingRecord>,
    ) -> Result<Self, EmbeddingError> {
        let mut vectors: HashMap<String, HashMap<usize, Vec<f32>>> = HashMap::new();
        for r in records {
            check_vectors(&r.doc_id, std::slice::from_ref(&r.vector), dimension).map_err(|e| {
                match e {
                    EmbeddingError::NonFinite { doc_id, .. } => EmbeddingError::NonFinite {
                        doc_id,
                        sentence: r.sentence_index,
                    },
                    other => other,
                }
            })?;
            if r.sentence_index == 0 {
                return Err(EmbeddingError::Format("sentence_index is 1-based".into()));
            }
            vectors
                .entry(r.doc_id)
                .or_default()
                .insert(r.sentence_index, r.vector);
        }
        Ok(Self { dimension, vectors })
    }

    pub fn read_binary(mut reader: impl Read) -> Result<Self, EmbeddingError> {
        let mut buf = Vec::new();
        reader
            .read_to_end(&mut buf)
            .map_err(|e| EmbeddingError::Format(e.to_string()))?;
        let mut cur = Cursor { buf: &buf, pos: 0 };
        let dimension = cur.u32()? as usize;
        let count = cur.u32()? as usize;
        let mut records = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let len = cur.u32()? as usize;
            let doc_id = std::str::from_utf8(cur.take(len)?)
                .map_err(|e| EmbeddingError::Format(e.to_string()))?
                .to_string();
            let sentence_index = cur.u32()? as usize;
            let vector = (0..dimension)
                .map(|_| {
                    cur.take(4)
                        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            records.push(EmbeddingRecord {
                doc_id,
                sentence_index,
                vector,
            });
        }
        if cur.pos != buf.len() {
            return Err(EmbeddingError::Format(format!(
                "{} trailing bytes after {count} records",
                buf.len() - cur.pos
            )));
        }
        Self::from_records(dimension, records)
    }

    pub fn write_binary(
        mut writer: impl Write,
        dimension: usize,
        records: &[EmbeddingRecord],
    ) -> std::io::Result<()> {
        writer.write_all(&(dimension as u32).to_le_bytes())?;
        writer.write_all(&(records.len() as u32).to_le_bytes())?;
        for r in records {
            assert_eq!(r.vector.len(), dimension, "record dimension");
            writer.write_all(&(r.doc_id.len() as u32).to_le_bytes())?;
            writer.write_all(r.doc_id.as_bytes())?;
            writer.write_all(&(r.sentence_index as u32).to_le_bytes())?;
            for x in &r.vector {
                writer.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_jsonl(reader: impl BufRead) -> Result<Self, EmbeddingError> {
        let mut records = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| EmbeddingError::Format(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: EmbeddingRecord = serde_json::from_str(&line)
                .map_err(|e| EmbeddingError::Format(format!("line {}: {e}", n + 1)))?;
            records.push(record);
        }
        let dimension = records.first().map_or(0, |r| r.vector.len());
        Self::from_records(dimension, records)
    }

    /// Loads `.jsonl` files as JSON lines and anything else as binary.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| EmbeddingError::Format(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "jsonl") {
            Self::read_jsonl(std::io::BufReader::new(file))
        } else {
            Self::read_binary(file)
        }
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EmbeddingError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| EmbeddingError::Format("truncated vectors file".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, EmbeddingError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

impl EmbeddingProvider for PrecomputedEmbeddings {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_document(
        &self,
        doc_id: &str,
        sentences: &[&str],
    ) -> Result<Vec<Vec<f32>>, EmbeddingError> {
        let doc = self.vectors.get(doc_id);
        (1..=sentences.len())
            .map(|i| {
                doc.and_then(|d| d.get(&i))
                    .cloned()
                    .ok_or_else(|| EmbeddingError::Missing {
                        doc_id: doc_id.into(),
                        sentence: i,
                    })
            })
            .collect()
    }
}

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "but", "by", "for", "from", "had", "has", "have",
    "he", "her", "his", "in", "is", "it", "its", "of", "on", "or", "she", "that", "the", "their",
    "then", "there", "they", "this", "to", "was", "were", "which", "with",
];

/// Lexical bag-of-words vectors via feature hashing. Needs no model or
/// network, which makes it the offline default for demos and fixtures.
#[derive(Debug, Clone, Copy)]
pub struct HashingEmbedder {
    pub dimension: usize,
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self { dimension: 256 }
    }
}

impl HashingEmbedder {
    pub fn embed(&self, sentence: &str) -> Vec<f32> {
        let mut v = vec![0.0f32; self.dimension];
        for word in sentence
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| w.len() > 1)
        {
            let word = word.to_lowercase();
            if STOPWORDS.contains(&word.as_str()) {
                continue;
            }
            // FNV-1a
            let hash = word.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
                (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
            });
            v[(hash % self.dimension as u64) as usize] += 1.0;
        }
        v
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_document(
        &self,
        _doc_id: &str,
        sentences: &[&str],
    ) -> Result<Vec<Vec<f32>>, EmbeddingError> {
        Ok(sentences.iter().map(|s| self.embed(s)).collect())
    }
}

/// Remote endpoint speaking `{"input": [..]}` -> `{"embeddings": [[..]]}`.
pub struct RemoteEmbeddings<T> {
    cfg: ProviderConfig,
    dimension: usize,
    token: Option<String>,
    transport: T,
}

impl<T: HttpTransport> RemoteEmbeddings<T> {
    pub fn new(cfg: ProviderConfig, dimension: usize, transport: T) -> Result<Self, GatewayError> {
        cfg.validate()?;
        let token = cfg.resolve_token()?;
        Ok(Self {
            cfg,
            dimension,
            token,
            transport,
        })
    }
}

impl<T: HttpTransport> EmbeddingProvider for RemoteEmbeddings<T> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_document(
        &self,
        doc_id: &str,
        sentences: &[&str],
    ) -> Result<Vec<Vec<f32>>, EmbeddingError> {
        #[derive(Deserialize)]
        struct Reply {
            embeddings: Vec<Vec<f32>>,
        }
        let body = serde_json::json!({ "input": sentences });
        let text = crate::gateway::chat::post_with_retries(
            &self.transport,
            &self.cfg,
            self.token.as_deref(),
            &body,
            &std::thread::sleep,
        )?;
        let reply: Reply = serde_json::from_str(&text)
            .map_err(|e| EmbeddingError::ProviderFailure(format!("bad response: {e}")))?;
        if reply.embeddings.len() != sentences.len() {
            return Err(EmbeddingError::ProviderFailure(format!(
                "asked for {} vectors, got {}",
                sentences.len(),
                reply.embeddings.len()
            )));
        }
        check_vectors(doc_id, &reply.embeddings, self.dimension)?;
        Ok(reply.embeddings)
    }
}
