//! One JSON object per line: `{id, source, text, boundaries, meta}`.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use super::{CorpusDocument, CorpusError, Source};
use crate::text::Segmentation;

#[derive(Serialize)]
struct Record<'a> {
    id: &'a str,
    source: Source,
    text: &'a str,
    boundaries: &'a [usize],
    meta: &'a Map<String, Value>,
}

fn schema(line: usize, field: &str, message: impl Into<String>) -> CorpusError {
    CorpusError::SchemaViolation {
        line,
        field: field.into(),
        message: message.into(),
    }
}

fn from_value(line: usize, value: Value) -> Result<CorpusDocument, CorpusError> {
    let Value::Object(mut obj) = value else {
        return Err(schema(line, "", "record is not an object"));
    };
    let mut string = |field: &str| match obj.remove(field) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(schema(line, field, "expected a string")),
        None => Err(schema(line, field, "missing")),
    };
    let id = string("id")?;
    let source_name = string("source")?;
    let text = string("text")?;
    let source: Source = source_name
        .parse()
        .map_err(|e: String| schema(line, "source", e))?;
    let boundaries = match obj.remove("boundaries") {
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| {
                v.as_u64()
                    .map(|b| b as usize)
                    .ok_or_else(|| schema(line, "boundaries", "expected non-negative integers"))
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(schema(line, "boundaries", "expected an array")),
        None => return Err(schema(line, "boundaries", "missing")),
    };
    let meta = match obj.remove("meta") {
        Some(Value::Object(m)) => m,
        None | Some(Value::Null) => Map::new(),
        Some(_) => return Err(schema(line, "meta", "expected an object")),
    };
    if let Some(extra) = obj.keys().next() {
        return Err(schema(line, extra, "unknown field"));
    }
    let index =
        crate::text::split_sentences(&text).map_err(|e| schema(line, "text", e.to_string()))?;
    let reference = Segmentation::new(index.count(), boundaries)
        .map_err(|e| schema(line, "boundaries", e.to_string()))?;
    Ok(CorpusDocument {
        id,
        source,
        text,
        reference,
        meta,
    })
}

pub fn parse_jsonl(reader: impl BufRead) -> Result<Vec<CorpusDocument>, CorpusError> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        docs.push(from_value(line_no, value)?);
    }
    Ok(docs)
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<CorpusDocument>, CorpusError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_jsonl(BufReader::new(file))
}

pub fn to_jsonl(docs: &[CorpusDocument]) -> String {
    let mut out = String::new();
    for d in docs {
        let record = Record {
            id: &d.id,
            source: d.source,
            text: &d.text,
            boundaries: d.reference.boundaries(),
            meta: &d.meta,
        };
        out.push_str(&serde_json::to_string(&record).expect("records serialise"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl(path: impl AsRef<Path>, docs: &[CorpusDocument]) -> Result<(), CorpusError> {
    let path = path.as_ref();
    fs::write(path, to_jsonl(docs)).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
