use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Corpus, Entity, Mention};

/// Parses one JSON record per non-blank line, reporting 1-based line numbers.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Ingest {
            path: path.to_owned(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, record));
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::io(path, e.into()))?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Rejects an embedding whose length differs from the first one seen.
fn track_dimension(
    path: &Path,
    line: usize,
    embedding: Option<&Vec<f32>>,
    dimension: &mut Option<usize>,
) -> Result<()> {
    let Some(v) = embedding else { return Ok(()) };
    match *dimension {
        None => *dimension = Some(v.len()),
        Some(d) if d != v.len() => {
            return Err(Error::Ingest {
                path: path.to_owned(),
                line,
                message: format!("embedding dimension {} differs from {d}", v.len()),
            })
        }
        Some(_) => {}
    }
    Ok(())
}

fn read_checked<T: DeserializeOwned>(
    path: &Path,
    dimension: &mut Option<usize>,
    embedding: impl Fn(&T) -> Option<&Vec<f32>>,
) -> Result<Vec<T>> {
    let records = read_jsonl::<T>(path)?;
    let mut out = Vec::with_capacity(records.len());
    for (line, r) in records {
        track_dimension(path, line, embedding(&r), dimension)?;
        out.push(r);
    }
    Ok(out)
}

pub fn read_mentions(path: &Path) -> Result<Vec<Mention>> {
    read_checked(path, &mut None, |m: &Mention| m.embedding.as_ref())
}

pub fn read_entities(path: &Path) -> Result<Vec<Entity>> {
    read_checked(path, &mut None, |e: &Entity| e.embedding.as_ref())
}

/// Reads and validates a corpus. Embedding dimensions must agree across both
/// files; the first disagreeing line is reported.
pub fn read_corpus(mentions_path: &Path, entities_path: &Path) -> Result<Corpus> {
    let mut dimension = None;
    let mentions = read_checked(mentions_path, &mut dimension, |m: &Mention| {
        m.embedding.as_ref()
    })?;
    let entities = read_checked(entities_path, &mut dimension, |e: &Entity| {
        e.embedding.as_ref()
    })?;
    Corpus::new(mentions, entities)
}
