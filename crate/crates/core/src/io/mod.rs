//! Reading and writing corpora, affinity edges, clusterings, traces and
//! reports, plus the synthetic corpus generator.
//!
//! Record files are UTF-8 with one JSON object per line. Edge and clustering
//! files are tab-separated.

mod corpus;
mod edges;
mod output;
mod synthetic;

pub use corpus::{read_corpus, read_entities, read_jsonl, read_mentions, write_jsonl};
pub use edges::{format_edges, parse_edges, read_edges, write_edges};
pub use output::{
    clustering_from_rows, clustering_rows, format_clustering, format_report, parse_clustering,
    parse_report, read_clustering, read_report, read_trace, write_clustering, write_report,
    write_trace, ClusteringRow, RowKind, CLUSTERING_HEADER,
};
pub use synthetic::{generate_synthetic, write_synthetic, SyntheticConfig, SyntheticCorpus};

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
