use std::fmt::Write as _;
use std::path::Path;

use super::{read_text, write_text};
use crate::error::{Error, Result};
use crate::graph::{AffinityEdge, Target};

/// One edge per line: `source_kind source_id target_kind target_id score`,
/// tab-separated. Sources are always mentions.
pub fn format_edges(edges: &[AffinityEdge]) -> String {
    let mut out = String::new();
    for e in edges {
        let (kind, id) = match &e.target {
            Target::Mention(m) => ("mention", m.as_str()),
            Target::Entity(x) => ("entity", x.as_str()),
        };
        let _ = writeln!(out, "mention\t{}\t{kind}\t{id}\t{}", e.source, e.score);
    }
    out
}

pub fn write_edges(path: &Path, edges: &[AffinityEdge]) -> Result<()> {
    write_text(path, &format_edges(edges))
}

/// Parses edge lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_edges(path: &Path, text: &str) -> Result<Vec<AffinityEdge>> {
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let fail = |message: String| Error::Ingest {
            path: path.to_owned(),
            line: i + 1,
            message,
        };
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [source_kind, source, target_kind, target, score] = fields[..] else {
            return Err(fail(format!("expected 5 tab-separated fields, found {}", fields.len())));
        };
        if source_kind != "mention" {
            return Err(fail(format!("source kind must be `mention`, found `{source_kind}`")));
        }
        let target = match target_kind {
            "mention" => Target::Mention(target.into()),
            "entity" => Target::Entity(target.into()),
            other => return Err(fail(format!("unknown target kind `{other}`"))),
        };
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|_| fail(format!("score `{score}` is not a number")))?;
        edges.push(AffinityEdge {
            source: source.into(),
            target,
            score,
        });
    }
    Ok(edges)
}

pub fn read_edges(path: &Path) -> Result<Vec<AffinityEdge>> {
    parse_edges(path, &read_text(path)?)
}
