use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::corpus::{read_jsonl, write_jsonl};
use super::{read_text, write_text};
use crate::cluster::{ResolutionTrace, TraceRecord};
use crate::error::{Error, Result};
use crate::eval::{EvalMode, EvalReport, SegmentScores};
use crate::model::{Cluster, Clustering, EntityId, MentionId, MentionIdx, NilId};

pub const CLUSTERING_HEADER: &str = "mention_id\tcluster_id\tkind\tentity_id\tphi_star";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Entity,
    Nil,
    /// Entity-less cluster of a linker that does not predict NIL.
    Unlinked,
}

impl RowKind {
    fn as_str(self) -> &'static str {
        match self {
            RowKind::Entity => "entity",
            RowKind::Nil => "nil",
            RowKind::Unlinked => "unlinked",
        }
    }
}

/// One line of a clustering file.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusteringRow {
    pub mention: MentionId,
    pub cluster: usize,
    pub kind: RowKind,
    pub entity: Option<EntityId>,
    pub phi_star: Option<f64>,
}

/// Rows in mention index order; `phi_star` is filled from `trace` when given.
pub fn clustering_rows(
    clustering: &Clustering,
    mention_ids: &[MentionId],
    entity_ids: &[EntityId],
    trace: Option<&ResolutionTrace>,
) -> Vec<ClusteringRow> {
    (0..clustering.mention_count())
        .map(|i| {
            let m = MentionIdx::new(i);
            let c = clustering.cluster_of(m);
            let entity = clustering.clusters()[c].entity;
            let kind = match entity {
                Some(_) => RowKind::Entity,
                None if clustering.nil_aware() => RowKind::Nil,
                None => RowKind::Unlinked,
            };
            ClusteringRow {
                mention: mention_ids[i].clone(),
                cluster: c,
                kind,
                entity: entity.map(|e| entity_ids[e.index()].clone()),
                phi_star: trace.and_then(|t| t.get(m)).map(|r| r.phi_star),
            }
        })
        .collect()
}

pub fn format_clustering(rows: &[ClusteringRow]) -> String {
    let mut out = String::with_capacity(32 * (rows.len() + 1));
    out.push_str(CLUSTERING_HEADER);
    out.push('\n');
    for r in rows {
        let entity = r.entity.as_ref().map_or("", |e| e.as_str());
        let phi = r.phi_star.map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{}\tc{}\t{}\t{entity}\t{phi}",
            r.mention,
            r.cluster,
            r.kind.as_str()
        );
    }
    out
}

pub fn write_clustering(path: &Path, rows: &[ClusteringRow]) -> Result<()> {
    write_text(path, &format_clustering(rows))
}

pub fn parse_clustering(path: &Path, text: &str) -> Result<Vec<ClusteringRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CLUSTERING_HEADER => {}
        _ => {
            return Err(Error::Ingest {
                path: path.to_owned(),
                line: 1,
                message: "missing clustering header".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fail = |message: String| Error::Ingest {
            path: path.to_owned(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let [mention, cluster, kind, entity, phi] = fields[..] else {
            return Err(fail(format!("expected 5 tab-separated fields, found {}", fields.len())));
        };
        let cluster = cluster
            .strip_prefix('c')
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| fail(format!("bad cluster id `{cluster}`")))?;
        let kind = match kind {
            "entity" => RowKind::Entity,
            "nil" => RowKind::Nil,
            "unlinked" => RowKind::Unlinked,
            other => return Err(fail(format!("unknown kind `{other}`"))),
        };
        if (kind == RowKind::Entity) == entity.is_empty() {
            return Err(fail("entity id must be present exactly for entity rows".into()));
        }
        let phi_star = if phi.is_empty() {
            None
        } else {
            Some(phi.parse().map_err(|_| fail(format!("bad score `{phi}`")))?)
        };
        rows.push(ClusteringRow {
            mention: mention.into(),
            cluster,
            kind,
            entity: (!entity.is_empty()).then(|| entity.into()),
            phi_star,
        });
    }
    Ok(rows)
}

pub fn read_clustering(path: &Path) -> Result<Vec<ClusteringRow>> {
    parse_clustering(path, &read_text(path)?)
}

/// Rebuilds a [`Clustering`] over the given identifier orders. Any
/// `unlinked` row makes the result a non-NIL-aware clustering.
pub fn clustering_from_rows(
    rows: &[ClusteringRow],
    mention_ids: &[MentionId],
    entity_ids: &[EntityId],
) -> Result<Clustering> {
    let mut clusters: BTreeMap<usize, Cluster> = BTreeMap::new();
    for r in rows {
        let m = mention_ids
            .binary_search(&r.mention)
            .map_err(|_| Error::UnknownId {
                kind: "mention",
                id: r.mention.to_string(),
            })?;
        let entity = match &r.entity {
            Some(e) => Some(
                entity_ids
                    .binary_search(e)
                    .map_err(|_| Error::UnknownId {
                        kind: "entity",
                        id: e.to_string(),
                    })?,
            ),
            None => None,
        }
        .map(crate::model::EntityIdx::new);
        let cluster = clusters.entry(r.cluster).or_insert_with(|| Cluster {
            mentions: Vec::new(),
            entity,
        });
        if cluster.entity != entity {
            return Err(Error::Contract(format!(
                "cluster c{} lists more than one entity",
                r.cluster
            )));
        }
        cluster.mentions.push(MentionIdx::new(m));
    }
    if let Some((pos, (&c, _))) = clusters.iter().enumerate().find(|(i, (c, _))| i != *c) {
        return Err(Error::Contract(format!(
            "cluster ids are not contiguous: expected c{pos}, found c{c}"
        )));
    }
    let clusters = clusters.into_values().collect();
    if rows.iter().any(|r| r.kind == RowKind::Unlinked) {
        Clustering::without_nil(mention_ids.len(), clusters)
    } else {
        Clustering::new(mention_ids.len(), clusters)
    }
}

pub fn write_trace(path: &Path, records: &[TraceRecord]) -> Result<()> {
    write_jsonl(path, records)
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    Ok(read_jsonl(path)?.into_iter().map(|(_, r)| r).collect())
}

fn push_segment(out: &mut String, name: &str, s: &SegmentScores) {
    let _ = writeln!(out, "{name}.precision={}", s.precision);
    let _ = writeln!(out, "{name}.recall={}", s.recall);
    let _ = writeln!(out, "{name}.f1={}", s.f1);
    let _ = writeln!(out, "{name}.nmi={}", s.nmi);
    let _ = writeln!(out, "{name}.ari={}", s.ari);
    let _ = writeln!(out, "{name}.predicted={}", s.predicted);
    let _ = writeln!(out, "{name}.gold={}", s.gold);
    let _ = writeln!(out, "{name}.correct={}", s.correct);
    let _ = writeln!(out, "{name}.empty={}", s.empty);
}

/// Flat `key=value` lines.
pub fn format_report(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mode={}", report.mode);
    let _ = writeln!(out, "clusters={}", report.clusters);
    push_segment(&mut out, "known", &report.known);
    if let Some(nil) = &report.nil {
        push_segment(&mut out, "nil", nil);
    }
    push_segment(&mut out, "micro", &report.micro);
    for (c, n) in &report.nil_mapping {
        let _ = writeln!(out, "nil_mapping.c{c}={n}");
    }
    out
}

pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    write_text(path, &format_report(report))
}

struct Fields<'a> {
    path: &'a Path,
    map: BTreeMap<&'a str, &'a str>,
}

impl Fields<'_> {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.map.get(key).ok_or_else(|| Error::Ingest {
            path: self.path.to_owned(),
            line: 0,
            message: format!("report lacks `{key}`"),
        })?;
        raw.parse().map_err(|_| Error::Ingest {
            path: self.path.to_owned(),
            line: 0,
            message: format!("bad value `{raw}` for `{key}`"),
        })
    }

    fn segment(&self, name: &str) -> Result<SegmentScores> {
        Ok(SegmentScores {
            precision: self.get(&format!("{name}.precision"))?,
            recall: self.get(&format!("{name}.recall"))?,
            f1: self.get(&format!("{name}.f1"))?,
            nmi: self.get(&format!("{name}.nmi"))?,
            ari: self.get(&format!("{name}.ari"))?,
            predicted: self.get(&format!("{name}.predicted"))?,
            gold: self.get(&format!("{name}.gold"))?,
            correct: self.get(&format!("{name}.correct"))?,
            empty: self.get(&format!("{name}.empty"))?,
        })
    }
}

pub fn parse_report(path: &Path, text: &str) -> Result<EvalReport> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Ingest {
            path: path.to_owned(),
            line: i + 1,
            message: "expected key=value".into(),
        })?;
        map.insert(k, v);
    }
    let fields = Fields { path, map };
    let mode = match fields.get::<String>("mode")?.as_str() {
        "full" => EvalMode::Full,
        "pca" => EvalMode::Pca,
        other => {
            return Err(Error::Ingest {
                path: path.to_owned(),
                line: 0,
                message: format!("unknown mode `{other}`"),
            })
        }
    };
    let nil = if fields.map.contains_key("nil.f1") {
        Some(fields.segment("nil")?)
    } else {
        None
    };
    let mut nil_mapping: Vec<(usize, NilId)> = Vec::new();
    for (k, v) in &fields.map {
        if let Some(c) = k.strip_prefix("nil_mapping.c") {
            let c = c.parse().map_err(|_| Error::Ingest {
                path: path.to_owned(),
                line: 0,
                message: format!("bad mapping key `{k}`"),
            })?;
            nil_mapping.push((c, NilId::from(*v)));
        }
    }
    nil_mapping.sort();
    Ok(EvalReport {
        mode,
        clusters: fields.get("clusters")?,
        known: fields.segment("known")?,
        nil,
        micro: fields.segment("micro")?,
        nil_mapping,
    })
}

pub fn read_report(path: &Path) -> Result<EvalReport> {
    parse_report(path, &read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EntityIdx;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn empty_clustering_writes_header_only() {
        let text = format_clustering(&[]);
        assert_eq!(text, format!("{CLUSTERING_HEADER}\n"));
        let rows = parse_clustering(Path::new("x"), &text).unwrap();
        assert_eq!(clustering_from_rows(&rows, &[], &[]).unwrap(), Clustering::empty());
    }

    #[test]
    fn clustering_round_trip() {
        let mids: Vec<MentionId> = ids("m", 4).into_iter().map(Into::into).collect();
        let eids: Vec<EntityId> = ids("e", 2).into_iter().map(Into::into).collect();
        let c = Clustering::new(
            4,
            vec![
                Cluster {
                    mentions: vec![MentionIdx::new(0), MentionIdx::new(2)],
                    entity: Some(EntityIdx::new(1)),
                },
                Cluster {
                    mentions: vec![MentionIdx::new(1), MentionIdx::new(3)],
                    entity: None,
                },
            ],
        )
        .unwrap();
        let rows = clustering_rows(&c, &mids, &eids, None);
        let text = format_clustering(&rows);
        let back = parse_clustering(Path::new("x"), &text).unwrap();
        assert_eq!(back, rows);
        assert_eq!(clustering_from_rows(&back, &mids, &eids).unwrap(), c);
    }

    #[test]
    fn report_round_trip() {
        let s = SegmentScores {
            precision: 0.1 + 0.2,
            recall: 2.0 / 3.0,
            f1: 0.4,
            nmi: 1.0,
            ari: -0.05,
            predicted: 3,
            gold: 4,
            correct: 1,
            empty: false,
        };
        let report = EvalReport {
            mode: EvalMode::Full,
            known: s,
            nil: Some(s),
            micro: s,
            clusters: 12,
            nil_mapping: vec![(2, "n1".into()), (10, "n0".into())],
        };
        let text = format_report(&report);
        assert_eq!(parse_report(Path::new("r"), &text).unwrap(), report);
        let pca = EvalReport {
            mode: EvalMode::Pca,
            nil: None,
            nil_mapping: Vec::new(),
            ..report
        };
        assert_eq!(parse_report(Path::new("r"), &format_report(&pca)).unwrap(), pca);
    }
}
