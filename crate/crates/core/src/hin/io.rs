//! Graph file formats.
//!
//! The JSON format holds the whole graph in one document:
//!
//! ```text
//! {"node_types": [{"name": "A", "count": 2, "feature_dim": 3, "features": [[..], [..]]}],
//!  "relations":  [{"name": "r", "src": "A", "dst": "P", "edges": [[0, 1], ...]}],
//!  "target_type": "A",
//!  "labels": [0, 1, null],
//!  "splits": {"train": [..], "val": [..], "test": [..]}}
//! ```
//!
//! Node ids are 0-based and local to their type. The CSV variant is a
//! directory with `nodes/<type>.csv` (header row, then one feature row per
//! node), `edges/<relation>.csv` (header `<src_type>,<dst_type>`, then
//! `u,v` rows) and `labels.csv` (header `<target_type>,label,split`).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::graph::{HeteroGraph, Label, NodeType, Relation, Splits};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeTypeRecord {
    name: String,
    count: usize,
    feature_dim: usize,
    features: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationRecord {
    name: String,
    src: String,
    dst: String,
    edges: Vec<[usize; 2]>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitsRecord {
    #[serde(default)]
    train: Vec<usize>,
    #[serde(default)]
    val: Vec<usize>,
    #[serde(default)]
    test: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRecord {
    node_types: Vec<NodeTypeRecord>,
    relations: Vec<RelationRecord>,
    target_type: String,
    labels: Vec<Option<u8>>,
    #[serde(default)]
    splits: SplitsRecord,
}

pub fn load_hetero_graph(path: impl AsRef<Path>) -> Result<HeteroGraph> {
    let text = fs::read_to_string(path)?;
    parse_hetero_graph(&text)
}

pub fn parse_hetero_graph(text: &str) -> Result<HeteroGraph> {
    let record: GraphRecord =
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    from_record(record)
}

fn from_record(record: GraphRecord) -> Result<HeteroGraph> {
    let mut node_types = Vec::with_capacity(record.node_types.len());
    for t in record.node_types {
        if node_types.iter().any(|n: &NodeType| n.name == t.name) {
            return Err(Error::Malformed(format!("duplicate node type `{}`", t.name)));
        }
        if t.features.len() != t.count {
            return Err(Error::Malformed(format!(
                "type `{}` declares {} nodes but has {} feature rows",
                t.name,
                t.count,
                t.features.len()
            )));
        }
        if let Some(bad) = t.features.iter().position(|row| row.len() != t.feature_dim) {
            return Err(Error::Malformed(format!(
                "type `{}` row {bad} has width {}, expected {}",
                t.name,
                t.features[bad].len(),
                t.feature_dim
            )));
        }
        let flat: Vec<f64> = t.features.into_iter().flatten().collect();
        node_types.push(NodeType {
            name: t.name,
            features: DMatrix::from_row_slice(t.count, t.feature_dim, &flat),
        });
    }
    let lookup = |name: &str| {
        node_types
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| Error::UnknownType(name.to_string()))
    };
    let mut relations = Vec::with_capacity(record.relations.len());
    for r in record.relations {
        let (src, dst) = (lookup(&r.src)?, lookup(&r.dst)?);
        let (ns, nd) = (node_types[src].count(), node_types[dst].count());
        if let Some(&[u, v]) = r.edges.iter().find(|[u, v]| *u >= ns || *v >= nd) {
            return Err(Error::DanglingEndpoint {
                relation: r.name,
                src: u,
                dst: v,
            });
        }
        let adjacency = CsrMatrix::from_pattern(ns, nd, r.edges.iter().map(|&[u, v]| (u, v)))?;
        relations.push(Relation {
            name: r.name,
            src,
            dst,
            adjacency,
        });
    }
    let target_type = lookup(&record.target_type)?;
    let n_target = node_types[target_type].count();
    if record.labels.len() != n_target {
        return Err(Error::Malformed(format!(
            "missing target-type labels: {} labels for {} `{}` nodes",
            record.labels.len(),
            n_target,
            record.target_type
        )));
    }
    let labels = record
        .labels
        .iter()
        .map(|l| match l {
            None => Ok(Label::Unlabeled),
            Some(0) => Ok(Label::Benign),
            Some(1) => Ok(Label::Anomalous),
            Some(other) => Err(Error::Malformed(format!("label {other} is not 0, 1 or null"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let graph = HeteroGraph {
        node_types,
        relations,
        target_type,
        labels,
        splits: Splits {
            train: record.splits.train,
            val: record.splits.val,
            test: record.splits.test,
        },
    };
    graph.validate()?;
    Ok(graph)
}

fn to_record(graph: &HeteroGraph) -> GraphRecord {
    let name = |i: usize| graph.node_types[i].name.clone();
    GraphRecord {
        node_types: graph
            .node_types
            .iter()
            .map(|t| NodeTypeRecord {
                name: t.name.clone(),
                count: t.count(),
                feature_dim: t.feature_dim(),
                features: t
                    .features
                    .row_iter()
                    .map(|row| row.iter().copied().collect())
                    .collect(),
            })
            .collect(),
        relations: graph
            .relations
            .iter()
            .map(|r| RelationRecord {
                name: r.name.clone(),
                src: name(r.src),
                dst: name(r.dst),
                edges: r.adjacency.iter().map(|(u, v, _)| [u, v]).collect(),
            })
            .collect(),
        target_type: name(graph.target_type),
        labels: graph
            .labels
            .iter()
            .map(|l| match l {
                Label::Anomalous => Some(1),
                Label::Benign => Some(0),
                Label::Unlabeled => None,
            })
            .collect(),
        splits: SplitsRecord {
            train: graph.splits.train.clone(),
            val: graph.splits.val.clone(),
            test: graph.splits.test.clone(),
        },
    }
}

pub fn to_json(graph: &HeteroGraph) -> String {
    serde_json::to_string(&to_record(graph)).expect("graph records always serialize")
}

pub fn save_hetero_graph(graph: &HeteroGraph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json(graph))?;
    Ok(())
}

/// Loads the CSV directory variant described in the module docs.
pub fn load_csv_dir(dir: impl AsRef<Path>) -> Result<HeteroGraph> {
    let dir = dir.as_ref();
    let mut types: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    let mut widths: BTreeMap<String, usize> = BTreeMap::new();
    for path in sorted_csvs(&dir.join("nodes"))? {
        let name = stem(&path)?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(&path)?;
        widths.insert(name.clone(), reader.headers()?.len());
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            rows.push(
                rec.iter()
                    .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Malformed(format!("{}: {e}", path.display()))))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        types.insert(name, rows);
    }
    let mut relations = Vec::new();
    for path in sorted_csvs(&dir.join("edges"))? {
        let name = stem(&path)?;
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(&path)?;
        let headers = reader.headers()?.clone();
        if headers.len() != 2 {
            return Err(Error::Malformed(format!("{}: header must be `src_type,dst_type`", path.display())));
        }
        let mut edges = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| Error::Malformed(format!("{}: {e}", path.display())));
            edges.push([parse(&rec[0])?, parse(&rec[1])?]);
        }
        relations.push(RelationRecord {
            name,
            src: headers[0].trim().to_string(),
            dst: headers[1].trim().to_string(),
            edges,
        });
    }
    let label_path = dir.join("labels.csv");
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(&label_path)?;
    let target_type = reader.headers()?.get(0).unwrap_or_default().trim().to_string();
    let n_target = types.get(&target_type).map(Vec::len).ok_or_else(|| Error::UnknownType(target_type.clone()))?;
    let mut labels = vec![None; n_target];
    let mut splits = SplitsRecord::default();
    for rec in reader.records() {
        let rec = rec?;
        let id: usize = rec[0].trim().parse().map_err(|e| Error::Malformed(format!("labels.csv: {e}")))?;
        if id >= n_target {
            return Err(Error::Malformed(format!("labels.csv: node {id} out of range")));
        }
        labels[id] = match rec.get(1).map(str::trim) {
            Some("") | None => None,
            Some("0") => Some(0),
            Some("1") => Some(1),
            Some(other) => return Err(Error::Malformed(format!("labels.csv: bad label `{other}`"))),
        };
        match rec.get(2).map(str::trim) {
            Some("train") => splits.train.push(id),
            Some("val") => splits.val.push(id),
            Some("test") => splits.test.push(id),
            Some("") | None => {}
            Some(other) => return Err(Error::Malformed(format!("labels.csv: bad split `{other}`"))),
        }
    }
    // Node types keep directory (lexicographic) order.
    let node_types = types
        .into_iter()
        .map(|(name, features)| NodeTypeRecord {
            count: features.len(),
            feature_dim: widths[&name],
            name,
            features,
        })
        .collect();
    from_record(GraphRecord {
        node_types,
        relations,
        target_type,
        labels,
        splits,
    })
}

fn sorted_csvs(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut out: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    out.sort();
    Ok(out)
}

fn stem(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Malformed(format!("bad file name {}", path.display())))
}
