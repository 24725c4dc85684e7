use std::fmt;

use super::graph::HeteroGraph;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// An alternating sequence of node types and relations that starts and
/// ends on the same type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MetaPath {
    /// `l + 1` node type indices.
    pub node_types: Vec<usize>,
    /// `l` relation indices.
    pub relations: Vec<usize>,
}

impl MetaPath {
    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn anchor(&self) -> usize {
        self.node_types[0]
    }

    /// Human readable form, e.g. `author-compose-paper-composed_by-author`.
    pub fn display<'a>(&'a self, graph: &'a HeteroGraph) -> impl fmt::Display + 'a {
        PathDisplay { path: self, graph }
    }
}

struct PathDisplay<'a> {
    path: &'a MetaPath,
    graph: &'a HeteroGraph,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.graph.node_types[self.path.node_types[0]].name)?;
        for (k, &r) in self.path.relations.iter().enumerate() {
            let next = self.path.node_types[k + 1];
            write!(
                f,
                "-{}-{}",
                self.graph.relations[r].name, self.graph.node_types[next].name
            )?;
        }
        Ok(())
    }
}

/// A homogeneous graph over the anchor type induced by a meta-path.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaPathGraph {
    pub anchor_type: usize,
    pub adjacency: CsrMatrix,
    pub source_path: MetaPath,
}

impl MetaPathGraph {
    pub fn is_empty(&self) -> bool {
        self.adjacency.nnz() == 0
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.nrows()
    }
}

/// Every schema walk from `anchor` back to `anchor` whose length lies in
/// `min_len..=max_len`. Relations are traversed from source to destination
/// type only. Output is sorted lexicographically by relation-id sequence.
pub fn enumerate_meta_paths(
    graph: &HeteroGraph,
    anchor: usize,
    min_len: usize,
    max_len: usize,
) -> Result<Vec<MetaPath>> {
    if anchor >= graph.node_types.len() {
        return Err(Error::UnknownType(format!("#{anchor}")));
    }
    if min_len == 0 || min_len > max_len {
        return Err(Error::InvalidArgument(format!(
            "meta-path length range {min_len}..={max_len} needs 1 <= min <= max"
        )));
    }
    // Outgoing relations per type, in relation-id order.
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); graph.node_types.len()];
    for (r, rel) in graph.relations.iter().enumerate() {
        outgoing[rel.src].push(r);
    }
    let mut out = Vec::new();
    let mut rels = Vec::with_capacity(max_len);
    let mut types = vec![anchor];
    walk(graph, &outgoing, anchor, min_len, max_len, &mut types, &mut rels, &mut out);
    out.sort_by(|a: &MetaPath, b: &MetaPath| a.relations.cmp(&b.relations));
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    graph: &HeteroGraph,
    outgoing: &[Vec<usize>],
    anchor: usize,
    min_len: usize,
    max_len: usize,
    types: &mut Vec<usize>,
    rels: &mut Vec<usize>,
    out: &mut Vec<MetaPath>,
) {
    let here = *types.last().unwrap();
    if !rels.is_empty() && here == anchor && rels.len() >= min_len {
        out.push(MetaPath {
            node_types: types.clone(),
            relations: rels.clone(),
        });
    }
    if rels.len() == max_len {
        return;
    }
    for &r in &outgoing[here] {
        rels.push(r);
        types.push(graph.relations[r].dst);
        walk(graph, outgoing, anchor, min_len, max_len, types, rels, out);
        types.pop();
        rels.pop();
    }
}

/// Binarized reachability along `path`, diagonal cleared, symmetrized by
/// union with its transpose.
pub fn materialize_meta_path_graph(graph: &HeteroGraph, path: &MetaPath) -> Result<MetaPathGraph> {
    if path.is_empty() || path.node_types.len() != path.len() + 1 {
        return Err(Error::InvalidArgument("malformed meta-path".into()));
    }
    if path.anchor() != *path.node_types.last().unwrap() {
        return Err(Error::InvalidArgument("meta-path must end on its anchor type".into()));
    }
    let mut reach: Option<CsrMatrix> = None;
    for (k, &r) in path.relations.iter().enumerate() {
        let rel = graph
            .relations
            .get(r)
            .ok_or_else(|| Error::InvalidArgument(format!("relation #{r} not in graph")))?;
        if rel.src != path.node_types[k] || rel.dst != path.node_types[k + 1] {
            return Err(Error::InvalidArgument(format!(
                "relation `{}` does not connect step {k} of the meta-path",
                rel.name
            )));
        }
        let step = rel.adjacency.binarized();
        reach = Some(match reach {
            None => step,
            // Binarizing every step keeps the support of the full product
            // while bounding intermediate walk counts.
            Some(acc) => acc.matmul(&step)?.binarized(),
        });
    }
    let reach = reach.expect("non-empty path");
    if !reach.is_square() {
        return Err(Error::DimensionMismatch("meta-path product is not square".into()));
    }
    Ok(MetaPathGraph {
        anchor_type: path.anchor(),
        adjacency: reach.without_diagonal().symmetrized()?,
        source_path: path.clone(),
    })
}
