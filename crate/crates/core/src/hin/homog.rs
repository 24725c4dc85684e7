//! Collapsing a heterogeneous graph into a homogeneous one.

use super::graph::HeteroGraph;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// A symmetric, simple graph. `origin[k]` is `(type, local index)` of node `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomoGraph {
    pub adjacency: CsrMatrix,
    pub origin: Vec<(usize, usize)>,
}

impl HomoGraph {
    pub fn node_count(&self) -> usize {
        self.adjacency.nrows()
    }

    /// Undirected edge count.
    pub fn edge_count(&self) -> usize {
        self.adjacency.nnz() / 2
    }
}

/// Keeps every node of every type (global order = type order, then file
/// order) and every edge that appears in at least one relation.
/// Self-loops are dropped.
pub fn degenerate_method1(graph: &HeteroGraph) -> HomoGraph {
    let offsets = graph.type_offsets();
    let n = graph.total_nodes();
    let pairs = graph.relations.iter().flat_map(|rel| {
        let (os, od) = (offsets[rel.src], offsets[rel.dst]);
        rel.adjacency.iter().map(move |(u, v, _)| (os + u, od + v))
    });
    let adjacency = CsrMatrix::from_pattern(n, n, pairs.collect::<Vec<_>>())
        .expect("offsets stay in range")
        .without_diagonal()
        .symmetrized()
        .expect("square");
    let origin = graph
        .node_types
        .iter()
        .enumerate()
        .flat_map(|(t, nt)| (0..nt.count()).map(move |i| (t, i)))
        .collect();
    HomoGraph { adjacency, origin }
}

/// Keeps only nodes of `target`. Two target nodes are joined when a
/// target-to-target relation links them, or when they share a neighbour of
/// another type through any pair of relations incident to that type (every
/// length-2 meta-path `target → o → target` read in either direction).
pub fn degenerate_method2(graph: &HeteroGraph, target: usize) -> Result<HomoGraph> {
    if target >= graph.node_types.len() {
        return Err(Error::UnknownType(format!("#{target}")));
    }
    let n = graph.node_types[target].count();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    // Incidence matrices oriented target × other, grouped by the other type.
    let mut incidences: Vec<(usize, CsrMatrix)> = Vec::new();
    for rel in &graph.relations {
        match (rel.src == target, rel.dst == target) {
            (true, true) => pairs.extend(rel.adjacency.iter().map(|(u, v, _)| (u, v))),
            (true, false) => incidences.push((rel.dst, rel.adjacency.binarized())),
            (false, true) => incidences.push((rel.src, rel.adjacency.transpose().binarized())),
            (false, false) => {}
        }
    }
    for (a, (type_a, inc_a)) in incidences.iter().enumerate() {
        for (type_b, inc_b) in &incidences[a..] {
            if type_a != type_b {
                continue;
            }
            let co = inc_a.matmul(&inc_b.transpose())?;
            pairs.extend(co.iter().map(|(u, v, _)| (u, v)));
        }
    }
    let adjacency = CsrMatrix::from_pattern(n, n, pairs)?
        .without_diagonal()
        .symmetrized()?;
    Ok(HomoGraph {
        adjacency,
        origin: (0..n).map(|i| (target, i)).collect(),
    })
}
