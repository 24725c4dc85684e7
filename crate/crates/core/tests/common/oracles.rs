//! Brute-force references for meta-path enumeration and materialization.

use chigad::hin::{HeteroGraph, Label, MetaPath, NodeType, Relation, Splits};
use chigad::rng::named_rng;
use nalgebra::DMatrix;

use super::{gaussian, random_bipartite};

/// A graph over `counts.len()` types with the given `(src, dst)` relations
/// and random edges.
pub fn random_graph(seed: u64, counts: &[usize], schema: &[(usize, usize)], p: f64) -> HeteroGraph {
    let mut rng = named_rng(seed, "test/random-graph");
    let node_types = counts
        .iter()
        .enumerate()
        .map(|(t, &n)| NodeType {
            name: format!("t{t}"),
            features: gaussian(&mut rng, n, 2),
        })
        .collect();
    let relations = schema
        .iter()
        .enumerate()
        .map(|(r, &(s, d))| Relation {
            name: format!("r{r}"),
            src: s,
            dst: d,
            adjacency: random_bipartite(&mut rng, counts[s], counts[d], p),
        })
        .collect();
    HeteroGraph {
        node_types,
        relations,
        target_type: 0,
        labels: vec![Label::Unlabeled; counts[0]],
        splits: Splits::default(),
    }
}

/// Every relation-id sequence of length `l` whose types chain from `anchor`
/// back to `anchor`, by brute force over all `R^l` sequences.
pub fn oracle_paths(schema: &[(usize, usize)], anchor: usize, min_len: usize, max_len: usize) -> Vec<Vec<usize>> {
    let r = schema.len();
    let mut out = Vec::new();
    for l in min_len..=max_len {
        for code in 0..r.pow(l as u32) {
            let seq: Vec<usize> = (0..l).map(|k| (code / r.pow(k as u32)) % r).collect();
            let mut at = anchor;
            let mut ok = true;
            for &rel in &seq {
                if schema[rel].0 != at {
                    ok = false;
                    break;
                }
                at = schema[rel].1;
            }
            if ok && at == anchor {
                out.push(seq);
            }
        }
    }
    out.sort();
    out
}

/// Binarized walk counts along `path`, diagonal cleared, symmetrized.
pub fn walk_oracle(graph: &HeteroGraph, path: &MetaPath) -> DMatrix<f64> {
    let n = graph.node_types[path.anchor()].count();
    let mut reach = DMatrix::zeros(n, n);
    for start in 0..n {
        let mut frontier = vec![start];
        for &r in &path.relations {
            let adj = graph.relations[r].adjacency.to_dense();
            let mut next = Vec::new();
            for &u in &frontier {
                for v in 0..adj.ncols() {
                    if adj[(u, v)] != 0.0 {
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        for v in frontier {
            if v != start {
                reach[(start, v)] = 1.0;
                reach[(v, start)] = 1.0;
            }
        }
    }
    reach
}
