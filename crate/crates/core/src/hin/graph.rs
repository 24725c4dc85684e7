use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Anomalous,
    Benign,
    Unlabeled,
}

impl Label {
    pub fn as_target(self) -> Option<f64> {
        match self {
            Label::Anomalous => Some(1.0),
            Label::Benign => Some(0.0),
            Label::Unlabeled => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeType {
    pub name: String,
    /// `count × feature_dim`, one row per node in file order.
    pub features: DMatrix<f64>,
}

impl NodeType {
    pub fn count(&self) -> usize {
        self.features.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }
}

/// A typed relation. The adjacency is `|V_src| × |V_dst|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub name: String,
    pub src: usize,
    pub dst: usize,
    pub adjacency: CsrMatrix,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// A heterogeneous information network with one labelled target type.
#[derive(Debug, Clone, PartialEq)]
pub struct HeteroGraph {
    pub node_types: Vec<NodeType>,
    pub relations: Vec<Relation>,
    pub target_type: usize,
    pub labels: Vec<Label>,
    pub splits: Splits,
}

impl HeteroGraph {
    /// Checks every structural invariant. Constructors call this before
    /// handing a graph out.
    pub fn validate(&self) -> Result<()> {
        if self.target_type >= self.node_types.len() {
            return Err(Error::Malformed("target type index out of range".into()));
        }
        for rel in &self.relations {
            let (src, dst) = match (self.node_types.get(rel.src), self.node_types.get(rel.dst)) {
                (Some(s), Some(d)) => (s, d),
                _ => {
                    return Err(Error::Malformed(format!(
                        "relation `{}` references a missing node type",
                        rel.name
                    )))
                }
            };
            if rel.adjacency.nrows() != src.count() || rel.adjacency.ncols() != dst.count() {
                return Err(Error::DimensionMismatch(format!(
                    "relation `{}` is {}x{}, expected {}x{}",
                    rel.name,
                    rel.adjacency.nrows(),
                    rel.adjacency.ncols(),
                    src.count(),
                    dst.count()
                )));
            }
        }
        let n_target = self.node_types[self.target_type].count();
        if self.labels.len() != n_target {
            return Err(Error::Malformed(format!(
                "{} labels for {} target nodes",
                self.labels.len(),
                n_target
            )));
        }
        let mut seen = vec![false; n_target];
        for &id in self.splits.train.iter().chain(&self.splits.val).chain(&self.splits.test) {
            if id >= n_target {
                return Err(Error::Malformed(format!("split id {id} out of range")));
            }
            if seen[id] {
                return Err(Error::MaskOverlap(id));
            }
            seen[id] = true;
            if self.labels[id] == Label::Unlabeled {
                return Err(Error::MissingLabel(id));
            }
        }
        Ok(())
    }

    pub fn type_index(&self, name: &str) -> Result<usize> {
        self.node_types
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| Error::UnknownType(name.to_string()))
    }

    pub fn target(&self) -> &NodeType {
        &self.node_types[self.target_type]
    }

    pub fn total_nodes(&self) -> usize {
        self.node_types.iter().map(NodeType::count).sum()
    }

    /// Global index of the first node of each type, in type order.
    pub fn type_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.node_types.len());
        let mut acc = 0;
        for t in &self.node_types {
            offsets.push(acc);
            acc += t.count();
        }
        offsets
    }

    /// 0/1 targets for a list of target-node ids. Callers pass split ids,
    /// which are guaranteed labelled by `validate`.
    pub fn targets(&self, ids: &[usize]) -> Vec<f64> {
        ids.iter()
            .map(|&i| self.labels[i].as_target().expect("split nodes are labelled"))
            .collect()
    }

    /// Hash of the schema: type names, counts, feature widths, relation
    /// endpoints and the target type. Feature values and edges are excluded.
    pub fn schema_hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.node_types {
            h.update(format!("type:{}:{}:{};", t.name, t.count(), t.feature_dim()).as_bytes());
        }
        for r in &self.relations {
            h.update(format!("rel:{}:{}:{};", r.name, r.src, r.dst).as_bytes());
        }
        h.update(format!("target:{}", self.target_type).as_bytes());
        hex::encode(h.finalize())
    }
}
