//! Planted-anomaly heterogeneous graphs.
//!
//! Every node belongs to one of `communities` groups shared across types.
//! Normal features are drawn around a per-type community centre and edges
//! mostly join nodes of the same community. Anomalous target nodes get
//! features shifted along a fixed direction, so their signal disagrees
//! with their neighbourhood. Their edges only ever reach normal nodes, and
//! with probability `rewire_prob` an edge goes to a uniformly drawn normal
//! node regardless of community.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::hin::{HeteroGraph, Label, NodeType, Relation, Splits};
use crate::rng::{named_rng, Rng};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeSpec {
    pub name: String,
    pub count: usize,
    pub feature_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    pub name: String,
    pub src: String,
    pub dst: String,
    /// Mean number of edges per node of the target-side endpoint type (the
    /// source when neither side is the target type).
    pub avg_degree: f64,
    /// Name of the transposed relation to add, if any.
    #[serde(default)]
    pub reverse: Option<String>,
}

fn default_communities() -> usize {
    4
}
fn default_homophily() -> f64 {
    0.9
}
fn default_noise() -> f64 {
    1.0
}
fn default_center_scale() -> f64 {
    2.0
}
fn default_split() -> [f64; 3] {
    [0.4, 0.2, 0.4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub target: String,
    pub node_types: Vec<TypeSpec>,
    pub relations: Vec<RelationSpec>,
    pub anomaly_rate: f64,
    /// Length of the anomaly feature shift.
    pub feature_shift: f64,
    /// Probability that an anomaly's edge goes to a random normal node.
    pub rewire_prob: f64,
    #[serde(default = "default_communities")]
    pub communities: usize,
    /// Probability that a normal edge stays inside its community.
    #[serde(default = "default_homophily")]
    pub homophily: f64,
    /// Standard deviation of feature noise.
    #[serde(default = "default_noise")]
    pub noise: f64,
    /// Spread of community centres.
    #[serde(default = "default_center_scale")]
    pub center_scale: f64,
    /// Train/validation/test fractions, applied per class.
    #[serde(default = "default_split")]
    pub split: [f64; 3],
}

impl SyntheticSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SyntheticSpec = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path.as_ref())?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    fn type_of(&self, name: &str) -> Result<usize> {
        self.node_types
            .iter()
            .position(|t| t.name == name)
            .ok_or_else(|| Error::UnknownType(name.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.node_types.is_empty() {
            return bad("at least one node type is required".into());
        }
        for (k, t) in self.node_types.iter().enumerate() {
            if t.count == 0 || t.feature_dim == 0 {
                return bad(format!("node type `{}` needs nodes and features", t.name));
            }
            if self.node_types[..k].iter().any(|o| o.name == t.name) {
                return bad(format!("duplicate node type `{}`", t.name));
            }
        }
        self.type_of(&self.target)?;
        let mut names: Vec<&str> = Vec::new();
        for r in &self.relations {
            self.type_of(&r.src)?;
            self.type_of(&r.dst)?;
            if !(r.avg_degree >= 0.0 && r.avg_degree.is_finite()) {
                return bad(format!("relation `{}` has an invalid degree", r.name));
            }
            names.push(&r.name);
            names.extend(r.reverse.as_deref());
        }
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != names.len() {
            return bad("relation names must be unique".into());
        }
        if !(0.0..0.5).contains(&self.anomaly_rate) {
            return bad(format!("anomaly_rate {} must lie in [0, 0.5)", self.anomaly_rate));
        }
        for (name, p) in [("rewire_prob", self.rewire_prob), ("homophily", self.homophily)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1]"));
            }
        }
        if self.communities == 0 {
            return bad("communities must be positive".into());
        }
        if self.feature_shift < 0.0 || self.noise < 0.0 || self.center_scale < 0.0 {
            return bad("feature_shift, noise and center_scale must be nonnegative".into());
        }
        if self.split.iter().any(|&f| f < 0.0) || (self.split.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("split fractions must be nonnegative and sum to 1".into());
        }
        Ok(())
    }
}

fn gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Picks a node of `members` (indices into a type) uniformly.
fn pick(rng: &mut Rng, members: &[usize]) -> Option<usize> {
    if members.is_empty() {
        None
    } else {
        Some(members[rng.random_range(0..members.len())])
    }
}

struct TypeState {
    community: Vec<usize>,
    by_community: Vec<Vec<usize>>,
    outside: Vec<Vec<usize>>,
    normal: Vec<usize>,
}

impl TypeState {
    fn new(community: Vec<usize>, k: usize, excluded: &[bool]) -> Self {
        let mut by_community = vec![Vec::new(); k];
        for (i, &c) in community.iter().enumerate() {
            if !excluded[i] {
                by_community[c].push(i);
            }
        }
        let outside = (0..k)
            .map(|c| (0..k).filter(|&o| o != c).flat_map(|o| by_community[o].iter().copied()).collect())
            .collect();
        let normal = (0..community.len()).filter(|&i| !excluded[i]).collect();
        Self {
            community,
            by_community,
            outside,
            normal,
        }
    }
}

/// Deterministic in `spec` (including its seed).
pub fn generate_synthetic_hin(spec: &SyntheticSpec) -> Result<HeteroGraph> {
    spec.validate()?;
    let target = spec.type_of(&spec.target)?;
    let k = spec.communities;
    let n_target = spec.node_types[target].count;
    let n_anom = (spec.anomaly_rate * n_target as f64).round() as usize;

    let mut rng = named_rng(spec.seed, "synth/anomalies");
    let mut is_anom = vec![false; n_target];
    for i in sample(&mut rng, n_target, n_anom) {
        is_anom[i] = true;
    }

    let mut node_types = Vec::with_capacity(spec.node_types.len());
    let mut states = Vec::with_capacity(spec.node_types.len());
    for (t, ts) in spec.node_types.iter().enumerate() {
        let mut rng = named_rng(spec.seed, &format!("synth/features/{}", ts.name));
        let community: Vec<usize> = (0..ts.count).map(|_| rng.random_range(0..k)).collect();
        let centers = gaussian_matrix(&mut rng, k, ts.feature_dim, spec.center_scale);
        let mut features = gaussian_matrix(&mut rng, ts.count, ts.feature_dim, spec.noise);
        for (i, &c) in community.iter().enumerate() {
            let mut row = features.row_mut(i);
            row += centers.row(c);
        }
        let excluded = if t == target { is_anom.clone() } else { vec![false; ts.count] };
        if t == target {
            let dir: DVector<f64> = DVector::from_fn(ts.feature_dim, |_, _| rng.sample(StandardNormal));
            let dir = dir.normalize() * spec.feature_shift;
            for i in (0..ts.count).filter(|&i| is_anom[i]) {
                let mut row = features.row_mut(i);
                row += dir.transpose();
            }
        }
        states.push(TypeState::new(community, k, &excluded));
        node_types.push(NodeType {
            name: ts.name.clone(),
            features,
        });
    }

    let mut relations = Vec::new();
    for rs in &spec.relations {
        let (src, dst) = (spec.type_of(&rs.src)?, spec.type_of(&rs.dst)?);
        let mut rng = named_rng(spec.seed, &format!("synth/edges/{}", rs.name));
        // The anchor side is the target type when present.
        let (anchor, other, anchor_is_src) = if dst == target && src != target {
            (dst, src, false)
        } else {
            (src, dst, true)
        };
        let n_anchor = spec.node_types[anchor].count;
        let edges = (rs.avg_degree * n_anchor as f64).round() as usize;
        let mut pairs = Vec::with_capacity(edges);
        for _ in 0..edges {
            let u = rng.random_range(0..n_anchor);
            let cu = states[anchor].community[u];
            let anomalous = anchor == target && is_anom[u];
            let pool = if anomalous && rng.random::<f64>() < spec.rewire_prob {
                &states[other].normal
            } else if rng.random::<f64>() < spec.homophily {
                &states[other].by_community[cu]
            } else {
                &states[other].outside[cu]
            };
            let Some(v) = pick(&mut rng, pool) else { continue };
            if anchor == other && u == v {
                continue;
            }
            pairs.push(if anchor_is_src { (u, v) } else { (v, u) });
        }
        let (ns, nd) = (spec.node_types[src].count, spec.node_types[dst].count);
        let adjacency = CsrMatrix::from_pattern(ns, nd, pairs)?;
        let adjacency = if src == dst { adjacency.symmetrized()? } else { adjacency };
        if let Some(rev) = &rs.reverse {
            relations.push(Relation {
                name: rev.clone(),
                src: dst,
                dst: src,
                adjacency: adjacency.transpose(),
            });
        }
        relations.push(Relation {
            name: rs.name.clone(),
            src,
            dst,
            adjacency,
        });
    }
    relations.sort_by(|a, b| a.name.cmp(&b.name));

    let labels: Vec<Label> = is_anom
        .iter()
        .map(|&a| if a { Label::Anomalous } else { Label::Benign })
        .collect();
    let mut splits = Splits::default();
    let mut rng = named_rng(spec.seed, "synth/splits");
    for class in [true, false] {
        let mut ids: Vec<usize> = (0..n_target).filter(|&i| is_anom[i] == class).collect();
        ids.shuffle(&mut rng);
        let n = ids.len();
        let n_train = (spec.split[0] * n as f64).round() as usize;
        let n_val = ((spec.split[1] * n as f64).round() as usize).min(n - n_train);
        splits.train.extend(&ids[..n_train]);
        splits.val.extend(&ids[n_train..n_train + n_val]);
        splits.test.extend(&ids[n_train + n_val..]);
    }
    splits.train.sort_unstable();
    splits.val.sort_unstable();
    splits.test.sort_unstable();

    let graph = HeteroGraph {
        node_types,
        relations,
        target_type: target,
        labels,
        splits,
    };
    graph.validate()?;
    Ok(graph)
}

/// The three-type benchmark used by the detection acceptance check: 400
/// target items, 120 users and 80 shops, 5% anomalies.
pub fn benchmark_spec(seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        seed,
        target: "item".into(),
        node_types: vec![
            TypeSpec {
                name: "item".into(),
                count: 400,
                feature_dim: 8,
            },
            TypeSpec {
                name: "user".into(),
                count: 120,
                feature_dim: 6,
            },
            TypeSpec {
                name: "shop".into(),
                count: 80,
                feature_dim: 6,
            },
        ],
        relations: vec![
            RelationSpec {
                name: "similar".into(),
                src: "item".into(),
                dst: "item".into(),
                avg_degree: 3.0,
                reverse: None,
            },
            RelationSpec {
                name: "bought_by".into(),
                src: "item".into(),
                dst: "user".into(),
                avg_degree: 3.0,
                reverse: Some("buys".into()),
            },
            RelationSpec {
                name: "sold_by".into(),
                src: "item".into(),
                dst: "shop".into(),
                avg_degree: 1.0,
                reverse: Some("sells".into()),
            },
        ],
        anomaly_rate: 0.05,
        feature_shift: 8.0,
        rewire_prob: 0.15,
        communities: 16,
        homophily: default_homophily(),
        noise: default_noise(),
        center_scale: 4.0,
        split: default_split(),
    }
}

/// Training settings paired with [`benchmark_spec`].
pub fn benchmark_run_config(seed: u64) -> RunConfig {
    RunConfig {
        aligned_dim: 32,
        mlp_layers: 2,
        learning_rate: 0.006,
        epochs: 200,
        seed,
        ..RunConfig::default()
    }
}
