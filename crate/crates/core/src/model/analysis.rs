//! Per-type meta-path analysis: which meta-path graphs exist, how they rank
//! by high-frequency area, and which filter each division receives.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::seq::index::sample;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::hin::{
    enumerate_meta_paths, laplacian, materialize_meta_path_graph, HeteroGraph, MetaPath, OperatorKind,
    ShiftOperator,
};
use crate::rng::named_rng;
use crate::sparse::CsrMatrix;
use crate::spectral::{
    assign_filter, graph_s_high, select_representatives, spectral_profile, Division, SpectralProfile,
};

#[derive(Debug, Clone)]
pub struct AnalyzedPath {
    pub path: MetaPath,
    pub operator: ShiftOperator,
    pub s_high: f64,
    pub division: Division,
    pub edges: usize,
}

#[derive(Debug, Clone)]
pub struct Representative {
    pub division: Division,
    /// Index into [`TypeAnalysis::paths`].
    pub path: usize,
    pub profile: SpectralProfile,
    /// Node count the profile was computed on (smaller than the graph when subsampled).
    pub profiled_nodes: usize,
    pub filter_index: usize,
}

#[derive(Debug, Clone)]
pub struct TypeAnalysis {
    pub node_type: usize,
    pub paths: Vec<AnalyzedPath>,
    /// Meta-paths whose materialized graph has no edges.
    pub excluded: Vec<MetaPath>,
    pub representatives: Vec<Representative>,
}

impl TypeAnalysis {
    /// `(division, filter index)` of every division, low to high.
    pub fn assignments(&self) -> Vec<(Division, usize)> {
        self.representatives.iter().map(|r| (r.division, r.filter_index)).collect()
    }

    pub fn shared_operator(&self, path: usize) -> Arc<CsrMatrix> {
        Arc::new(self.paths[path].operator.matrix.clone())
    }
}

/// Candidates whose fitted degree `i − 1 + d` stays within the cap.
pub fn admissible_candidates(config: &RunConfig) -> Result<Vec<usize>> {
    let kept: Vec<usize> = config
        .candidates
        .iter()
        .copied()
        .filter(|&i| i - 1 + config.poly_degree <= config.max_degree)
        .collect();
    if kept.is_empty() {
        return Err(Error::Config(format!(
            "no candidate fits within max_degree {}",
            config.max_degree
        )));
    }
    Ok(kept)
}

/// Profiles `adjacency` with signal `x`, on a seeded induced subgraph of
/// `cap` nodes when the graph is larger than the cap.
fn profile_capped(
    adjacency: &CsrMatrix,
    x: &DMatrix<f64>,
    kind: OperatorKind,
    config: &RunConfig,
    stream: &str,
) -> Result<(SpectralProfile, usize)> {
    let n = adjacency.nrows();
    if n <= config.eig_cap {
        let op = laplacian(adjacency, kind)?;
        return Ok((spectral_profile(&op, x, config.bands.min(n), config.eig_cap)?, n));
    }
    let mut rng = named_rng(config.seed, stream);
    let mut keep = sample(&mut rng, n, config.eig_cap).into_vec();
    keep.sort_unstable();
    let sub = adjacency.induced(&keep);
    let xs = x.select_rows(keep.iter());
    let op = laplacian(&sub, kind)?;
    let k = config.bands.min(keep.len());
    Ok((spectral_profile(&op, &xs, k, config.eig_cap)?, keep.len()))
}

/// Enumerates, materializes, ranks and assigns filters for the meta-paths
/// anchored at `node_type`. Returns `None` when no meta-path graph has edges.
pub fn analyze_type(graph: &HeteroGraph, node_type: usize, config: &RunConfig) -> Result<Option<TypeAnalysis>> {
    let candidates = admissible_candidates(config)?;
    let x = &graph.node_types[node_type].features;
    let mut paths = Vec::new();
    let mut excluded = Vec::new();
    for path in enumerate_meta_paths(graph, node_type, config.min_path_len, config.max_path_len)? {
        let mpg = materialize_meta_path_graph(graph, &path)?;
        if mpg.is_empty() {
            excluded.push(path);
            continue;
        }
        let operator = laplacian(&mpg.adjacency, config.operator)?;
        let s_high = match graph_s_high(&operator, x) {
            Ok(v) => v,
            Err(Error::ZeroSignal) => 0.0,
            Err(e) => return Err(e),
        };
        paths.push(AnalyzedPath {
            path,
            operator,
            s_high,
            division: Division::All,
            edges: mpg.adjacency.nnz() / 2,
        });
    }
    if paths.is_empty() {
        return Ok(None);
    }
    let scores: Vec<f64> = paths.iter().map(|p| p.s_high).collect();
    let selection = select_representatives(&scores)?;
    for (p, div) in paths.iter_mut().zip(&selection.divisions) {
        p.division = *div;
    }
    let mut representatives = Vec::new();
    for &(division, idx) in &selection.representatives {
        let adjacency = materialize_meta_path_graph(graph, &paths[idx].path)?.adjacency;
        let stream = format!("eig-subsample/{node_type}/{idx}");
        let (profile, profiled_nodes) = profile_capped(&adjacency, x, config.operator, config, &stream)?;
        let filter_index = assign_filter(profile.band_max, &candidates)?;
        representatives.push(Representative {
            division,
            path: idx,
            profile,
            profiled_nodes,
            filter_index,
        });
    }
    Ok(Some(TypeAnalysis {
        node_type,
        paths,
        excluded,
        representatives,
    }))
}
