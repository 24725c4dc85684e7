//! Checkpoint files: one JSON header line followed by every parameter in
//! declaration order as little-endian `f64`, column-major.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ChiGadModel, Detector};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::hin::HeteroGraph;

const FORMAT: &str = "chigad-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamShape {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub format: String,
    pub schema_hash: String,
    pub config: RunConfig,
    pub params: Vec<ParamShape>,
}

pub fn encode(model: &ChiGadModel) -> Vec<u8> {
    let header = CheckpointHeader {
        format: FORMAT.to_string(),
        schema_hash: model.schema_hash.clone(),
        config: model.config.clone(),
        params: model
            .param_names
            .iter()
            .zip(model.parameters())
            .map(|(name, p)| ParamShape {
                name: name.clone(),
                rows: p.nrows(),
                cols: p.ncols(),
            })
            .collect(),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    for p in model.parameters() {
        for v in p.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<(CheckpointHeader, Vec<DMatrix<f64>>)> {
    let split = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Malformed("checkpoint has no header line".into()))?;
    let header: CheckpointHeader = serde_json::from_slice(&bytes[..split])?;
    if header.format != FORMAT {
        return Err(Error::Malformed(format!("unsupported checkpoint format `{}`", header.format)));
    }
    let body = &bytes[split + 1..];
    let expected: usize = header.params.iter().map(|p| p.rows * p.cols * 8).sum();
    if body.len() != expected {
        return Err(Error::Malformed(format!(
            "checkpoint body holds {} bytes, header describes {expected}",
            body.len()
        )));
    }
    let mut values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let params = header
        .params
        .iter()
        .map(|s| DMatrix::from_iterator(s.rows, s.cols, values.by_ref().take(s.rows * s.cols)))
        .collect();
    Ok((header, params))
}

pub fn save(model: &ChiGadModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode(model))?;
    Ok(())
}

/// Rebuilds the model for `graph` from the stored config and loads the
/// stored parameters. Fails when the graph schema differs from the one the
/// checkpoint was trained on.
pub fn load(path: impl AsRef<Path>, graph: &HeteroGraph) -> Result<ChiGadModel> {
    let bytes = std::fs::read(path)?;
    let (header, params) = decode(&bytes)?;
    let found = graph.schema_hash();
    if found != header.schema_hash {
        return Err(Error::SchemaMismatch {
            expected: header.schema_hash,
            found,
        });
    }
    let mut model = ChiGadModel::build(graph, &header.config)?;
    let names: Vec<&str> = header.params.iter().map(|p| p.name.as_str()).collect();
    if names != model.param_names.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::Malformed("checkpoint parameters do not match the rebuilt model".into()));
    }
    model.set_parameters(params)?;
    Ok(model)
}
