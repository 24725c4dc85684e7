//! Per-node contributions to the high-frequency area and the weights they
//! induce on the anomaly terms of the loss.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hin::ShiftOperator;

/// Denominators `x'ᵀ L x'` below this skip their feature dimension.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Contributions {
    /// One value per node of the operator.
    pub values: Vec<f64>,
    /// Feature dimensions that entered the sum; the values add up to this.
    pub active_dims: usize,
}

/// `c_i = Σ_j x'_{ij} (L x')_{ij} / (x'_jᵀ L x'_j)` over non-degenerate
/// columns `j`.
pub fn node_contributions(x: &DMatrix<f64>, op: &ShiftOperator) -> Result<Contributions> {
    if x.nrows() != op.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} representation rows on {} nodes",
            x.nrows(),
            op.dim()
        )));
    }
    let lx = op.matrix.mul_dense(x);
    let mut values = vec![0.0; x.nrows()];
    let mut active_dims = 0;
    for j in 0..x.ncols() {
        let (col, lcol) = (x.column(j), lx.column(j));
        let den = col.dot(&lcol);
        if den.abs() < DEGENERATE_DENOMINATOR {
            continue;
        }
        active_dims += 1;
        for (c, (a, b)) in values.iter_mut().zip(col.iter().zip(lcol.iter())) {
            *c += a * b / den;
        }
    }
    if active_dims == 0 {
        return Err(Error::ContributionsUndefined);
    }
    Ok(Contributions { values, active_dims })
}

/// Anomaly weight range `[low, high]`; requires `high ≥ low ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcLossConfig {
    pub high: f64,
    pub low: f64,
}

impl CcLossConfig {
    pub fn new(high: f64, low: f64) -> Result<Self> {
        if !(high >= low && low >= 1.0) {
            return Err(Error::Config(format!(
                "weight bounds need high >= low >= 1 (got {high} and {low})"
            )));
        }
        Ok(Self { high, low })
    }
}

/// Benign nodes weigh 1; anomalies interpolate linearly from `high` at the
/// smallest contribution to `low` at the largest. Extremes are taken over
/// every entry of `contributions`.
pub fn cc_weights(contributions: &[f64], anomalous: &[bool], cfg: &CcLossConfig) -> Result<Vec<f64>> {
    if contributions.len() != anomalous.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} contributions for {} labels",
            contributions.len(),
            anomalous.len()
        )));
    }
    CcLossConfig::new(cfg.high, cfg.low)?;
    let c_min = contributions.iter().copied().fold(f64::INFINITY, f64::min);
    let c_max = contributions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = c_max - c_min;
    Ok(contributions
        .iter()
        .zip(anomalous)
        .map(|(&c, &a)| {
            if !a {
                1.0
            } else if span > 0.0 {
                (c_max - c) / span * (cfg.high - cfg.low) + cfg.low
            } else {
                0.5 * (cfg.high + cfg.low)
            }
        })
        .collect())
}
