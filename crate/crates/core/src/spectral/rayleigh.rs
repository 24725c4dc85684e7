use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hin::ShiftOperator;

/// High-frequency area `xᵀLx / xᵀx`.
pub fn s_high(x: &DVector<f64>, op: &ShiftOperator) -> Result<f64> {
    if x.len() != op.dim() {
        return Err(Error::DimensionMismatch(format!(
            "signal of length {} on operator of size {}",
            x.len(),
            op.dim()
        )));
    }
    let norm2 = x.dot(x);
    if norm2 == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let lx = op.matrix.mul_dense(&DMatrix::from_column_slice(x.len(), 1, x.as_slice()));
    Ok(x.dot(&lx.column(0)) / norm2)
}

/// Mean of the per-column high-frequency areas over the nonzero columns of `x`.
pub fn graph_s_high(op: &ShiftOperator, x: &DMatrix<f64>) -> Result<f64> {
    if x.nrows() != op.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows on operator of size {}",
            x.nrows(),
            op.dim()
        )));
    }
    let lx = op.matrix.mul_dense(x);
    let mut total = 0.0;
    let mut count = 0usize;
    for j in 0..x.ncols() {
        let col = x.column(j);
        let norm2 = col.dot(&col);
        if norm2 == 0.0 {
            continue;
        }
        total += col.dot(&lx.column(j)) / norm2;
        count += 1;
    }
    if count == 0 {
        return Err(Error::ZeroSignal);
    }
    Ok(total / count as f64)
}
