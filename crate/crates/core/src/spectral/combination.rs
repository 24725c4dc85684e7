//! Numerical search for a linear combination of signals with maximal
//! high-frequency area. Used to check that linear alignment can retain the
//! largest individual `S_high`.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hin::ShiftOperator;
use crate::rng::named_rng;

fn quotient(weights: &[f64], gram_l: &DMatrix<f64>, gram: &DMatrix<f64>) -> f64 {
    let w = DVector::from_column_slice(weights);
    let den = w.dot(&(gram * &w));
    if den <= 1e-300 {
        return f64::NEG_INFINITY;
    }
    w.dot(&(gram_l * &w)) / den
}

/// Random restarts followed by coordinate pattern search over weight
/// vectors. Returns the best weights and their `S_high`.
pub fn combination_search(
    signals: &[DVector<f64>],
    op: &ShiftOperator,
    trials: usize,
    seed: u64,
) -> Result<(Vec<f64>, f64)> {
    let k = signals.len();
    if k < 2 {
        return Err(Error::InvalidArgument("need at least two signals".into()));
    }
    let n = op.dim();
    if signals.iter().any(|s| s.len() != n) {
        return Err(Error::DimensionMismatch("signal length differs from operator size".into()));
    }
    if signals.iter().any(|s| s.norm() == 0.0) {
        return Err(Error::ZeroSignal);
    }
    // The objective only needs the k×k Gram matrices.
    let x = DMatrix::from_columns(signals);
    let lx = op.matrix.mul_dense(&x);
    let gram_l = x.transpose() * lx;
    let gram = x.transpose() * &x;

    let mut rng = named_rng(seed, "combination");
    let mut starts: Vec<Vec<f64>> = (0..k)
        .map(|j| (0..k).map(|m| if m == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..trials {
        starts.push((0..k).map(|_| rng.sample(StandardNormal)).collect());
    }
    let mut best_w = starts[0].clone();
    let mut best = f64::NEG_INFINITY;
    for start in starts {
        let (w, v) = refine(start, &gram_l, &gram);
        if v > best {
            best = v;
            best_w = w;
        }
    }
    Ok((best_w, best))
}

fn refine(mut w: Vec<f64>, gram_l: &DMatrix<f64>, gram: &DMatrix<f64>) -> (Vec<f64>, f64) {
    let mut value = quotient(&w, gram_l, gram);
    let mut step = 1.0;
    while step > 1e-9 {
        let mut improved = false;
        for j in 0..w.len() {
            for dir in [step, -step] {
                let mut trial = w.clone();
                trial[j] += dir;
                let v = quotient(&trial, gram_l, gram);
                if v > value {
                    value = v;
                    w = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
        // Keep the scale bounded; the quotient is scale invariant.
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            w.iter_mut().for_each(|v| *v /= norm);
        }
    }
    (w, value)
}
