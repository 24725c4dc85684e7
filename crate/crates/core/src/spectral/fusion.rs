//! Fusion of the division filters into one response per meta-path graph.
//!
//! Each division filter is sampled on a uniform grid over `[0, 2]`, scaled
//! by its division weight (1 for the graph's own division, `w_d` otherwise)
//! and the three sampled responses are linearly convolved. The result is
//! supported on `[0, 6]`; its abscissa is compressed by 1/3 back onto
//! `[0, 2]`, it is renormalized to unit integral and refitted by a
//! polynomial.

use super::assign::Division;
use super::chi::ChiSquare;
use super::poly::{fit_samples, uniform_grid, Polynomial};
use crate::error::{Error, Result};

pub const DEFAULT_FUSION_GRID: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct FusedFilter {
    pub grid: Vec<f64>,
    pub response: Vec<f64>,
    pub poly: Polynomial,
    pub fit_error_linf: f64,
    /// `(division, filter index, weight)` of every contributing filter.
    pub contributions: Vec<(Division, usize, f64)>,
}

impl FusedFilter {
    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    /// Grid point holding the largest fused response.
    pub fn mode(&self) -> f64 {
        let mut best = 0;
        for (k, &v) in self.response.iter().enumerate() {
            if v > self.response[best] {
                best = k;
            }
        }
        self.grid[best]
    }
}

/// Trapezoid rule on a uniform grid.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}

/// Discrete approximation of the continuous convolution of two sampled
/// functions sharing grid spacing `h`.
pub fn convolve(a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out.iter_mut().for_each(|v| *v *= h);
    out
}

/// Fuses per-division filters for a graph in `own` division.
///
/// `assignments` holds `(division, filter index)` for every division: three
/// entries, or one `Division::All` entry in degenerate mode.
pub fn fuse_filters(
    assignments: &[(Division, usize)],
    own: Division,
    w_d: f64,
    d: usize,
    grid_size: usize,
) -> Result<FusedFilter> {
    if assignments.is_empty() {
        return Err(Error::InvalidArgument("no division filters to fuse".into()));
    }
    if !assignments.iter().any(|(div, _)| *div == own) {
        return Err(Error::InvalidArgument(format!("division {own} has no assigned filter")));
    }
    if !(w_d > 0.0) {
        return Err(Error::InvalidArgument(format!("division weight {w_d} must be positive")));
    }
    let grid = uniform_grid(grid_size);
    let h = grid[1] - grid[0];
    let max_index = assignments.iter().map(|&(_, i)| i).max().unwrap();
    let degree = max_index - 1 + d;

    let mut contributions = Vec::with_capacity(assignments.len());
    let mut sampled = Vec::with_capacity(assignments.len());
    for &(div, i) in assignments {
        let weight = if div == own { 1.0 } else { w_d };
        let density = ChiSquare::new(i)?;
        sampled.push(
            grid.iter()
                .map(|&w| weight * density.response_untruncated(w))
                .collect::<Vec<f64>>(),
        );
        contributions.push((div, i, weight));
    }

    let response: Vec<f64> = if sampled.len() == 1 {
        sampled.pop().unwrap()
    } else {
        let mut acc = sampled[0].clone();
        for s in &sampled[1..] {
            acc = convolve(&acc, s, h);
        }
        // The m-fold convolution lives on [0, 2m]; sample it at m·w.
        let m = sampled.len();
        let compressed: Vec<f64> = (0..grid_size).map(|k| acc[m * k]).collect();
        let mass = trapezoid(&compressed, h);
        compressed.iter().map(|v| v / mass).collect()
    };
    let (poly, fit_error_linf) = fit_samples(&grid, &response, degree)?;
    Ok(FusedFilter {
        grid,
        response,
        poly,
        fit_error_linf,
        contributions,
    })
}
