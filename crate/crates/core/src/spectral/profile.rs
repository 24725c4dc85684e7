//! Band-energy profile of a graph signal.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::rayleigh::graph_s_high;
use crate::error::{Error, Result};
use crate::hin::ShiftOperator;

/// Default node cap for dense eigendecomposition.
pub const DEFAULT_EIGEN_CAP: usize = 3000;

/// Neighbouring eigenvalues closer than this are treated as one.
const REPEAT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Projection of the column-summed signal on each eigenvector.
    pub fourier_coeffs: Vec<f64>,
    /// Squared Fourier coefficients, averaged over each repeated eigenvalue
    /// so they do not depend on the basis chosen inside its eigenspace.
    pub energies: Vec<f64>,
    /// Half-open eigenvalue index ranges of the bands.
    pub bands: Vec<(usize, usize)>,
    pub band_energies: Vec<f64>,
    pub argmax_band: usize,
    /// Median eigenvalue of the most energetic band.
    pub band_max: f64,
    pub s_high: f64,
}

impl SpectralProfile {
    pub fn k(&self) -> usize {
        self.bands.len()
    }
}

/// `k` contiguous bands of `n / k` eigenvalues; the remainder joins the last band.
pub fn band_ranges(n: usize, k: usize) -> Vec<(usize, usize)> {
    let size = n / k;
    (0..k)
        .map(|b| {
            let start = b * size;
            let end = if b + 1 == k { n } else { start + size };
            (start, end)
        })
        .collect()
}

pub fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Ascending eigenpairs of a symmetric operator (dense).
pub fn sorted_eigen(op: &ShiftOperator) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(op.matrix.to_dense());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&j| eig.eigenvectors.column(j)).collect::<Vec<_>>());
    (values, vectors)
}

/// Spreads the energy of every cluster of equal eigenvalues evenly over it.
fn share_repeated(eigenvalues: &[f64], energies: &mut [f64]) {
    let mut start = 0;
    while start < eigenvalues.len() {
        let mut end = start + 1;
        while end < eigenvalues.len() && eigenvalues[end] - eigenvalues[end - 1] <= REPEAT_TOL {
            end += 1;
        }
        if end - start > 1 {
            let mean = energies[start..end].iter().sum::<f64>() / (end - start) as f64;
            energies[start..end].iter_mut().for_each(|e| *e = mean);
        }
        start = end;
    }
}

pub fn spectral_profile(op: &ShiftOperator, x: &DMatrix<f64>, k: usize, cap: usize) -> Result<SpectralProfile> {
    let n = op.dim();
    if x.nrows() != n {
        return Err(Error::DimensionMismatch(format!("{} feature rows on {n} nodes", x.nrows())));
    }
    if k == 0 || n < k {
        return Err(Error::InvalidArgument(format!("{n} nodes cannot form {k} bands")));
    }
    if n > cap {
        return Err(Error::EigenCap { nodes: n, cap });
    }
    if !op.matrix.is_symmetric() {
        return Err(Error::Asymmetric);
    }
    let (eigenvalues, vectors) = sorted_eigen(op);
    let summed: DVector<f64> = x.column_sum();
    let fourier_coeffs: Vec<f64> = (0..n).map(|j| vectors.column(j).dot(&summed)).collect();
    let mut energies: Vec<f64> = fourier_coeffs.iter().map(|c| c * c).collect();
    share_repeated(&eigenvalues, &mut energies);
    let bands = band_ranges(n, k);
    let band_energies: Vec<f64> = bands.iter().map(|&(a, b)| energies[a..b].iter().sum()).collect();
    let mut argmax_band = 0;
    for (b, &e) in band_energies.iter().enumerate() {
        if e > band_energies[argmax_band] {
            argmax_band = b;
        }
    }
    let (a, b) = bands[argmax_band];
    let band_max = median(&eigenvalues[a..b]).clamp(0.0, 2.0);
    let s_high = graph_s_high(op, x).unwrap_or(0.0);
    Ok(SpectralProfile {
        eigenvalues,
        fourier_coeffs,
        energies,
        bands,
        band_energies,
        argmax_band,
        band_max,
        s_high,
    })
}
