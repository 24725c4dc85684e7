//! The Chi-Square wavelet family.
//!
//! Filter `i` is the Chi-Square density with `2i` degrees of freedom and
//! scale `1/(i+1)`, truncated to the spectral range `[0, 2]` and
//! renormalized there:
//!
//! ```text
//! f_i(w) = (1/S_i) · (w(i+1))^{i−1} e^{−w(i+1)/2} / (2^i Γ(i))
//! ```

use statrs::function::gamma::ln_gamma;

use super::poly::{fit_samples, uniform_grid, Polynomial};
use super::quad;
use crate::error::{Error, Result};

/// Upper end of the normalized-Laplacian spectrum.
pub const SPECTRUM_MAX: f64 = 2.0;

const QUAD_TOL: f64 = 1e-13;

fn check_index(i: usize) -> Result<()> {
    if i == 0 {
        return Err(Error::InvalidArgument("filter index must be >= 1".into()));
    }
    Ok(())
}

/// Untruncated, unnormalized response `(w(i+1))^{i−1} e^{−w(i+1)/2} / (2^i Γ(i))`
/// for any `w ≥ 0`.
pub fn raw_response(i: usize, w: f64) -> f64 {
    let a = (i + 1) as f64;
    if w == 0.0 {
        return if i == 1 { 0.5 } else { 0.0 };
    }
    let fi = i as f64;
    let log = (fi - 1.0) * (w * a).ln() - 0.5 * w * a - fi * std::f64::consts::LN_2 - ln_gamma(fi);
    log.exp()
}

/// `S_i = ∫₀² raw_response(i, w) dw`.
pub fn normalization_constant(i: usize) -> Result<f64> {
    check_index(i)?;
    Ok(quad::integrate(|w| raw_response(i, w), 0.0, SPECTRUM_MAX, QUAD_TOL))
}

/// Closed-form argmax of the response, `2(i−1)/(i+1)`.
pub fn chi_mode(i: usize) -> f64 {
    let i = i as f64;
    (2.0 * (i - 1.0) / (i + 1.0)).clamp(0.0, SPECTRUM_MAX)
}

/// A Chi-Square response with its normalizer resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub index: usize,
    pub s_i: f64,
}

impl ChiSquare {
    pub fn new(i: usize) -> Result<Self> {
        Ok(Self {
            index: i,
            s_i: normalization_constant(i)?,
        })
    }

    /// Exact response on `[0, 2]`.
    pub fn response(&self, w: f64) -> Result<f64> {
        if !(0.0..=SPECTRUM_MAX).contains(&w) {
            return Err(Error::InvalidArgument(format!("frequency {w} outside [0, 2]")));
        }
        Ok(self.response_untruncated(w))
    }

    /// The same formula evaluated for any `w ≥ 0` (used by the
    /// admissibility integral, which runs over `[0, ∞)`).
    pub fn response_untruncated(&self, w: f64) -> f64 {
        raw_response(self.index, w) / self.s_i
    }

    pub fn mode(&self) -> f64 {
        chi_mode(self.index)
    }

    /// Mean and variance of the truncated density.
    pub fn moments(&self) -> (f64, f64) {
        let i = self.index;
        let m1 = quad::integrate(|w| w * raw_response(i, w), 0.0, SPECTRUM_MAX, QUAD_TOL) / self.s_i;
        let m2 = quad::integrate(|w| w * w * raw_response(i, w), 0.0, SPECTRUM_MAX, QUAD_TOL) / self.s_i;
        (m1, m2 - m1 * m1)
    }

    /// `∫₀^∞ f_i(w)² / w dw`. Diverges for `i = 1`, where `f_1(0) ≠ 0`.
    pub fn admissibility_integral(&self) -> Result<f64> {
        if self.index < 2 {
            return Err(Error::NotAdmissible(self.index));
        }
        let value = quad::integrate_to_infinity(
            |w| {
                if w == 0.0 {
                    return 0.0;
                }
                let f = self.response_untruncated(w);
                f * f / w
            },
            0.0,
            1e-14,
        );
        Ok(value)
    }
}

pub fn chi_response(i: usize, w: f64) -> Result<f64> {
    ChiSquare::new(i)?.response(w)
}

pub fn chi_moments(i: usize) -> Result<(f64, f64)> {
    Ok(ChiSquare::new(i)?.moments())
}

pub fn admissibility_integral(i: usize) -> Result<f64> {
    ChiSquare::new(i)?.admissibility_integral()
}

/// A Chi-Square filter together with its polynomial approximation of
/// degree `i − 1 + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareFilter {
    pub density: ChiSquare,
    pub fit_degree_d: usize,
    pub poly: Polynomial,
    pub fit_error_linf: f64,
}

impl ChiSquareFilter {
    pub fn index(&self) -> usize {
        self.density.index
    }

    pub fn s_i(&self) -> f64 {
        self.density.s_i
    }
}

/// Least-squares fit of `f_i` on a uniform grid of `grid_size` points over
/// `[0, 2]`, total degree `i − 1 + d`.
pub fn fit_polynomial(i: usize, d: usize, grid_size: usize) -> Result<ChiSquareFilter> {
    check_index(i)?;
    if d == 0 {
        return Err(Error::InvalidArgument("degree budget d must be >= 1".into()));
    }
    if grid_size < 4 * (i + d) {
        return Err(Error::IllConditioned(format!(
            "grid of {grid_size} points is too small for degree {} (need >= {})",
            i - 1 + d,
            4 * (i + d)
        )));
    }
    let density = ChiSquare::new(i)?;
    let grid = uniform_grid(grid_size);
    let values: Vec<f64> = grid.iter().map(|&w| density.response_untruncated(w)).collect();
    let (poly, fit_error_linf) = fit_samples(&grid, &values, i - 1 + d)?;
    Ok(ChiSquareFilter {
        density,
        fit_degree_d: d,
        poly,
        fit_error_linf,
    })
}
