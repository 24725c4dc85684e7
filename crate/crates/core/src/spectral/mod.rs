//! Chi-Square filters and the spectral analysis that assigns them to
//! meta-path graphs.

mod assign;
mod chi;
mod fusion;
mod poly;
mod profile;
pub mod quad;
mod rayleigh;
mod combination;

pub use assign::{assign_filter, select_representatives, Division, Selection};
pub use chi::{
    admissibility_integral, chi_mode, chi_moments, chi_response, fit_polynomial, normalization_constant,
    raw_response, ChiSquare, ChiSquareFilter, SPECTRUM_MAX,
};
pub use fusion::{convolve, fuse_filters, trapezoid, FusedFilter, DEFAULT_FUSION_GRID};
pub use poly::{apply_filter, fit_samples, uniform_grid, Basis, Polynomial};
pub use profile::{band_ranges, median, sorted_eigen, spectral_profile, SpectralProfile, DEFAULT_EIGEN_CAP};
pub use rayleigh::{graph_s_high, s_high};
pub use combination::combination_search;

/// Default candidate filter indices: odd 1..=19 plus powers of two up to 128.
pub fn default_candidates() -> Vec<usize> {
    let mut c: Vec<usize> = (1..=19).step_by(2).collect();
    c.extend([2, 4, 8, 16, 32, 64, 128]);
    c.sort_unstable();
    c.dedup();
    c
}
