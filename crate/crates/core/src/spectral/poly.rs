//! Polynomials of a shift operator.
//!
//! Fitted responses live in the Chebyshev basis `T_k(λ − 1)`, which maps the
//! spectral range `[0, 2]` onto `[−1, 1]`. High-degree monomial expansions on
//! `[0, 2]` have coefficients that cancel catastrophically, so operator
//! application uses the three-term recurrence and monomial coefficients are
//! only produced for reporting.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hin::ShiftOperator;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// `Σ c_k λ^k`.
    Monomial,
    /// `Σ c_k T_k(λ − 1)`.
    Chebyshev,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub basis: Basis,
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn monomial(coeffs: Vec<f64>) -> Self {
        Self {
            basis: Basis::Monomial,
            coeffs,
        }
    }

    pub fn chebyshev(coeffs: Vec<f64>) -> Self {
        Self {
            basis: Basis::Chebyshev,
            coeffs,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::chebyshev(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        match self.basis {
            Basis::Monomial => self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * lambda + c),
            Basis::Chebyshev => clenshaw(&self.coeffs, lambda - 1.0),
        }
    }

    pub fn to_monomial(&self) -> Polynomial {
        match self.basis {
            Basis::Monomial => self.clone(),
            Basis::Chebyshev => {
                let n = self.coeffs.len();
                // Power series in t = λ − 1.
                let mut in_t = vec![0.0; n];
                let mut prev = vec![0.0; n];
                let mut cur = vec![0.0; n];
                for (k, &c) in self.coeffs.iter().enumerate() {
                    let next = match k {
                        0 => {
                            let mut t0 = vec![0.0; n];
                            t0[0] = 1.0;
                            t0
                        }
                        1 => {
                            let mut t1 = vec![0.0; n];
                            t1[1] = 1.0;
                            t1
                        }
                        _ => {
                            let mut t = vec![0.0; n];
                            for j in 0..n - 1 {
                                t[j + 1] += 2.0 * cur[j];
                            }
                            for j in 0..n {
                                t[j] -= prev[j];
                            }
                            t
                        }
                    };
                    for j in 0..n {
                        in_t[j] += c * next[j];
                    }
                    prev = std::mem::replace(&mut cur, next);
                }
                // Substitute t = λ − 1.
                let mut out = vec![0.0; n];
                for (j, &b) in in_t.iter().enumerate() {
                    let mut binom = 1.0;
                    for m in 0..=j {
                        let sign = if (j - m) % 2 == 0 { 1.0 } else { -1.0 };
                        out[m] += b * binom * sign;
                        binom = binom * (j - m) as f64 / (m + 1) as f64;
                    }
                }
                Polynomial::monomial(out)
            }
        }
    }

    /// Exact re-expansion in the Chebyshev basis (discrete transform on
    /// `degree + 1` Chebyshev nodes).
    pub fn to_chebyshev(&self) -> Polynomial {
        if self.basis == Basis::Chebyshev {
            return self.clone();
        }
        let n = self.coeffs.len().max(1);
        let nodes: Vec<f64> = (0..n)
            .map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos())
            .collect();
        let values: Vec<f64> = nodes.iter().map(|&t| self.eval(t + 1.0)).collect();
        let mut coeffs = vec![0.0; n];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let s: f64 = nodes
                .iter()
                .zip(&values)
                .map(|(&t, &v)| v * (j as f64 * t.acos()).cos())
                .sum();
            *c = 2.0 * s / n as f64;
        }
        coeffs[0] *= 0.5;
        Polynomial::chebyshev(coeffs)
    }

    /// Coefficient-wise sum, expressed in the Chebyshev basis.
    pub fn sum<'a>(polys: impl IntoIterator<Item = &'a Polynomial>) -> Polynomial {
        let mut coeffs: Vec<f64> = Vec::new();
        for p in polys {
            let c = p.to_chebyshev().coeffs;
            if c.len() > coeffs.len() {
                coeffs.resize(c.len(), 0.0);
            }
            for (a, b) in coeffs.iter_mut().zip(c) {
                *a += b;
            }
        }
        Polynomial::chebyshev(coeffs)
    }

    /// `p(w·S) x`, or `p(w·S)ᵀ x` when `transpose` is set. Only sparse
    /// matrix-block products are formed.
    pub fn apply_scaled(&self, op: &CsrMatrix, weight: f64, x: &DMatrix<f64>, transpose: bool) -> DMatrix<f64> {
        let mul = |v: &DMatrix<f64>| {
            let sv = if transpose { op.tmul_dense(v) } else { op.mul_dense(v) };
            sv * weight
        };
        if self.coeffs.is_empty() {
            return DMatrix::zeros(x.nrows(), x.ncols());
        }
        match self.basis {
            Basis::Monomial => {
                let n = self.degree();
                let mut y = x * self.coeffs[n];
                for k in (0..n).rev() {
                    y = mul(&y) + x * self.coeffs[k];
                }
                y
            }
            Basis::Chebyshev => {
                // M = wS − I
                let shifted = |v: &DMatrix<f64>| mul(v) - v;
                let mut y = x * self.coeffs[0];
                if self.coeffs.len() == 1 {
                    return y;
                }
                let mut prev = x.clone();
                let mut cur = shifted(x);
                y += &cur * self.coeffs[1];
                for &c in &self.coeffs[2..] {
                    let next = shifted(&cur) * 2.0 - &prev;
                    y += &next * c;
                    prev = std::mem::replace(&mut cur, next);
                }
                y
            }
        }
    }
}

fn clenshaw(coeffs: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + t * b1 - b2
}

/// `n` equally spaced points covering `[0, 2]` inclusive.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    let h = 2.0 / (n - 1) as f64;
    (0..n).map(|k| k as f64 * h).collect()
}

/// Least-squares fit of samples on `[0, 2]` by a Chebyshev-basis polynomial
/// of the given degree. Returns the polynomial and the sup-norm residual on
/// the samples.
pub fn fit_samples(grid: &[f64], values: &[f64], degree: usize) -> Result<(Polynomial, f64)> {
    if grid.len() != values.len() {
        return Err(Error::DimensionMismatch("grid and values differ in length".into()));
    }
    let cols = degree + 1;
    if grid.len() < cols {
        return Err(Error::IllConditioned(format!(
            "{} samples cannot determine degree {degree}",
            grid.len()
        )));
    }
    let mut design = DMatrix::zeros(grid.len(), cols);
    for (r, &w) in grid.iter().enumerate() {
        let t = w - 1.0;
        let (mut prev, mut cur) = (1.0, t);
        design[(r, 0)] = 1.0;
        if cols > 1 {
            design[(r, 1)] = t;
        }
        for k in 2..cols {
            let next = 2.0 * t * cur - prev;
            design[(r, k)] = next;
            prev = cur;
            cur = next;
        }
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::IllConditioned(format!(
            "singular value ratio {:.3e} for degree {degree} on {} samples",
            smin / smax,
            grid.len()
        )));
    }
    let rhs = DVector::from_column_slice(values);
    let coeffs = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::IllConditioned(e.to_string()))?;
    let residual = &design * &coeffs - rhs;
    let linf = residual.amax();
    Ok((Polynomial::chebyshev(coeffs.iter().copied().collect()), linf))
}

/// `Y = p(S) X`.
pub fn apply_filter(poly: &Polynomial, op: &ShiftOperator, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !op.matrix.is_square() || op.dim() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} applied to {} rows",
            op.matrix.nrows(),
            op.matrix.ncols(),
            x.nrows()
        )));
    }
    Ok(poly.apply_scaled(&op.matrix, 1.0, x, false))
}
