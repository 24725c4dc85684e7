//! The heterogeneous detector and its homogeneous variant.

mod analysis;
pub mod checkpoint;
mod chigad;
mod chignn;

use nalgebra::DMatrix;
use rand::Rng as _;

use crate::ad::{Activation, Tape, Var};
use crate::error::Result;
use crate::rng::Rng;
use crate::spectral::{fit_polynomial, Polynomial};

pub use analysis::{admissible_candidates, analyze_type, AnalyzedPath, Representative, TypeAnalysis};
pub use chigad::{BankEntry, ChiGadModel, FilterBank, MetaGraphConv};
pub use chignn::ChiGnn;

/// Degree-1 low-pass response `1 − λ/2` in the shifted Chebyshev basis.
pub fn low_pass() -> Polynomial {
    Polynomial::chebyshev(vec![0.5, -0.5])
}

/// Sum of fitted Chi-Square filters; one application of the sum equals the
/// sum of the individual applications.
pub fn summed_filters(indices: &[usize], d: usize, grid: usize) -> Result<Polynomial> {
    let fitted = indices
        .iter()
        .map(|&i| fit_polynomial(i, d, grid).map(|f| f.poly))
        .collect::<Result<Vec<_>>>()?;
    Ok(Polynomial::sum(&fitted))
}

/// Variables produced by one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Parameter leaves, in declaration order.
    pub params: Vec<Var>,
    /// `n_target × 2` class scores.
    pub logits: Var,
    /// Pre-head representation of the target nodes.
    pub representation: Var,
}

/// A trainable detector over some input.
pub trait Detector {
    type Input;

    fn parameters(&self) -> &[DMatrix<f64>];

    fn parameters_mut(&mut self) -> &mut [DMatrix<f64>];

    fn forward(&self, tape: &mut Tape, input: &Self::Input) -> Result<ForwardPass>;

    /// Restores parameter constraints after an optimizer step.
    fn project(&mut self) {}
}

/// Uniform `[−1/√fan_in, 1/√fan_in]` initialisation.
pub(crate) fn uniform_init(rng: &mut Rng, rows: usize, cols: usize, fan_in: usize) -> DMatrix<f64> {
    let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-bound..=bound))
}

/// Parameter slots of an MLP head: `(weight, bias)` per layer.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MlpLayout {
    pub layers: Vec<(usize, usize)>,
}

impl MlpLayout {
    /// Appends `layers` linear layers mapping `input → hidden → … → 2`.
    pub fn declare(
        params: &mut Vec<DMatrix<f64>>,
        names: &mut Vec<String>,
        rng: &mut Rng,
        input: usize,
        hidden: usize,
        layers: usize,
    ) -> Self {
        let mut slots = Vec::with_capacity(layers);
        let mut width = input;
        for l in 0..layers {
            let out = if l + 1 == layers { 2 } else { hidden };
            params.push(uniform_init(rng, width, out, width));
            names.push(format!("mlp.{l}.weight"));
            params.push(uniform_init(rng, 1, out, width));
            names.push(format!("mlp.{l}.bias"));
            slots.push((params.len() - 2, params.len() - 1));
            width = out;
        }
        Self { layers: slots }
    }

    pub fn forward(&self, tape: &mut Tape, vars: &[Var], input: Var, act: Activation) -> Result<Var> {
        let mut h = input;
        for (l, &(w, b)) in self.layers.iter().enumerate() {
            let z = tape.matmul(h, vars[w])?;
            h = tape.add_bias(z, vars[b])?;
            if l + 1 < self.layers.len() {
                h = tape.activation(h, act);
            }
        }
        Ok(h)
    }
}
