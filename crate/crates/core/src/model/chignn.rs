use std::sync::Arc;

use nalgebra::DMatrix;

use super::{low_pass, summed_filters, uniform_init, Detector, ForwardPass, MlpLayout};
use crate::ad::{class1_probabilities, Activation, Tape, Var};
use crate::config::{FilterMode, RunConfig};
use crate::error::{Error, Result};
use crate::hin::{laplacian, HomoGraph, OperatorKind};
use crate::rng::named_rng;
use crate::sparse::CsrMatrix;
use crate::spectral::Polynomial;

/// Chi-Square convolution on a homogeneous graph: an input projection, the
/// activation, the summed filter set and an MLP head.
#[derive(Debug, Clone)]
pub struct ChiGnn {
    pub operator: Arc<CsrMatrix>,
    pub filter_indices: Vec<usize>,
    pub filter: Polynomial,
    pub activation: Activation,
    params: Vec<DMatrix<f64>>,
    mlp: MlpLayout,
}

impl ChiGnn {
    /// `filters` are Chi-Square indices; the config supplies widths,
    /// activation, fit settings and the seed.
    pub fn build(graph: &HomoGraph, input_dim: usize, filters: &[usize], config: &RunConfig) -> Result<Self> {
        if filters.is_empty() {
            return Err(Error::InvalidArgument("empty filter set".into()));
        }
        let operator = Arc::new(laplacian(&graph.adjacency, OperatorKind::NormalizedLaplacian)?.matrix);
        let filter = match config.filter_mode {
            FilterMode::ChiSquare => summed_filters(filters, config.poly_degree, config.fit_grid)?,
            FilterMode::LowPass => low_pass(),
        };
        let hidden = config.hidden();
        let mut rng = named_rng(config.seed, "init");
        let mut params = vec![uniform_init(&mut rng, input_dim, hidden, input_dim)];
        let mut names = vec!["input.weight".to_string()];
        let mlp = MlpLayout::declare(&mut params, &mut names, &mut rng, hidden, hidden, config.mlp_layers);
        Ok(Self {
            operator,
            filter_indices: filters.to_vec(),
            filter,
            activation: config.activation,
            params,
            mlp,
        })
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let pass = self.forward(&mut tape, x)?;
        Ok(class1_probabilities(tape.value(pass.logits)))
    }
}

impl Detector for ChiGnn {
    type Input = DMatrix<f64>;

    fn parameters(&self) -> &[DMatrix<f64>] {
        &self.params
    }

    fn parameters_mut(&mut self) -> &mut [DMatrix<f64>] {
        &mut self.params
    }

    fn forward(&self, tape: &mut Tape, x: &DMatrix<f64>) -> Result<ForwardPass> {
        let vars: Vec<Var> = self.params.iter().map(|p| tape.param(p.clone())).collect();
        let input = tape.constant(x.clone());
        let projected = tape.matmul(input, vars[0])?;
        let activated = tape.activation(projected, self.activation);
        let coeffs: Vec<Var> = self.filter.coeffs.iter().map(|&c| tape.scalar_constant(c)).collect();
        let unit = tape.scalar_constant(1.0);
        let representation =
            tape.sparse_poly_apply(&coeffs, self.filter.basis, Arc::clone(&self.operator), activated, unit)?;
        let logits = self.mlp.forward(tape, &vars, representation, self.activation)?;
        Ok(ForwardPass {
            params: vars,
            logits,
            representation,
        })
    }
}
