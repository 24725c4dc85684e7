use std::sync::Arc;

use nalgebra::DMatrix;

use super::analysis::{analyze_type, TypeAnalysis};
use super::{low_pass, summed_filters, uniform_init, Detector, ForwardPass, MlpLayout};
use crate::ad::{class1_probabilities, Tape, Var};
use crate::config::{FilterMode, RunConfig};
use crate::error::{Error, Result};
use crate::hin::{degenerate_method1, laplacian, HeteroGraph, MetaPath, OperatorKind};
use crate::rng::named_rng;
use crate::sparse::CsrMatrix;
use crate::spectral::{fuse_filters, Division, FusedFilter, Polynomial};

/// One meta-path graph of a filter bank.
#[derive(Debug, Clone)]
pub struct BankEntry {
    pub path: MetaPath,
    pub division: Division,
    pub operator: Arc<CsrMatrix>,
    pub filter: Polynomial,
    /// `None` when the filter is not a fused Chi-Square response.
    pub fused: Option<FusedFilter>,
    /// Parameter slot of the meta-path weight.
    pub weight_slot: usize,
}

#[derive(Debug, Clone)]
pub struct FilterBank {
    pub node_type: usize,
    pub entries: Vec<BankEntry>,
}

/// Filtering of the union graph of all node types.
#[derive(Debug, Clone)]
pub struct MetaGraphConv {
    pub operator: Arc<CsrMatrix>,
    /// Filter indices of the set; empty when replaced by the low-pass response.
    pub filter_indices: Vec<usize>,
    pub filter: Polynomial,
}

#[derive(Debug, Clone)]
pub struct ChiGadModel {
    pub config: RunConfig,
    pub schema_hash: String,
    /// One bank per node type; `None` passes features through unfiltered.
    pub banks: Vec<Option<FilterBank>>,
    pub meta_conv: MetaGraphConv,
    pub param_names: Vec<String>,
    params: Vec<DMatrix<f64>>,
    align_slots: Vec<usize>,
    mlp: MlpLayout,
    type_offsets: Vec<usize>,
}

impl ChiGadModel {
    /// Runs the meta-path analysis and filter construction for `graph` and
    /// initialises parameters from the config seed.
    pub fn build(graph: &HeteroGraph, config: &RunConfig) -> Result<Self> {
        config.validate()?;
        graph.validate()?;
        let analyses = (0..graph.node_types.len())
            .map(|t| analyze_type(graph, t, config))
            .collect::<Result<Vec<_>>>()?;
        Self::from_analyses(graph, config, analyses)
    }

    pub fn from_analyses(graph: &HeteroGraph, config: &RunConfig, analyses: Vec<Option<TypeAnalysis>>) -> Result<Self> {
        if config.operator != OperatorKind::NormalizedLaplacian {
            return Err(Error::Config("filtering requires the normalized Laplacian operator".into()));
        }
        let mut params = Vec::new();
        let mut names = Vec::new();

        // Meta-path weights, by type then path order.
        let mut banks = Vec::with_capacity(analyses.len());
        for analysis in analyses {
            let Some(analysis) = analysis else {
                banks.push(None);
                continue;
            };
            let assignments = analysis.assignments();
            let mut entries = Vec::with_capacity(analysis.paths.len());
            for (k, p) in analysis.paths.iter().enumerate() {
                let (filter, fused) = match config.filter_mode {
                    FilterMode::ChiSquare => {
                        let fused = fuse_filters(
                            &assignments,
                            p.division,
                            config.w_d,
                            config.poly_degree,
                            config.fusion_grid,
                        )?;
                        (fused.poly.clone(), Some(fused))
                    }
                    FilterMode::LowPass => (low_pass(), None),
                };
                params.push(DMatrix::from_element(1, 1, 1.0));
                names.push(format!(
                    "meta_weight.{}.{}",
                    graph.node_types[analysis.node_type].name,
                    p.path.display(graph)
                ));
                entries.push(BankEntry {
                    path: p.path.clone(),
                    division: p.division,
                    operator: analysis.shared_operator(k),
                    filter,
                    fused,
                    weight_slot: params.len() - 1,
                });
            }
            banks.push(Some(FilterBank {
                node_type: analysis.node_type,
                entries,
            }));
        }

        let mut rng = named_rng(config.seed, "init");
        let mut align_slots = Vec::with_capacity(graph.node_types.len());
        for nt in &graph.node_types {
            let d_o = nt.feature_dim();
            params.push(uniform_init(&mut rng, d_o, config.aligned_dim, d_o));
            names.push(format!("align.{}", nt.name));
            align_slots.push(params.len() - 1);
        }
        let mlp = MlpLayout::declare(
            &mut params,
            &mut names,
            &mut rng,
            config.aligned_dim,
            config.hidden(),
            config.mlp_layers,
        );

        let homog = degenerate_method1(graph);
        let operator = Arc::new(laplacian(&homog.adjacency, OperatorKind::NormalizedLaplacian)?.matrix);
        let meta_conv = match config.filter_mode {
            FilterMode::ChiSquare => MetaGraphConv {
                operator,
                filter_indices: config.meta_filters.clone(),
                filter: summed_filters(&config.meta_filters, config.poly_degree, config.fit_grid)?,
            },
            FilterMode::LowPass => MetaGraphConv {
                operator,
                filter_indices: Vec::new(),
                filter: low_pass(),
            },
        };
        if let Some(deg) = banks
            .iter()
            .flatten()
            .flat_map(|b| &b.entries)
            .map(|e| e.filter.degree())
            .chain([meta_conv.filter.degree()])
            .find(|&d| d > config.max_degree)
        {
            return Err(Error::Config(format!("filter degree {deg} exceeds max_degree {}", config.max_degree)));
        }

        Ok(Self {
            config: config.clone(),
            schema_hash: graph.schema_hash(),
            banks,
            meta_conv,
            param_names: names,
            params,
            align_slots,
            mlp,
            type_offsets: graph.type_offsets(),
        })
    }

    pub fn meta_weight_slots(&self) -> Vec<usize> {
        self.banks
            .iter()
            .flatten()
            .flat_map(|b| b.entries.iter().map(|e| e.weight_slot))
            .collect()
    }

    fn check_schema(&self, graph: &HeteroGraph) -> Result<()> {
        let found = graph.schema_hash();
        if found != self.schema_hash {
            return Err(Error::SchemaMismatch {
                expected: self.schema_hash.clone(),
                found,
            });
        }
        Ok(())
    }

    /// Sum over the bank's meta-paths of `f(w·S) X_o`.
    pub fn multi_graph_forward(tape: &mut Tape, bank: &FilterBank, vars: &[Var], x: Var) -> Result<Var> {
        let mut acc: Option<Var> = None;
        for entry in &bank.entries {
            let coeffs: Vec<Var> = entry.filter.coeffs.iter().map(|&c| tape.scalar_constant(c)).collect();
            let y = tape.sparse_poly_apply(
                &coeffs,
                entry.filter.basis,
                Arc::clone(&entry.operator),
                x,
                vars[entry.weight_slot],
            )?;
            acc = Some(match acc {
                Some(a) => tape.add(a, y)?,
                None => y,
            });
        }
        acc.ok_or(Error::EmptyBank)
    }

    /// Probabilities of the anomalous class and the representation of the
    /// target nodes, computed on a private tape.
    pub fn predict(&self, graph: &HeteroGraph) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let mut tape = Tape::new();
        let pass = self.forward(&mut tape, graph)?;
        Ok((class1_probabilities(tape.value(pass.logits)), tape.value(pass.representation).clone()))
    }

    pub fn set_parameters(&mut self, values: Vec<DMatrix<f64>>) -> Result<()> {
        if values.len() != self.params.len()
            || values.iter().zip(&self.params).any(|(a, b)| a.shape() != b.shape())
        {
            return Err(Error::DimensionMismatch("parameter list does not fit the model".into()));
        }
        self.params = values;
        Ok(())
    }
}

impl Detector for ChiGadModel {
    type Input = HeteroGraph;

    fn parameters(&self) -> &[DMatrix<f64>] {
        &self.params
    }

    fn parameters_mut(&mut self) -> &mut [DMatrix<f64>] {
        &mut self.params
    }

    fn forward(&self, tape: &mut Tape, graph: &HeteroGraph) -> Result<ForwardPass> {
        let vars: Vec<Var> = self.params.iter().map(|p| tape.param(p.clone())).collect();
        let (logits, representation) = self.forward_with(tape, &vars, graph)?;
        Ok(ForwardPass {
            params: vars,
            logits,
            representation,
        })
    }

    /// Meta-path weights stay in `[0, 1]`, which keeps the spectrum of
    /// `w·S` inside the domain the filters were fitted on.
    fn project(&mut self) {
        for slot in self.meta_weight_slots() {
            let w = &mut self.params[slot][(0, 0)];
            *w = w.clamp(0.0, 1.0);
        }
    }
}

impl ChiGadModel {
    /// Forward pass reading parameters from `vars` (declaration order).
    /// Returns the logits and the target representation.
    pub fn forward_with(&self, tape: &mut Tape, vars: &[Var], graph: &HeteroGraph) -> Result<(Var, Var)> {
        self.check_schema(graph)?;
        if vars.len() != self.params.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} parameter variables for {} parameters",
                vars.len(),
                self.params.len()
            )));
        }
        let mut aligned = Vec::with_capacity(graph.node_types.len());
        for (t, nt) in graph.node_types.iter().enumerate() {
            let x = tape.constant(nt.features.clone());
            let semantic = match &self.banks[t] {
                Some(bank) => Self::multi_graph_forward(tape, bank, vars, x)?,
                None => x,
            };
            aligned.push(tape.matmul(semantic, vars[self.align_slots[t]])?);
        }
        let stacked = tape.vstack(&aligned)?;
        let activated = tape.activation(stacked, self.config.activation);
        let conv = &self.meta_conv;
        let coeffs: Vec<Var> = conv.filter.coeffs.iter().map(|&c| tape.scalar_constant(c)).collect();
        let unit = tape.scalar_constant(1.0);
        let filtered = tape.sparse_poly_apply(&coeffs, conv.filter.basis, Arc::clone(&conv.operator), activated, unit)?;
        let target = graph.target_type;
        let representation = tape.rows(filtered, self.type_offsets[target], graph.target().count())?;
        let logits = self.mlp.forward(tape, vars, representation, self.config.activation)?;
        Ok((logits, representation))
    }
}
