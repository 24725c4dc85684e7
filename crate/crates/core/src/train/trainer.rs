use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use super::loss::{cc_weights, node_contributions, CcLossConfig};
use super::metrics::{f1_macro, metrics, MetricsRecord};
use crate::ad::{class1_probabilities, Adam, Tape};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::hin::{degenerate_method2, laplacian, HeteroGraph, OperatorKind, ShiftOperator, Splits};
use crate::model::Detector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub cc: CcLossConfig,
    pub threshold: f64,
}

impl TrainConfig {
    pub fn from_run(cfg: &RunConfig) -> Result<Self> {
        Ok(Self {
            learning_rate: cfg.learning_rate,
            epochs: cfg.epochs,
            cc: CcLossConfig::new(cfg.cc_high, cfg.cc_low)?,
            threshold: cfg.threshold,
        })
    }
}

/// Labels, splits and the target-type operator used for contributions.
#[derive(Debug, Clone)]
pub struct TrainData {
    /// 0/1 per target node; unlabelled nodes hold 0 and never enter a mask.
    pub labels: Vec<f64>,
    pub splits: Splits,
    pub operator: ShiftOperator,
}

impl TrainData {
    /// Uses the target-type graph of [`degenerate_method2`].
    pub fn from_graph(graph: &HeteroGraph) -> Result<Self> {
        graph.validate()?;
        let homog = degenerate_method2(graph, graph.target_type)?;
        Ok(Self {
            labels: graph.labels.iter().map(|l| l.as_target().unwrap_or(0.0)).collect(),
            splits: graph.splits.clone(),
            operator: laplacian(&homog.adjacency, OperatorKind::NormalizedLaplacian)?,
        })
    }

    pub fn anomalous(&self, ids: &[usize]) -> Vec<bool> {
        ids.iter().map(|&i| self.labels[i] == 1.0).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRecord {
    pub epoch: usize,
    pub loss: f64,
    /// Contribution of every target node, computed before this epoch's step.
    pub contributions: Vec<f64>,
    pub active_dims: usize,
    /// Validation metrics of the parameters entering this epoch; `None`
    /// when the validation split holds a single class.
    pub val: Option<MetricsRecord>,
    pub val_f1: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub history: Vec<TrainRecord>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_f1: f64,
}

impl TrainOutcome {
    pub fn history_csv(&self) -> String {
        let mut out = String::from("epoch,loss,val_auroc,val_auprc,val_f1_macro,val_recall\n");
        for r in &self.history {
            let (auroc, auprc, recall) = match r.val {
                Some(m) => (m.auroc.to_string(), m.auprc.to_string(), m.recall.to_string()),
                None => (String::new(), String::new(), String::new()),
            };
            writeln!(out, "{},{},{},{},{},{}", r.epoch, r.loss, auroc, auprc, r.val_f1, recall).unwrap();
        }
        out
    }
}

/// Full-batch training with the contribution-weighted loss. Parameters of
/// the epoch with the best validation F1-macro (earliest on ties) are
/// restored at the end.
pub fn train<D: Detector>(model: &mut D, input: &D::Input, data: &TrainData, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let train_ids = &data.splits.train;
    let val_ids = &data.splits.val;
    if train_ids.is_empty() || val_ids.is_empty() {
        return Err(Error::EmptyMask);
    }
    let n = data.labels.len();
    let mut mask = vec![false; n];
    train_ids.iter().for_each(|&i| mask[i] = true);
    let train_anomalous = data.anomalous(train_ids);
    let val_anomalous = data.anomalous(val_ids);

    let mut opt = Adam::new(cfg.learning_rate);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(usize, f64, Vec<DMatrix<f64>>)> = None;

    for epoch in 1..=cfg.epochs {
        let mut tape = Tape::new();
        let pass = model.forward(&mut tape, input)?;
        let representation = tape.value(pass.representation);
        if representation.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "model yields {} target rows, data has {n}",
                representation.nrows()
            )));
        }
        let contrib = node_contributions(representation, &data.operator)?;
        let train_c: Vec<f64> = train_ids.iter().map(|&i| contrib.values[i]).collect();
        let train_w = cc_weights(&train_c, &train_anomalous, &cfg.cc)?;
        let mut weights = vec![1.0; n];
        for (&i, &w) in train_ids.iter().zip(&train_w) {
            weights[i] = w;
        }
        let loss = tape.weighted_softmax_ce(pass.logits, &data.labels, &weights, &mask)?;
        let loss_value = tape.scalar(loss);
        if !loss_value.is_finite() {
            return Err(Error::Diverged {
                epoch,
                value: loss_value,
            });
        }

        let probs = class1_probabilities(tape.value(pass.logits));
        let val_scores: Vec<f64> = val_ids.iter().map(|&i| probs[i]).collect();
        let val = metrics(&val_scores, &val_anomalous, cfg.threshold).ok();
        let val_f1 = f1_macro(&val_scores, &val_anomalous, cfg.threshold);
        if best.as_ref().is_none_or(|(_, f, _)| val_f1 > *f) {
            best = Some((epoch, val_f1, model.parameters().to_vec()));
        }
        history.push(TrainRecord {
            epoch,
            loss: loss_value,
            contributions: contrib.values,
            active_dims: contrib.active_dims,
            val,
            val_f1,
        });

        tape.backward(loss)?;
        let grads: Vec<DMatrix<f64>> = pass.params.iter().map(|&v| tape.grad(v)).collect();
        opt.step(model.parameters_mut(), &grads)?;
        model.project();
    }

    let (best_epoch, best_val_f1, params) = best.expect("at least one epoch");
    for (dst, src) in model.parameters_mut().iter_mut().zip(params) {
        *dst = src;
    }
    Ok(TrainOutcome {
        history,
        best_epoch,
        best_val_f1,
    })
}

/// Class-1 probabilities of every target node.
pub fn predict<D: Detector>(model: &D, input: &D::Input) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let pass = model.forward(&mut tape, input)?;
    Ok(class1_probabilities(tape.value(pass.logits)))
}

/// Metrics of `model` on the target nodes `ids`.
pub fn evaluate<D: Detector>(
    model: &D,
    input: &D::Input,
    data: &TrainData,
    ids: &[usize],
    threshold: f64,
) -> Result<MetricsRecord> {
    let probs = predict(model, input)?;
    let scores: Vec<f64> = ids.iter().map(|&i| probs[i]).collect();
    metrics(&scores, &data.anomalous(ids), threshold)
}
