//! Finite-difference gradient cases. Each returns the worst relative error
//! over its seeds.

use std::sync::Arc;

use chigad::ad::{Activation, Tape, Var};
use chigad::config::RunConfig;
use chigad::hin::{laplacian, OperatorKind};
use chigad::model::{ChiGadModel, Detector};
use chigad::rng::named_rng;
use chigad::spectral::Basis;
use nalgebra::DMatrix;
use rand::Rng as _;

use super::{away_from_zero, fd_max_rel_error, gaussian, random_adjacency, small_hin, uniform};

/// Contracts a matrix node to a scalar with fixed random weights, so every
/// entry of the node gets a distinct gradient.
fn contract(tape: &mut Tape, v: Var, weights: &DMatrix<f64>) -> Var {
    let w = tape.constant(weights.clone());
    let p = tape.mul(v, w).unwrap();
    tape.sum(p)
}

fn seeds(name: &str, count: u64, mut case: impl FnMut(&mut chigad::rng::Rng) -> f64) -> f64 {
    (0..count)
        .map(|s| case(&mut named_rng(s, name)))
        .fold(0.0, f64::max)
}

pub fn matmul(count: u64) -> f64 {
    seeds("grad/matmul", count, |rng| {
        let (n, k, m) = (rng.random_range(1..5), rng.random_range(1..5), rng.random_range(1..5));
        let r = gaussian(rng, n, m);
        fd_max_rel_error(&[gaussian(rng, n, k), gaussian(rng, k, m)], |t, v| {
            let y = t.matmul(v[0], v[1]).unwrap();
            contract(t, y, &r)
        })
    })
}

pub fn add_mul_scale(count: u64) -> f64 {
    seeds("grad/elementwise", count, |rng| {
        let (n, m) = (rng.random_range(1..5), rng.random_range(1..5));
        let r = gaussian(rng, n, m);
        fd_max_rel_error(
            &[gaussian(rng, n, m), gaussian(rng, n, m), gaussian(rng, 1, 1)],
            |t, v| {
                let s = t.add(v[0], v[1]).unwrap();
                let p = t.mul(s, v[1]).unwrap();
                let y = t.scale(p, v[2]).unwrap();
                contract(t, y, &r)
            },
        )
    })
}

pub fn bias_rows_stack(count: u64) -> f64 {
    seeds("grad/structural", count, |rng| {
        let (n, m) = (rng.random_range(2..6), rng.random_range(1..4));
        let r = gaussian(rng, 2 * n, m);
        let r2 = gaussian(rng, n - 1, m);
        fd_max_rel_error(&[gaussian(rng, n, m), gaussian(rng, 1, m), gaussian(rng, n, m)], |t, v| {
            let b = t.add_bias(v[0], v[1]).unwrap();
            let st = t.vstack(&[b, v[2]]).unwrap();
            let whole = contract(t, st, &r);
            let part = t.rows(st, 1, n - 1).unwrap();
            let part = contract(t, part, &r2);
            t.add(whole, part).unwrap()
        })
    })
}

pub fn activations(count: u64) -> f64 {
    seeds("grad/activation", count, |rng| {
        let (n, m) = (rng.random_range(1..5), rng.random_range(1..5));
        let r = gaussian(rng, n, m);
        let x = away_from_zero(rng, n, m);
        [Activation::Relu, Activation::Tanh, Activation::LeakyRelu]
            .into_iter()
            .map(|kind| {
                fd_max_rel_error(std::slice::from_ref(&x), |t, v| {
                    let y = t.activation(v[0], kind);
                    contract(t, y, &r)
                })
            })
            .fold(0.0, f64::max)
    })
}

pub fn sparse_poly(count: u64) -> f64 {
    seeds("grad/sparse-poly", count, |rng| {
        let n = rng.random_range(3..12);
        let adj = random_adjacency(rng, n, 0.4);
        let op = Arc::new(laplacian(&adj, OperatorKind::NormalizedLaplacian).unwrap().matrix);
        let cols = rng.random_range(1..4);
        let r = gaussian(rng, n, cols);
        let degree = rng.random_range(0..6);
        let basis = if rng.random::<bool>() { Basis::Monomial } else { Basis::Chebyshev };
        let mut params = vec![gaussian(rng, n, cols), uniform(rng, 1, 1, 0.2, 1.0)];
        params.extend((0..=degree).map(|_| gaussian(rng, 1, 1)));
        fd_max_rel_error(&params, |t, v| {
            let y = t.sparse_poly_apply(&v[2..], basis, Arc::clone(&op), v[0], v[1]).unwrap();
            contract(t, y, &r)
        })
    })
}

pub fn softmax_ce(count: u64) -> f64 {
    seeds("grad/ce", count, |rng| {
        let n = 10;
        let labels: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..2u8))).collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..3.0)).collect();
        let mut mask: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.7).collect();
        mask[0] = true;
        fd_max_rel_error(&[gaussian(rng, n, 2)], |t, v| {
            t.weighted_softmax_ce(v[0], &labels, &weights, &mask).unwrap()
        })
    })
}

/// Two-layer perceptron with tanh, the chained case of the backward pass.
pub fn chained(count: u64) -> f64 {
    seeds("grad/chain", count, |rng| {
        let x = gaussian(rng, 4, 3);
        fd_max_rel_error(&[gaussian(rng, 3, 5), gaussian(rng, 1, 5), gaussian(rng, 5, 2)], |t, v| {
            let xv = t.constant(x.clone());
            let h = t.matmul(xv, v[0]).unwrap();
            let h = t.add_bias(h, v[1]).unwrap();
            let h = t.activation(h, Activation::Tanh);
            let y = t.matmul(h, v[2]).unwrap();
            let y2 = t.mul(y, y).unwrap();
            t.sum(y2)
        })
    })
}

/// Configuration small enough for finite differences over every parameter.
pub fn tiny_config(seed: u64) -> RunConfig {
    RunConfig {
        candidates: vec![1, 2, 3, 4, 5],
        bands: 3,
        aligned_dim: 3,
        hidden_dim: Some(3),
        mlp_layers: 2,
        meta_filters: vec![1, 2],
        activation: Activation::Tanh,
        seed,
        ..RunConfig::default()
    }
}

/// Weighted loss of the full forward pass with respect to every parameter
/// of a model built on a 10-target-node graph. Meta-path weights start
/// inside `(0, 1)` so the check does not sit on the projection boundary.
pub fn end_to_end(count: u64) -> f64 {
    seeds("grad/model", count, |rng| {
        let seed: u64 = rng.random_range(0..1_000_000);
        let graph = small_hin(seed, 10, 4, 3);
        let mut model = ChiGadModel::build(&graph, &tiny_config(seed)).unwrap();
        for slot in model.meta_weight_slots() {
            model.parameters_mut()[slot][(0, 0)] = rng.random_range(0.5..0.95);
        }
        let n = graph.target().count();
        let labels: Vec<f64> = graph.labels.iter().map(|l| l.as_target().unwrap()).collect();
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..2.0)).collect();
        let mask = vec![true; n];
        let params = model.parameters().to_vec();
        let model = &model;
        let graph = &graph;
        fd_max_rel_error(&params, move |t, v| {
            let (logits, _) = model.forward_with(t, v, graph).unwrap();
            t.weighted_softmax_ce(logits, &labels, &weights, &mask).unwrap()
        })
    })
}
