//! Helpers shared by the integration tests.
#![allow(dead_code)]

use chigad::ad::{Tape, Var};
use chigad::hin::{HeteroGraph, Label, NodeType, Relation, Splits};
use chigad::rng::{named_rng, Rng};
use chigad::sparse::CsrMatrix;
use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;

pub const FD_STEP: f64 = 1e-5;

pub fn gaussian(rng: &mut Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn uniform(rng: &mut Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

/// Values bounded away from zero, so activation kinks are never straddled
/// by a finite-difference step.
pub fn away_from_zero(rng: &mut Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let v: f64 = rng.random_range(0.05..2.0);
        if rng.random::<bool>() {
            v
        } else {
            -v
        }
    })
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Largest relative discrepancy between reverse-mode gradients and central
/// finite differences of the scalar built by `f` over `params`.
pub fn fd_max_rel_error(params: &[DMatrix<f64>], f: impl Fn(&mut Tape, &[Var]) -> Var) -> f64 {
    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|p| tape.param(p.clone())).collect();
    let out = f(&mut tape, &vars);
    tape.backward(out).expect("backward");
    let eval = |ps: &[DMatrix<f64>]| {
        let mut t = Tape::new();
        let vs: Vec<Var> = ps.iter().map(|p| t.param(p.clone())).collect();
        let o = f(&mut t, &vs);
        t.scalar(o)
    };
    let mut worst: f64 = 0.0;
    for (k, v) in vars.iter().enumerate() {
        let analytic = tape.grad(*v);
        for j in 0..params[k].len() {
            let mut plus = params.to_vec();
            plus[k][j] += FD_STEP;
            let mut minus = params.to_vec();
            minus[k][j] -= FD_STEP;
            let numeric = (eval(&plus) - eval(&minus)) / (2.0 * FD_STEP);
            worst = worst.max(rel_err(analytic[j], numeric));
        }
    }
    worst
}

pub fn path_adjacency(n: usize) -> CsrMatrix {
    let pairs: Vec<(usize, usize)> = (0..n - 1).flat_map(|i| [(i, i + 1), (i + 1, i)]).collect();
    CsrMatrix::from_pattern(n, n, pairs).unwrap()
}

/// Erdős–Rényi graph without self-loops.
pub fn random_adjacency(rng: &mut Rng, n: usize, p: f64) -> CsrMatrix {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                pairs.push((i, j));
                pairs.push((j, i));
            }
        }
    }
    CsrMatrix::from_pattern(n, n, pairs).unwrap()
}

pub fn random_bipartite(rng: &mut Rng, rows: usize, cols: usize, p: f64) -> CsrMatrix {
    let mut pairs = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.random::<f64>() < p {
                pairs.push((i, j));
            }
        }
    }
    CsrMatrix::from_pattern(rows, cols, pairs).unwrap()
}

/// A small three-type graph: targets `a` (with self relation), `b` and `c`
/// linked to `a` in both directions. Every target is labelled, with at
/// least two anomalies and splits of 50/25/25%.
pub fn small_hin(seed: u64, n_a: usize, n_b: usize, n_c: usize) -> HeteroGraph {
    let mut rng = named_rng(seed, "test/small-hin");
    let node_types = vec![
        NodeType {
            name: "a".into(),
            features: gaussian(&mut rng, n_a, 3),
        },
        NodeType {
            name: "b".into(),
            features: gaussian(&mut rng, n_b, 2),
        },
        NodeType {
            name: "c".into(),
            features: gaussian(&mut rng, n_c, 4),
        },
    ];
    let aa = random_adjacency(&mut rng, n_a, 0.35);
    let ab = random_bipartite(&mut rng, n_a, n_b, 0.4);
    let ac = random_bipartite(&mut rng, n_a, n_c, 0.4);
    let relations = vec![
        Relation {
            name: "a_a".into(),
            src: 0,
            dst: 0,
            adjacency: aa,
        },
        Relation {
            name: "a_b".into(),
            src: 0,
            dst: 1,
            adjacency: ab.clone(),
        },
        Relation {
            name: "a_c".into(),
            src: 0,
            dst: 2,
            adjacency: ac.clone(),
        },
        Relation {
            name: "b_a".into(),
            src: 1,
            dst: 0,
            adjacency: ab.transpose(),
        },
        Relation {
            name: "c_a".into(),
            src: 2,
            dst: 0,
            adjacency: ac.transpose(),
        },
    ];
    let labels: Vec<Label> = (0..n_a)
        .map(|i| if i % 4 == 1 { Label::Anomalous } else { Label::Benign })
        .collect();
    let ids: Vec<usize> = (0..n_a).collect();
    let (n_train, n_val) = (n_a / 2, n_a / 4);
    let splits = Splits {
        train: ids[..n_train].to_vec(),
        val: ids[n_train..n_train + n_val].to_vec(),
        test: ids[n_train + n_val..].to_vec(),
    };
    let g = HeteroGraph {
        node_types,
        relations,
        target_type: 0,
        labels,
        splits,
    };
    g.validate().unwrap();
    g
}
pub mod gradients;
pub mod oracles;
