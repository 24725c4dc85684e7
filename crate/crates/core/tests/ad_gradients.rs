mod common;

use common::gradients;

const SEEDS: u64 = 50;
const OP_TOL: f64 = 1e-4;

#[test]
fn matmul_matches_finite_differences() {
    let err = gradients::matmul(SEEDS);
    assert!(err < OP_TOL, "{err}");
}

#[test]
fn add_mul_scale_match_finite_differences() {
    let err = gradients::add_mul_scale(SEEDS);
    assert!(err < OP_TOL, "{err}");
}

#[test]
fn bias_rows_and_stacking_match_finite_differences() {
    let err = gradients::bias_rows_stack(SEEDS);
    assert!(err < OP_TOL, "{err}");
}

#[test]
fn activations_match_finite_differences() {
    let err = gradients::activations(SEEDS);
    assert!(err < OP_TOL, "{err}");
}

#[test]
fn sparse_polynomial_matches_finite_differences() {
    let err = gradients::sparse_poly(SEEDS);
    assert!(err < OP_TOL, "{err}");
}

#[test]
fn weighted_cross_entropy_matches_finite_differences() {
    let err = gradients::softmax_ce(SEEDS);
    assert!(err < OP_TOL, "{err}");
}

#[test]
fn chained_layers_match_finite_differences() {
    let err = gradients::chained(SEEDS);
    assert!(err < OP_TOL, "{err}");
}

#[test]
fn full_model_matches_finite_differences() {
    let err = gradients::end_to_end(10);
    assert!(err < 1e-3, "{err}");
}
