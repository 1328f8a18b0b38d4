//! Analytic gradients against central finite differences.

mod support;

use atd3_nn::Activation;
use support::gradcheck::{dense_fixtures, gru_sequence_fixtures, gru_step_fixtures, mlp_fixtures, CheckResult};

const TRIALS: usize = 100;

fn check(r: CheckResult) {
    assert_eq!(r.fixtures, TRIALS);
    assert!(r.passed(), "{:#?}", &r.failures[..r.failures.len().min(5)]);
}

#[test]
fn dense_layers_match_finite_differences() {
    for act in [Activation::Identity, Activation::Relu, Activation::Tanh] {
        check(dense_fixtures(act, TRIALS, 0));
    }
}

#[test]
fn two_layer_relu_network_matches_finite_differences() {
    check(mlp_fixtures(TRIALS, 1000));
}

#[test]
fn gru_step_matches_finite_differences() {
    check(gru_step_fixtures(TRIALS, 2000));
}

#[test]
fn gru_sequence_matches_finite_differences() {
    check(gru_sequence_fixtures(TRIALS, 3000));
}
