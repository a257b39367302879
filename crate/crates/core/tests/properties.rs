mod common;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

fn run(prop: fn(u64) -> common::Check) {
    let config = Config {
        cases: 20,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]);
    let mut runner = TestRunner::new_with_rng(config, rng);
    runner
        .run(&any::<u64>(), |seed| prop(seed).map_err(TestCaseError::fail))
        .unwrap();
}

#[test]
fn domination() {
    run(common::domination);
}

#[test]
fn semigroup_law() {
    run(common::semigroup_law);
}

#[test]
fn eigenvalue_monotonicity() {
    run(common::eigenvalue_monotonicity);
}

#[test]
fn counting_monotone() {
    run(common::counting_monotone);
}

#[test]
fn trace_content_decreasing() {
    run(common::trace_content_decreasing);
}
