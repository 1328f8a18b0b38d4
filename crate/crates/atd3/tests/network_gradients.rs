mod support;

use support::gradcheck::CheckResult;
use support::netgrad::{actor_fixtures, critic_fixtures};

fn check(r: CheckResult, count: usize) {
    assert_eq!(r.fixtures, count);
    assert!(r.passed(), "{:#?}", &r.failures[..r.failures.len().min(5)]);
}

#[test]
fn dense_actor_matches_finite_differences() {
    check(actor_fixtures(false, 100, 0), 100);
}

#[test]
fn recurrent_actor_matches_finite_differences() {
    check(actor_fixtures(true, 100, 10_000), 100);
}

#[test]
fn dense_critic_matches_finite_differences() {
    check(critic_fixtures(false, 100, 20_000), 100);
}

#[test]
fn recurrent_critic_matches_finite_differences() {
    check(critic_fixtures(true, 100, 30_000), 100);
}
