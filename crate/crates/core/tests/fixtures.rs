use std::path::PathBuf;

use dunkl_core::fixtures::{cross_check, FixtureSet};

fn reference() -> FixtureSet {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/reference.json");
    FixtureSet::load(path).expect("fixture file loads")
}

#[test]
fn every_fixture_within_tolerance() {
    let outcomes = cross_check(&reference());
    assert!(!outcomes.is_empty());
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn fixtures_cover_each_operation_family() {
    let set = reference();
    for op in ["laguerre", "bessel_i_scaled", "gamma_complex", "hermite_fn", "heat_kernel_1d", "half_ball_measure", "kernel_zeta_route", "kernel_t_route"] {
        assert!(set.fixtures.iter().any(|f| f.op == op), "no fixture for {op}");
    }
}
