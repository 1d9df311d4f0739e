use bregman_epf::demand::{marshallian_demand, mrs_on_path, Economy};
use bregman_epf::rng::DEFAULT_SEED;
use bregman_epf::verify::run_criterion;
use bregman_epf::Generator;

fn assert_green(id: u8) {
    let out = run_criterion(id, DEFAULT_SEED).unwrap();
    assert!(out.pass, "criterion {id}: {} ({} of {} failed)", out.detail, out.failures, out.checks);
}

#[test]
fn exhaustivity_suite() {
    assert_green(1);
}

#[test]
fn production_function_suites() {
    assert_green(2);
    assert_green(3);
}

#[test]
fn minimizer_suite() {
    assert_green(4);
}

#[test]
fn transition_suites() {
    for id in [5, 6, 7, 10] {
        assert_green(id);
    }
}

#[test]
fn demand_suite() {
    assert_green(8);
}

#[test]
fn duality_and_lemma_suites() {
    assert_green(11);
    assert_green(12);
}

#[test]
fn suites_are_deterministic() {
    assert_eq!(run_criterion(6, 7).unwrap(), run_criterion(6, 7).unwrap());
}

#[test]
fn on_path_rate_is_the_price_ratio() {
    // ∂μ/∂x_i ∝ γ_i φ''(x_i) and φ''(x_i) ∝ p_i/γ_i on the path
    let cd = Generator::cobb_douglas();
    let econ = Economy::new(1.0, vec![2.0, 1.0], vec![1.0, 3.0], Some(6.0), None).unwrap();
    let sol = marshallian_demand(&cd, &econ).unwrap();
    let mrs = mrs_on_path(&cd, &econ, &sol.bundle, 0, 1).unwrap();
    assert!((mrs - 2.0).abs() < 1e-8);
    assert!((econ.unit_cost_ratio(0, 1) - 6.0).abs() < 1e-15);
}
