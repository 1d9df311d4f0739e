use bregman_epf_wasm::{divergence_curve_json, isoquant_json, path_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn isoquant_points_hold_the_level() {
    let v = parse(&isoquant_json("cobb_douglas", "", &[1.0, 1.0], 2.0, 0.5, 8.0, 40).unwrap());
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 40);
    for p in pts {
        let (a, b) = (p[0].as_f64().unwrap(), p[1].as_f64().unwrap());
        // geometric mean
        assert!(((a * b).sqrt() - 2.0).abs() < 1e-12);
    }
    let v = parse(&isoquant_json("squared_euclidean", "{}", &[1.0, 3.0], 1.0, -2.0, 2.0, 5).unwrap());
    for p in v["points"].as_array().unwrap() {
        let (a, b) = (p[0].as_f64().unwrap(), p[1].as_f64().unwrap());
        assert!(((a + 3.0 * b) / 4.0 - 1.0).abs() < 1e-14);
    }
}

#[test]
fn path_trace_ends_at_the_divergence() {
    let v = parse(&path_json("kullback_leibler", "", &[1.0, 2.0], &[2.0, 1.0], 11).unwrap());
    let cost = v["cumulative_cost"].as_array().unwrap();
    assert_eq!(cost.len(), 11);
    // D(2‖1) + D(1‖2) = 2 ln 2 − 1 + ln(1/2) + 1
    let oracle = (2.0f64).ln();
    assert!((cost[10].as_f64().unwrap() - oracle).abs() < 1e-14);
}

#[test]
fn divergence_curve_is_zero_at_the_reference() {
    let v = parse(&divergence_curve_json("gem", r#"{"theta":1}"#, 0.0, -1.0, 1.0, 3).unwrap());
    assert_eq!(v["left"][1].as_f64().unwrap(), 0.0);
    assert_eq!(v["right"][1].as_f64().unwrap(), 0.0);
    assert!(v["left"][0].as_f64().unwrap() > 0.0);
    // log-mean-exp of (−1, 1)
    let agg = ((-1.0f64).exp() / 2.0 + (1.0f64).exp() / 2.0).ln();
    assert!((v["aggregate"].as_f64().unwrap() - agg).abs() < 1e-12);
}

#[test]
fn errors_are_messages() {
    assert!(isoquant_json("nope", "", &[1.0, 1.0], 1.0, 0.0, 1.0, 3).is_err());
    assert!(path_json("itakura_saito", "", &[0.0], &[1.0], 3).unwrap_err().contains("domain"));
    assert!(divergence_curve_json("ces", r#"{"sigma":"x"}"#, 1.0, 0.5, 2.0, 3).is_err());
}
