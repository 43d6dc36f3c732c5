use dfjss_web::{evaluate_rule_json, evolve_json, simulate_json};
use serde_json::Value;

#[test]
fn evaluates_with_partial_context() {
    let v: Value = serde_json::from_str(&evaluate_rule_json("PT / (W - W)", r#"{"pt": 3, "w": 2}"#).unwrap()).unwrap();
    assert_eq!(v["value"], 1.0);
    assert_eq!(v["canonical"], "(PT / (W - W))");
    assert_eq!(v["depth"], 3);
    assert!(evaluate_rule_json("PT +", "").is_err());
    assert!(evaluate_rule_json("PT", r#"{"speed": 1}"#).unwrap_err().contains("speed"));
}

#[test]
fn simulation_returns_objectives_and_bars() {
    let v: Value = serde_json::from_str(&simulate_json("WIQ", "PT", 200, 0.85, 1, 50).unwrap()).unwrap();
    assert_eq!(v["bars"].as_array().unwrap().len(), 50);
    assert_eq!(v["machines"], 10);
    assert!(v["objectives"]["Fmean"].as_f64().unwrap() > 0.0);
    assert!(simulate_json("WIQ", "PT", 5, 0.85, 1, 10).is_err());
    assert!(simulate_json("WIQ", "PT", 200, 1.5, 1, 10).is_err());
}

#[test]
fn tiny_evolution_is_repeatable() {
    let a = evolve_json(10, 3, 100, 9).unwrap();
    assert_eq!(a, evolve_json(10, 3, 100, 9).unwrap());
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["best_per_generation"].as_array().unwrap().len(), 3);
    assert!(evolve_json(500, 3, 100, 9).is_err());
}
