use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn curves_for_the_pure_pair() {
    let v = parse(ud_web::bound_curves("pure", 0.5, 0.0, 3, 99));
    let curves = v["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 3);
    // eta1 = 0.5 sits at index 49; q_opt(n) = s^n there.
    assert_eq!(v["eta1"][49], 0.5);
    for (k, c) in curves.iter().enumerate() {
        let q = c["q_opt"][49].as_f64().unwrap();
        assert!((q - 0.5f64.powi(k as i32 + 1)).abs() < 1e-12);
    }
}

#[test]
fn errors_are_json() {
    let v = parse(ud_web::bound_curves("nope", 0.5, 0.0, 3, 10));
    assert_eq!(v["error"]["kind"], "RangeError");
    let v = parse(ud_web::compare("pure", 1.0, 0.0, 0.5, 2));
    assert_eq!(v["error"]["kind"], "NotFeasible");
    let v = parse(ud_web::bound_curves("pure", 0.5, 0.0, 0, 10));
    assert!(v["error"].is_object());
}

#[test]
fn compare_and_simulate() {
    let v = parse(ud_web::compare("counterexample", 0.5, 0.5, 0.5, 2));
    assert_eq!(
        v["q_opt_1"].as_f64().map(|q| (q - 0.5).abs() < 1e-10),
        Some(true)
    );

    let v = parse(ud_web::simulate(
        "counterexample",
        0.5,
        0.5,
        0.5,
        100_000,
        1,
    ));
    let rate = v["stats"]["failure"]["rate"].as_f64().unwrap();
    let se = v["stats"]["failure"]["std_error"].as_f64().unwrap();
    assert!((rate - v["exact_failure"].as_f64().unwrap()).abs() < 4.0 * se);
    assert_eq!(v["stats"]["error"]["rate"], 0.0);

    let v = parse(ud_web::simulate("pure", 0.6, 0.0, 0.3, 100_000, 2));
    assert!((v["exact_failure"].as_f64().unwrap() - v["q_opt"].as_f64().unwrap()).abs() < 1e-12);
}
