use qlab::{run, Comparison, Config, Format, Report};

fn without_wall_time(json: &str) -> String {
    json.lines().filter(|l| !l.contains("wall_time_s")).collect::<Vec<_>>().join("\n")
}

#[test]
fn json_round_trips() {
    let report = run("cp2-constants", &Config::default()).unwrap();
    let json = report.to_json().unwrap();
    assert_eq!(Report::from_json(&json).unwrap(), report);
    // bound-only checks carry a null expected value
    let eigen = run("cp2xN-eigen", &Config::default()).unwrap();
    let json = eigen.to_json().unwrap();
    assert!(json.contains("\"expected\": null"));
    assert_eq!(Report::from_json(&json).unwrap().to_json().unwrap(), json);
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let report = run("cp2-constants", &Config::default()).unwrap();
    let json = report.to_json().unwrap();
    assert!(json.contains("\"expected\": 2.4000000000000000e+1"), "{json}");
    let c = report.check("cp2-constants.volume").unwrap();
    let text = format!("{:.16e}", c.computed);
    assert_eq!(text.parse::<f64>().unwrap(), c.computed);
}

#[test]
fn csv_has_one_row_per_check() {
    let report = run("avez-identity", &Config::default()).unwrap();
    let csv = report.to_csv().unwrap();
    assert_eq!(csv.lines().count(), report.checks.len() + 1);
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["experiment", "check_id", "computed", "expected", "provenance", "tolerance", "pass"]
    );
}

#[test]
fn text_marks_failures() {
    let report = run("cp2-pontrjagin", &Config::default()).unwrap();
    let text = report.render(Format::Text).unwrap();
    let fails = text.lines().filter(|l| l.starts_with("FAIL ")).count();
    assert_eq!(fails, report.failures().count());
    assert!(fails > 0);
}

#[test]
fn identical_seed_gives_identical_json() {
    let cfg = Config::default();
    let a = run("tractor-trace", &cfg).unwrap().to_json().unwrap();
    let b = run("tractor-trace", &cfg).unwrap().to_json().unwrap();
    assert_eq!(without_wall_time(&a), without_wall_time(&b));
    let mut other = Config::default();
    other.set("seed", "8").unwrap();
    let c = run("tractor-trace", &other).unwrap().to_json().unwrap();
    assert_ne!(without_wall_time(&a), without_wall_time(&c));
}

#[test]
fn tolerance_override_changes_verdict() {
    let mut cfg = Config::default();
    cfg.set("tol.cp2-pontrjagin.p1-total", "6").unwrap();
    let report = run("cp2-pontrjagin", &cfg).unwrap();
    let c = report.check("cp2-pontrjagin.p1-total").unwrap();
    assert_eq!(c.tolerance, 6.0);
    assert!(c.pass);
    assert_eq!(c.comparison, Comparison::Relative);
    assert_eq!(report.config["tol.cp2-pontrjagin.p1-total"], "6e0");
}

#[test]
fn judge_semantics() {
    assert!(Comparison::Absolute.judge(1.0, 1.5, 0.5));
    assert!(!Comparison::Relative.judge(1.0, 2.0, 0.4));
    assert!(Comparison::AtMost.judge(1e-9, 0.0, 1e-8));
    assert!(!Comparison::AtMost.judge(f64::NAN, 0.0, 1.0));
    assert!(Comparison::AtLeast.judge(2.0, f64::NAN, 1.0));
}
