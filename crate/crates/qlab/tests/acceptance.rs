//! Runs every acceptance criterion at its stated tolerances and prints one
//! line per criterion. Criterion 2 fails on the published p₁ normalisation;
//! that failure is expected to be exactly a factor of six and nothing else.

use std::process::ExitCode;
use std::time::Instant;

use qlab::experiments::for_criterion;
use qlab::{run, Check, Config};

/// Stated wall-time budgets in seconds, reported but not enforced.
const BUDGETS: [f64; 17] = [1.0, 1.0, 5.0, 5.0, 10.0, 1.0, 10.0, 60.0, 10.0, 10.0, 30.0, 10.0, 10.0, 5.0, 20.0, 20.0, 60.0];

/// Checks whose published expected value is off by the factor 6.
const SIX_FOLD: [&str; 7] = [
    "cp2-pontrjagin.p0.p1-density",
    "cp2-pontrjagin.p1.p1-density",
    "cp2-pontrjagin.p2.p1-density",
    "cp2-pontrjagin.p1-total",
    "cp2-pontrjagin.p0.pontclaim-relative",
    "cp2-pontrjagin.p1.pontclaim-relative",
    "cp2-pontrjagin.p2.pontclaim-relative",
];

fn six_fold(c: &Check) -> bool {
    if c.id.ends_with("pontclaim-relative") {
        // p₁ − p₁/6 relative to p₁
        (c.computed - 5.0 / 6.0).abs() < 1e-9
    } else {
        (c.computed / c.expected - 6.0).abs() < 1e-9
    }
}

fn main() -> ExitCode {
    let cfg = Config::default();
    let mut unexpected = Vec::new();
    for (k, budget) in (1..=17).zip(BUDGETS) {
        let start = Instant::now();
        let mut checks = Vec::new();
        for name in for_criterion(k) {
            match run(name, &cfg) {
                Ok(report) => checks.extend(report.checks),
                Err(e) => unexpected.push(format!("criterion {k}: {name} errored: {e}")),
            }
        }
        let secs = start.elapsed().as_secs_f64();
        let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
        let verdict = if failed.is_empty() && !checks.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "criterion {k:>2} {verdict} {:<32} {}/{} checks, {secs:.2} s (budget {budget} s)",
            for_criterion(k).join(" + "),
            checks.len() - failed.len(),
            checks.len()
        );
        for c in &failed {
            println!("    FAIL {} computed {:.12e} expected {:.12e}", c.id, c.computed, c.expected);
            let known = k == 2 && SIX_FOLD.contains(&c.id.as_str()) && six_fold(c);
            if !known {
                unexpected.push(format!("criterion {k}: {}", c.id));
            }
        }
        if k == 2 && failed.len() != SIX_FOLD.len() {
            unexpected.push(format!("criterion 2: expected {} six-fold failures, got {}", SIX_FOLD.len(), failed.len()));
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria pass except the documented factor-6 p₁ normalisation in criterion 2");
        ExitCode::SUCCESS
    } else {
        for u in &unexpected {
            println!("unexpected: {u}");
        }
        ExitCode::FAILURE
    }
}
