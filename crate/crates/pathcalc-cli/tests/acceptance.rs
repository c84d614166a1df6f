//! Acceptance gate: one check per top-level criterion, each ending in a
//! single pass/fail line. Every check drives the released binary with its
//! default configuration, so what is gated here is exactly what ships.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

fn out_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("pathcalc-acceptance-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

struct SuiteRun {
    exit: Option<i32>,
    report: serde_json::Value,
    elapsed: Duration,
}

fn run_suite(suite: &str, extra: &[&str], tag: &str) -> SuiteRun {
    let out = out_dir(tag);
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_pathcalc"))
        .args(["--suite", suite, "--out"])
        .arg(&out)
        .args(extra)
        .status()
        .expect("binary launches");
    let elapsed = start.elapsed();
    let text = std::fs::read_to_string(out.join("report.json")).expect("report written");
    SuiteRun { exit: status.code(), report: serde_json::from_str(&text).unwrap(), elapsed }
}

fn entry<'a>(run: &'a SuiteRun, name: &str) -> &'a serde_json::Value {
    run.report["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["name"] == name)
        .unwrap_or_else(|| panic!("entry {name} present"))
}

fn verdict(criterion: &str, pass: bool) {
    println!("criterion {criterion}: {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed");
}

#[test]
fn criterion_1_lookback_value_by_monte_carlo() {
    // 10⁵ paths × 2¹² steps, single-threaded, < 60 s; value within
    // 4·SE + 0.01 of √(2/π).
    let run = run_suite("lookback", &["--workers", "1"], "c1");
    let e = entry(&run, "lookback/mc_value");
    let exact = (2.0 / std::f64::consts::PI).sqrt();
    let pass = run.exit == Some(0)
        && (e["reference"].as_f64().unwrap() - exact).abs() < 1e-12
        && e["pass"].as_bool().unwrap()
        && run.elapsed < Duration::from_secs(60);
    verdict("1 (lookback Monte Carlo value)", pass);
}

#[test]
fn criterion_2_lookback_pde_residual() {
    // Closed-form residual on the 50×50×50 grid over [0, 0.99] × Q̄.
    let e = pathcalc::ppde::lookback_pde_check(50, 50, 50, 0.99, 1.0, 1e-10).unwrap();
    verdict("2 (lookback closed-form PDE residual ≤ 1e-10)", e.pass && e.value <= 1e-10);
}

#[test]
fn criterion_3_cylindrical_heat_residuals() {
    // 10-fixture corpus, Gauss–Hermite order 64, all residuals ≤ 1e-6, < 30 s.
    let run = run_suite("heat-solve", &[], "c3");
    let entries = run.report["entries"].as_array().unwrap();
    let pass = run.exit == Some(0)
        && entries.len() == 10
        && entries
            .iter()
            .all(|e| e["pass"].as_bool().unwrap() && e["value"].as_f64().unwrap() <= 1e-6)
        && run.elapsed < Duration::from_secs(30);
    verdict("3 (cylindrical heat residuals ≤ 1e-6)", pass);
}

#[test]
fn criterion_4_ito_residual_halving() {
    // u = η(0)² on Brownian paths: seed-averaged sup-residual factor in
    // [1.4, 2.6] when (ε, Δ) halve from (2⁻⁶, 2⁻¹²).
    let run = run_suite("ito-verify", &[], "c4");
    let e = entry(&run, "ito/residual_halving_factor");
    let factor = e["value"].as_f64().unwrap();
    let pass = run.exit == Some(0) && (1.4..=2.6).contains(&factor);
    verdict("4 (functional Ito residual halving)", pass);
}

#[test]
fn criterion_5_regularization_calculus() {
    // IBP gaps ≤ 1e-3 on the piecewise-linear corpus (both directions) and
    // the Brownian ensemble quadratic variation within 0.05 of 1.
    let run = run_suite("regint", &[], "c5");
    let entries = run.report["entries"].as_array().unwrap();
    let ibp_ok = entries
        .iter()
        .filter(|e| e["name"].as_str().unwrap().starts_with("regint/ibp"))
        .all(|e| e["pass"].as_bool().unwrap() && e["gap"].as_f64().unwrap() <= 1e-3);
    let qv = entry(&run, "regint/qv_brownian_mean");
    let qv_ok = qv["pass"].as_bool().unwrap() && qv["gap"].as_f64().unwrap() <= 0.05;
    verdict("5 (IBP gaps and ensemble covariation)", run.exit == Some(0) && ibp_ok && qv_ok);
}

#[test]
fn criterion_6_fejer_pipeline() {
    let run = run_suite("fejer", &[], "c6");
    let exact_ok = ["fejer/exact/constant", "fejer/exact/linear"].iter().all(|n| {
        let e = entry(&run, n);
        e["pass"].as_bool().unwrap() && e["value"].as_f64().unwrap() <= 1e-12
    });
    let decay_ok = ["fejer/error_ratio/sine", "fejer/error_ratio/brownian"].iter().all(|n| {
        let e = entry(&run, n);
        e["pass"].as_bool().unwrap() && e["value"].as_f64().unwrap() < 0.5
    });
    let bound = entry(&run, "fejer/uniform_bound_drift");
    verdict(
        "6 (Fejer exactness, decay, uniform bound)",
        run.exit == Some(0) && exact_ok && decay_ok && bound["pass"].as_bool().unwrap(),
    );
}

#[test]
fn criterion_7_strong_viscosity_convergence() {
    // Diagonal schedule n ∈ {8,16,32,64}: gaps to √(2/π) strictly decreasing
    // and the finest-level classical-solution consistency gap ≤ 0.02.
    let run = run_suite("sv-converge", &[], "c7");
    let sched = entry(&run, "sv/diagonal_schedule");
    let exact = (2.0 / std::f64::consts::PI).sqrt();
    let values: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|n| entry(&run, &format!("sv/consistency/n{n}"))["value"].as_f64().unwrap())
        .collect();
    let raw_gaps: Vec<f64> = values.iter().map(|v| (v - exact).abs()).collect();
    let decreasing = raw_gaps.windows(2).all(|w| w[1] < w[0]);
    let pass = run.exit == Some(0)
        && sched["pass"].as_bool().unwrap()
        && decreasing
        && entry(&run, "sv/consistency/n64")["gap"].as_f64().unwrap() <= 0.02;
    verdict("7 (strong-viscosity diagonal convergence)", pass);
}

#[test]
fn criterion_8_bsde_suite() {
    let run = run_suite("bsde", &[], "c8");
    let fk = entry(&run, "bsde/feynman_kac_gap");
    let fk_ok = fk["pass"].as_bool().unwrap() && fk["gap"].as_f64().unwrap() <= 1e-12;
    let disc = entry(&run, "bsde/discount_value");
    let exact = (-0.1f64).exp();
    let disc_ok = (disc["value"].as_f64().unwrap() - exact).abs() / exact <= 0.01;
    let names = [
        "bsde/comparison_terminal_shift",
        "bsde/comparison_generator_shift",
        "bsde/apriori_stability",
        "bsde/sde_convergence",
        "bsde/limit_diagnostic",
    ];
    let rest_ok = names.iter().all(|n| entry(&run, n)["pass"].as_bool().unwrap());
    verdict("8 (BSDE suite)", run.exit == Some(0) && fk_ok && disc_ok && rest_ok);
}

#[test]
fn criterion_9_reproducibility_across_workers() {
    let hash = |workers: &str, tag: &str| {
        let run = run_suite("regint", &["--seed", "99", "--workers", workers], tag);
        assert_eq!(run.exit, Some(0));
        run.report["content_hash"].as_str().unwrap().to_string()
    };
    let h1 = hash("1", "c9-w1");
    let h4 = hash("4", "c9-w4");
    let h1b = hash("1", "c9-w1b");
    verdict("9 (report hash reproducibility at 1 and N workers)", h1 == h4 && h1 == h1b);
}
