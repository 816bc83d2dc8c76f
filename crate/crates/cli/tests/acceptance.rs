//! End-to-end acceptance: runs the full `verify` suite through the binary
//! under 1, 2 and 8 worker threads and prints one PASS/FAIL line per
//! criterion.

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

const TIME_BUDGET: Duration = Duration::from_secs(120);

/// Criterion label and the report checks it rests on.
const CRITERIA: [(&str, &[&str]); 11] = [
    ("rotation split", &["rotation-split"]),
    ("variational axis property", &["variational-axis"]),
    ("weierstrass identities", &["weierstrass-identities"]),
    ("minimality", &["minimality"]),
    ("gaussian curvature", &["gaussian-curvature"]),
    ("universal bending content", &["universality"]),
    ("bending-neutral association", &["bending-neutral"]),
    ("integrability", &["integrability"]),
    ("image minimality", &["image-minimality"]),
    ("bonnet isometry", &["bonnet-isometry"]),
    ("circulation theorem", &["circulation"]),
];

fn run(args: &[&str], threads: usize) -> (i32, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_minsurf")).args(args).env("MINSURF_THREADS", threads.to_string()).output().unwrap();
    (out.status.code().unwrap(), start.elapsed())
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    let mut meshes = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut exit_codes = Vec::new();
    for threads in [1, 2, 8] {
        let report = dir.path().join(format!("report-{threads}.json"));
        let (code, elapsed) = run(&["verify", "--out", report.to_str().unwrap()], threads);
        exit_codes.push(code);
        slowest = slowest.max(elapsed);
        reports.push(fs::read(&report).unwrap());

        let obj = dir.path().join(format!("bour-{threads}.obj"));
        let (code, _) = run(&["gen", "--surface", "bour:m=3", "--rmin", "0.05", "--out", obj.to_str().unwrap()], threads);
        assert_eq!(code, 0);
        meshes.push(fs::read(&obj).unwrap());
    }

    let report: Value = serde_json::from_slice(&reports[0]).unwrap();
    let checks = report["checks"].as_array().unwrap();
    let check = |id: &str| checks.iter().find(|c| c["check_id"] == id).unwrap_or_else(|| panic!("{id} missing"));
    let mut lines = Vec::new();
    for (label, ids) in CRITERIA {
        let pass = ids.iter().all(|id| check(id)["pass"] == true);
        let residual = ids.iter().map(|id| check(id)["max_residual"].as_f64().unwrap_or(f64::NAN)).fold(0.0, f64::max);
        lines.push((pass, format!("{label} ({}): max residual {residual:.3e}", ids.join(", "))));
    }
    let identical = reports.windows(2).all(|w| w[0] == w[1]) && meshes.windows(2).all(|w| w[0] == w[1]);
    let pass = identical && check("determinism-io")["pass"] == true && slowest < TIME_BUDGET;
    lines.push((
        pass,
        format!(
            "determinism & i/o (determinism-io): reports and meshes identical across 1/2/8 threads = {identical}, slowest full run {:.1} s",
            slowest.as_secs_f64()
        ),
    ));

    for (k, (pass, line)) in lines.iter().enumerate() {
        println!("{:>2}. {} {line}", k + 1, if *pass { "PASS" } else { "FAIL" });
    }
    let passed = lines.iter().filter(|(pass, _)| *pass).count();
    println!("acceptance: {passed}/{} criteria passed", lines.len());
    if passed < lines.len() || exit_codes.iter().any(|&c| c != 0) {
        eprintln!("verify exit codes {exit_codes:?}");
        std::process::exit(1);
    }
}
