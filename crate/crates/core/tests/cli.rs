use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hspace::config::parse_config;
use hspace::report::{emit_report, Format, RunReport};
use hspace::runner::run_verify;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hspace"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

fn verify(args: &[&str]) -> Output {
    bin().arg("verify").args(args).output().unwrap()
}

fn write_config(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn with_fields(base: &str, fields: &str) -> String {
    let text = std::fs::read_to_string(fixture(base)).unwrap();
    text.replacen('{', &format!("{{ {fields},"), 1)
}

#[test]
fn generic_t33_passes_every_suite() {
    let out = verify(&[fixture("t33_generic").to_str().unwrap(), "--points", "30"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: RunReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report.passed);
    assert_eq!(report.suites.len(), 7);
}

#[test]
fn flipped_riemann_sign_fails_integrability() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "flip.json", &with_fields("t33_generic", "\"riemann_sign\": -1"));
    let out = verify(&[&cfg, "--points", "20", "--format", "text"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "FAIL integrability"), "{text}");
    assert!(text.lines().any(|l| l == "PASS eisenhart"), "{text}");
}

#[test]
fn text_report_has_one_line_per_selected_suite() {
    let out = verify(&[
        fixture("t411_generic").to_str().unwrap(),
        "--format",
        "text",
        "--suite",
        "eisenhart",
        "--suite",
        "curvature",
        "--points",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let status: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("PASS ") || l.starts_with("FAIL "))
        .collect();
    assert_eq!(status, ["PASS curvature", "PASS eisenhart"]);
}

#[test]
fn empty_suite_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "empty.json", &with_fields("t51_generic", "\"suites\": []"));
    let out = verify(&[&cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("suites"));
}

#[test]
fn syntax_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "bad.json", "{\n  \"type\": \"T51\"\n  \"eps\": 1\n}");
    let out = verify(&[&cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = verify(&["/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn impossible_margin_exhausts_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "tight.json",
        &with_fields("t51_generic", "\"sampler\": {\"margin\": 1000.0, \"count\": 5}"),
    );
    let out = verify(&[&cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sampling exhausted"));
}

#[test]
fn output_file_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("t2211_generic");
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3", "3"].iter().enumerate() {
        let path = dir.path().join(format!("r{i}.json"));
        let status = bin()
            .args(["verify", cfg.to_str().unwrap(), "--points", "25", "--out", path.to_str().unwrap()])
            .env("RAYON_NUM_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn seed_and_point_overrides_change_the_sample() {
    let cfg = fixture("t51_flat");
    let run = |seed: &str| {
        let out = verify(&[cfg.to_str().unwrap(), "--suite", "metric", "--points", "5", "--seed", seed]);
        serde_json::from_slice::<RunReport>(&out.stdout).unwrap()
    };
    let (a, b) = (run("1"), run("2"));
    assert_eq!(a.points.len(), 5);
    assert_eq!(a.config.sampler.seed, 1);
    assert_ne!(a.points[0].point, b.points[0].point);
}

#[test]
fn timing_is_opt_in() {
    let cfg = fixture("t51_flat");
    let run = |extra: &[&str]| {
        let mut args = vec![cfg.to_str().unwrap(), "--suite", "metric", "--points", "3"];
        args.extend_from_slice(extra);
        String::from_utf8(verify(&args).stdout).unwrap()
    };
    assert!(!run(&[]).contains("wall_clock_seconds"));
    assert!(run(&["--timing"]).contains("wall_clock_seconds"));
}

#[test]
fn json_round_trip_preserves_residuals() {
    let mut cfg = parse_config(&std::fs::read_to_string(fixture("t321_generic")).unwrap()).unwrap();
    cfg.sampler.count = 10;
    let report = run_verify(&cfg).unwrap();
    let bytes = emit_report(&report, Format::Json).unwrap();
    let back: RunReport = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(back, report);
    assert_eq!(emit_report(&back, Format::Json).unwrap(), bytes);
}

#[test]
fn fixtures_list_names_every_fixture() {
    let out = bin().args(["fixtures", "list"]).output().unwrap();
    let names: Vec<String> = String::from_utf8(out.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(names.len(), hspace::fixtures::FIXTURES.len());
    assert!(names.iter().all(|n| fixture(n).exists()));
}

#[test]
fn run_all_reports_the_t51_vanishing_failure() {
    let out = bin().args(["fixtures", "run-all", "--points", "10"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let failing: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failing, ["FAIL t51_generic (vanishing)", "FAIL t51_flat (vanishing)"]);
}
