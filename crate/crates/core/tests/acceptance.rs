//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero only when a result differs from the recorded expectation.

use std::collections::BTreeMap;
use std::process::{Command, ExitCode};

use hspace::canonical::defining_function;
use hspace::config::{RunConfig, Suite};
use hspace::fixtures::FIXTURES;
use hspace::metrics::sample_points;
use hspace::report::{to_canonical_json, RunReport};
use hspace::runner::{run_verify, FD_POINTS};

const POINTS: usize = 100;
const EISENHART_TOL: f64 = 1e-8;
const INTEGRABILITY_TOL: f64 = 1e-7;
const FLIPPED_SIGN_MIN: f64 = 1e-2;
const VANISHING_TOL: f64 = 1e-9;
const PROOF_IDS_TOL: f64 = 1e-8;
const CONSTANT_SPREAD: f64 = 1e-8;
const VARYING_SPREAD: f64 = 1e-3;
const MIN_CURVATURE_POINTS: usize = 20;
const MIN_PLANES: usize = 10;
const FD_TOL: f64 = 1e-6;
const COMPATIBILITY_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-10;
const A1_VALUES: [f64; 3] = [1.0, 2.0, -3.0];

/// The T51 line element has g_44 = 0 while g_34 = -e5, so every symmetric
/// b built from the Jordan operator has b_44 = -a1 e5.
const KNOWN_VANISHING_FAILURE: (&str, (usize, usize)) = ("t51_generic", (4, 4));

struct Outcome {
    passed: bool,
    detail: String,
}

fn generic_names() -> Vec<&'static str> {
    FIXTURES
        .iter()
        .map(|f| f.name)
        .filter(|n| !n.ends_with("_flat"))
        .collect()
}

fn config(name: &str) -> RunConfig {
    let f = FIXTURES.iter().find(|f| f.name == name).expect("fixture");
    let mut cfg = f.config().expect("fixture parses");
    cfg.sampler.count = POINTS;
    cfg
}

fn worst(r: &RunReport, check: &str) -> Option<f64> {
    let suite = check.split_once('.').map_or(check, |(h, _)| h);
    r.suites.get(suite)?.checks.get(check).map(|c| c.worst)
}

fn errors(r: &RunReport, suite: &str) -> usize {
    r.suites.get(suite).map_or(usize::MAX, |s| s.errors.len())
}

fn eval_points(r: &RunReport, check: &str) -> usize {
    r.points.iter().filter(|p| p.residuals.contains_key(check)).count()
}

fn criterion_eisenhart(reports: &BTreeMap<&str, RunReport>) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for name in generic_names() {
        let r = &reports[name];
        let w = worst(r, "eisenhart").unwrap_or(f64::MAX);
        let ok = w <= EISENHART_TOL && errors(r, "eisenhart") == 0 && eval_points(r, "eisenhart") == POINTS;
        passed &= ok;
        parts.push(format!("{name} {w:.1e}"));
    }
    Outcome {
        passed,
        detail: parts.join(", "),
    }
}

fn criterion_integrability(reports: &BTreeMap<&str, RunReport>) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for name in generic_names() {
        let r = &reports[name];
        let w = worst(r, "integrability").unwrap_or(f64::MAX);
        let mut flipped = config(name).with_suites(&[Suite::Integrability]).unwrap();
        flipped.solve.riemann_sign = -flipped.solve.riemann_sign;
        let fr = run_verify(&flipped).expect("flipped run");
        let fw = worst(&fr, "integrability").unwrap_or(0.0);
        let ok = w <= INTEGRABILITY_TOL && errors(r, "integrability") == 0 && fw > FLIPPED_SIGN_MIN && !fr.passed;
        passed &= ok;
        parts.push(format!("{name} {w:.1e} (flipped {fw:.1e})"));
    }
    Outcome {
        passed,
        detail: parts.join(", "),
    }
}

/// Returns the outcome and whether every failure is the recorded one.
fn criterion_vanishing(reports: &BTreeMap<&str, RunReport>) -> (Outcome, bool) {
    let mut passed = true;
    let mut only_known = true;
    let mut parts = Vec::new();
    for name in generic_names() {
        let r = &reports[name];
        let suite = &r.suites["vanishing"];
        for (check, c) in &suite.checks {
            if c.worst <= VANISHING_TOL {
                continue;
            }
            passed = false;
            let slot = suite.notes.get("worst_b_slot").cloned().unwrap_or_default();
            let (known_name, (a, b)) = KNOWN_VANISHING_FAILURE;
            let known = name == known_name && check == "vanishing.b" && slot == format!("({a},{b})");
            only_known &= known;
            parts.push(format!("{name} {check} {:.1e} at slot {slot}", c.worst));
        }
        only_known &= suite.errors.is_empty() && eval_points(r, "vanishing.b") == POINTS;
    }
    if parts.is_empty() {
        parts.push("all zero-pattern entries vanish".into());
    }
    (
        Outcome {
            passed,
            detail: parts.join(", "),
        },
        only_known,
    )
}

fn criterion_proof_ids(reports: &BTreeMap<&str, RunReport>) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for name in generic_names() {
        let r = &reports[name];
        let suite = &r.suites["proof_ids"];
        let w = suite.checks.values().map(|c| c.worst).fold(0.0, f64::max);
        passed &= w <= PROOF_IDS_TOL && suite.errors.is_empty() && !suite.checks.is_empty();
        parts.push(format!("{name} {} ids {w:.1e}", suite.checks.len()));
    }
    Outcome {
        passed,
        detail: parts.join(", "),
    }
}

fn criterion_curvature(reports: &BTreeMap<&str, RunReport>) -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for f in FIXTURES {
        let r = &reports[f.name];
        let Some(cv) = &r.curvature else {
            passed = false;
            parts.push(format!("{} missing", f.name));
            continue;
        };
        let flat = f.name.ends_with("_flat");
        let enough = r.points.len() >= MIN_CURVATURE_POINTS && cv.planes >= r.points.len() * MIN_PLANES;
        let ok = if flat {
            cv.predicate && cv.spread <= CONSTANT_SPREAD
        } else {
            !cv.predicate && cv.spread >= VARYING_SPREAD
        };
        passed &= ok && enough;
        parts.push(format!("{} {} {:.1e}", f.name, cv.predicate, cv.spread));
    }
    Outcome {
        passed,
        detail: parts.join(", "),
    }
}

fn criterion_fd(reports: &BTreeMap<&str, RunReport>) -> Outcome {
    let mut passed = true;
    let mut w_all = 0.0_f64;
    for r in reports.values() {
        let w = worst(r, "metric.fd").unwrap_or(f64::MAX);
        passed &= w <= FD_TOL && eval_points(r, "metric.fd") == FD_POINTS && errors(r, "metric") == 0;
        w_all = w_all.max(w);
    }
    Outcome {
        passed,
        detail: format!("worst relative disagreement {w_all:.1e} over {FD_POINTS} points per fixture"),
    }
}

fn criterion_tensors(reports: &BTreeMap<&str, RunReport>) -> Outcome {
    let (mut c, mut s, mut passed) = (0.0_f64, 0.0_f64, true);
    for r in reports.values() {
        let wc = worst(r, "tensors.compatibility").unwrap_or(f64::MAX);
        let ws = worst(r, "tensors.symmetries").unwrap_or(f64::MAX);
        passed &= wc <= COMPATIBILITY_TOL
            && ws <= SYMMETRY_TOL
            && errors(r, "tensors") == 0
            && eval_points(r, "tensors.symmetries") == POINTS;
        c = c.max(wc);
        s = s.max(ws);
    }
    Outcome {
        passed,
        detail: format!("compatibility {c:.1e}, symmetries {s:.1e}"),
    }
}

fn criterion_scaling() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for name in generic_names() {
        let base = config(name);
        let pts = sample_points(&base.spec, &base.sampler).expect("sampling");
        let mut phi_dev = 0.0_f64;
        for p in &pts {
            let one = defining_function(&base.spec, 1.0, p);
            for c in A1_VALUES {
                let scaled = defining_function(&base.spec, c, p);
                phi_dev = phi_dev.max(scaled.rel_diff(&one.scale(c)));
            }
        }
        passed &= phi_dev <= 1e-15;
        let mut known_b = Vec::new();
        for c in A1_VALUES {
            let mut cfg = base.clone();
            cfg.solve.a1 = c;
            let r = run_verify(&cfg).expect("scaled run");
            for (suite, res) in &r.suites {
                for (check, cr) in &res.checks {
                    if cr.passed {
                        continue;
                    }
                    if name == KNOWN_VANISHING_FAILURE.0 && check == "vanishing.b" {
                        known_b.push(cr.worst);
                    } else {
                        passed = false;
                        parts.push(format!("{name} a1={c} {suite}/{check} failed"));
                    }
                }
                passed &= res.errors.is_empty();
            }
        }
        // the conflicting entry is itself linear in a1, so its relative size is fixed
        if let Some(&first) = known_b.first() {
            passed &= known_b.len() == A1_VALUES.len()
                && known_b.iter().all(|w| (w - first).abs() <= 1e-12 * first);
        }
    }
    if parts.is_empty() {
        parts.push(format!(
            "phi linear in a1; suites unchanged for a1 in {A1_VALUES:?} (t51 b_44 excepted, see criterion 3)"
        ));
    }
    Outcome {
        passed,
        detail: parts.join(", "),
    }
}

fn criterion_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_hspace");
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/t33_generic.json");
    let run = |threads: &str| {
        Command::new(bin)
            .args(["verify", path, "--format", "json"])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .expect("spawn hspace")
    };
    let (a, b, c) = (run("1"), run("1"), run("4"));
    let same = a.stdout == b.stdout && a.stdout == c.stdout && !a.stdout.is_empty();
    let direct = {
        let cfg = config("t33_generic");
        let r1 = to_canonical_json(&run_verify(&cfg).unwrap()).unwrap();
        let r2 = to_canonical_json(&run_verify(&cfg).unwrap()).unwrap();
        r1 == r2
    };
    Outcome {
        passed: same && direct && a.status.success(),
        detail: format!("{} bytes, identical across runs and thread counts: {}", a.stdout.len(), same),
    }
}

fn main() -> ExitCode {
    let reports: BTreeMap<&str, RunReport> = FIXTURES
        .iter()
        .map(|f| (f.name, run_verify(&config(f.name)).expect("fixture run")))
        .collect();

    let (vanishing, only_known) = criterion_vanishing(&reports);
    let results = [
        ("1 eisenhart exactness", criterion_eisenhart(&reports)),
        ("2 integrability exactness", criterion_integrability(&reports)),
        ("3 vanishing conditions", vanishing),
        ("4 proof identities", criterion_proof_ids(&reports)),
        ("5 constant curvature equivalence", criterion_curvature(&reports)),
        ("6 differentiation engine", criterion_fd(&reports)),
        ("7 tensor identities", criterion_tensors(&reports)),
        ("8 scaling law", criterion_scaling()),
        ("9 determinism", criterion_determinism()),
    ];

    let mut unexpected = Vec::new();
    for (label, out) in &results {
        println!("{} criterion {label}: {}", if out.passed { "PASS" } else { "FAIL" }, out.detail);
        let expected_pass = !label.starts_with('3');
        if out.passed != expected_pass {
            unexpected.push(*label);
        }
    }
    if !only_known {
        unexpected.push("3 vanishing conditions (failure set differs from the known t51 b_44 entry)");
    }
    if unexpected.is_empty() {
        println!("acceptance: results match expectations (criterion 3 fails only at the t51 b_44 entry)");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected results: {}", unexpected.join("; "));
        ExitCode::FAILURE
    }
}
