//! Suite orchestration: sample, evaluate points in parallel, reduce in order.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::Matrix6;
use rayon::prelude::*;

use crate::calibration::calibrate;
use crate::canonical::{
    eisenhart_residual, integrability_residual, proof_relation_checks, vanishing_checks, PointEval,
};
use crate::config::{RunConfig, Suite};
use crate::curvature::cross_validate_constant_curvature;
use crate::error::Result;
use crate::jets::{fd_oracle, Point, DIM, FD_STEP};
use crate::metrics::{check_signature, metric_at, metric_values, sample_points, HSpaceSpec};
use crate::report::{CheckResult, PointSummary, RunReport, SuiteResult};
use crate::tensor::metric_compatibility;

/// Points checked against the finite-difference oracle.
pub const FD_POINTS: usize = 20;
/// Points used to calibrate sign, orientation and readings.
pub const CALIBRATION_POINTS: usize = 3;

/// Worst relative disagreement between the metric jets and central
/// differences of the metric values.
pub fn metric_fd_residual(spec: &HSpaceSpec, p: &Point) -> Result<f64> {
    let m = metric_at(spec, p)?;
    let mut worst = 0.0_f64;
    for i in 0..DIM {
        for j in i..DIM {
            let fd = fd_oracle(|q| Ok(metric_values(spec, q)?[(i, j)]), p, FD_STEP)?;
            worst = worst.max(m.g[i][j].rel_diff(&fd));
        }
    }
    Ok(worst)
}

#[derive(Default)]
struct PointOutcome {
    residuals: BTreeMap<String, f64>,
    errors: Vec<(Suite, String)>,
    signature: Option<(usize, usize)>,
    worst_b_slot: Option<(usize, usize)>,
}

impl PointOutcome {
    fn fail(&mut self, suites: &[Suite], msg: String) {
        for &s in suites {
            if s != Suite::Curvature {
                self.errors.push((s, msg.clone()));
            }
        }
    }
}

fn evaluate_point(cfg: &RunConfig, index: usize, p: &Point) -> PointOutcome {
    let spec = &cfg.spec;
    let mut out = PointOutcome::default();
    let metric = match metric_at(spec, p) {
        Ok(m) => m,
        Err(e) => {
            out.fail(&cfg.suites, e.to_string());
            return out;
        }
    };

    if cfg.has(Suite::Metric) {
        let g = metric.values();
        let ginv = Matrix6::from_fn(|i, j| metric.g_inv[i][j].val);
        let defect = (g * ginv - Matrix6::identity()).amax();
        out.residuals.insert("metric.inverse".into(), defect);
        match check_signature(&g) {
            Ok(sig) => {
                out.signature = Some(sig);
                if let Some(expected) = cfg.expected_signature {
                    if sig != expected {
                        out.errors
                            .push((Suite::Metric, format!("signature {sig:?}, expected {expected:?}")));
                    }
                }
            }
            Err(e) => out.errors.push((Suite::Metric, e.to_string())),
        }
        if index < FD_POINTS {
            match metric_fd_residual(spec, p) {
                Ok(r) => {
                    out.residuals.insert("metric.fd".into(), r);
                }
                Err(e) => out.errors.push((Suite::Metric, e.to_string())),
            }
        }
    }

    let needs_eval = [
        Suite::Tensors,
        Suite::Eisenhart,
        Suite::Integrability,
        Suite::Vanishing,
        Suite::ProofIds,
    ];
    if !needs_eval.iter().any(|s| cfg.has(*s)) {
        return out;
    }
    let ev = match PointEval::new(spec, p, &cfg.solve) {
        Ok(ev) => ev,
        Err(e) => {
            let selected: Vec<Suite> = needs_eval.into_iter().filter(|s| cfg.has(*s)).collect();
            out.fail(&selected, e.to_string());
            return out;
        }
    };
    if cfg.has(Suite::Tensors) {
        out.residuals
            .insert("tensors.compatibility".into(), metric_compatibility(&ev.metric, &ev.christoffel));
        out.residuals
            .insert("tensors.symmetries".into(), ev.riemann.symmetry_residuals().max());
    }
    if cfg.has(Suite::Eisenhart) {
        out.residuals.insert("eisenhart".into(), eisenhart_residual(&ev));
    }
    if cfg.has(Suite::Integrability) {
        out.residuals.insert("integrability".into(), integrability_residual(&ev));
    }
    if cfg.has(Suite::Vanishing) {
        let v = vanishing_checks(spec, &ev);
        out.residuals.insert("vanishing.b".into(), v.b);
        out.residuals
            .insert("vanishing.covariant_hessian".into(), v.covariant_hessian);
        out.residuals.insert("vanishing.plain_partials".into(), v.plain_partials);
        out.worst_b_slot = v.worst_b_slot;
    }
    if cfg.has(Suite::ProofIds) {
        for (label, r) in proof_relation_checks(spec, &ev) {
            out.residuals.insert(format!("proof_ids.{label}"), r);
        }
    }
    out
}

fn suite_of(check: &str) -> Option<Suite> {
    let head = check.split_once('.').map_or(check, |(h, _)| h);
    Suite::ALL.into_iter().find(|s| s.name() == head)
}

/// Run every selected suite. Sampling exhaustion aborts; any other error is
/// recorded against the suites it affects.
pub fn run_verify(cfg: &RunConfig) -> Result<RunReport> {
    let points = sample_points(&cfg.spec, &cfg.sampler)?;
    let cal_points = &points[..points.len().min(CALIBRATION_POINTS)];
    let calibration = calibrate(&cfg.spec, cal_points, &cfg.solve);

    let outcomes: Vec<PointOutcome> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| evaluate_point(cfg, i, p))
        .collect();

    let mut suites: BTreeMap<Suite, SuiteResult> =
        cfg.suites.iter().map(|&s| (s, SuiteResult::default())).collect();
    let mut signatures = BTreeSet::new();
    let mut worst_b: Option<(f64, (usize, usize))> = None;
    let mut summaries = Vec::with_capacity(points.len());
    for (i, (p, o)) in points.iter().zip(outcomes).enumerate() {
        for (check, &value) in &o.residuals {
            let Some(suite) = suite_of(check) else { continue };
            if let Some(res) = suites.get_mut(&suite) {
                res.checks
                    .entry(check.clone())
                    .or_insert_with(|| CheckResult::new(cfg.tolerance(check)))
                    .observe(value, i);
            }
        }
        for (suite, msg) in &o.errors {
            if let Some(res) = suites.get_mut(suite) {
                res.errors.push(format!("point {i}: {msg}"));
            }
        }
        if let Some(sig) = o.signature {
            signatures.insert(sig);
        }
        if let (Some(slot), Some(&b)) = (o.worst_b_slot, o.residuals.get("vanishing.b")) {
            if worst_b.is_none_or(|(w, _)| b > w) {
                worst_b = Some((b, slot));
            }
        }
        let mut errors: Vec<String> = o.errors.iter().map(|(s, m)| format!("{s}: {m}")).collect();
        errors.dedup();
        summaries.push(PointSummary {
            index: i,
            point: *p,
            residuals: o.residuals,
            errors,
        });
    }
    if let Some(res) = suites.get_mut(&Suite::Metric) {
        let sigs: Vec<String> = signatures.iter().map(|(p, q)| format!("({p},{q})")).collect();
        res.notes.insert("signatures".into(), sigs.join(" "));
    }
    if let (Some(res), Some((_, (a, b)))) = (suites.get_mut(&Suite::Vanishing), worst_b) {
        res.notes.insert("worst_b_slot".into(), format!("({a},{b})"));
    }

    let mut curvature = None;
    if let Some(res) = suites.get_mut(&Suite::Curvature) {
        match cross_validate_constant_curvature(&cfg.spec, &points, cfg.planes_per_point, cfg.sampler.seed) {
            Ok(cv) => {
                if !cv.consistent {
                    res.errors.push(format!(
                        "predicate {} but sectional curvature spread is {:e}",
                        cv.predicate, cv.spread
                    ));
                }
                if let Some(expected) = cfg.expect_constant_curvature {
                    if expected != cv.predicate {
                        res.errors
                            .push(format!("expected constant curvature {expected}, predicate {}", cv.predicate));
                    }
                }
                res.notes.insert("predicate".into(), cv.predicate.to_string());
                res.notes.insert("spread".into(), format!("{:.3e}", cv.spread));
                curvature = Some(cv);
            }
            Err(e) => res.errors.push(e.to_string()),
        }
    }

    for res in suites.values_mut() {
        res.finish();
    }
    let passed = suites.values().all(|s| s.passed);
    Ok(RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        calibration,
        suites: suites.into_iter().map(|(s, r)| (s.name().to_string(), r)).collect(),
        curvature,
        points: summaries,
        passed,
        wall_clock_seconds: None,
    })
}
