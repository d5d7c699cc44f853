//! Choices the formulas leave open, settled by the residual oracles.
//!
//! Each outcome records the competing candidates and their residuals so a
//! regression shows up in every report.

use serde::{Deserialize, Serialize};

use crate::canonical::{eisenhart_residual, integrability_residual, PointEval, ShiftOrientation, SolveOptions};
use crate::error::{Error, Result};
use crate::jets::Point;
use crate::metrics::{HSpaceSpec, HSpaceType, Readings, SecondBlockA33, SixthFactor321, Tail411};

/// Residual below which a candidate counts as exact.
pub const EXACT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    /// Worst residual over the probe points; None when evaluation failed.
    pub residual: Option<f64>,
    pub error: Option<String>,
    pub selected: bool,
}

impl Candidate {
    pub fn exact(&self) -> bool {
        self.residual.is_some_and(|r| r <= EXACT)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub question: String,
    pub candidates: Vec<Candidate>,
    /// Exactly one candidate is exact and it is the selected one.
    pub decisive: bool,
}

impl Outcome {
    fn new(question: &str, candidates: Vec<Candidate>) -> Self {
        let exact: Vec<&Candidate> = candidates.iter().filter(|c| c.exact()).collect();
        let decisive = exact.len() == 1 && exact[0].selected;
        Self {
            question: question.into(),
            candidates,
            decisive,
        }
    }

    pub fn selected(&self) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.selected)
    }
}

fn worst<F>(points: &[Point], f: F) -> std::result::Result<f64, String>
where
    F: Fn(&Point) -> Result<f64>,
{
    points.iter().try_fold(0.0_f64, |acc, p| {
        f(p).map(|r| acc.max(r)).map_err(|e| e.to_string())
    })
}

fn candidate(name: String, selected: bool, res: std::result::Result<f64, String>) -> Candidate {
    let (residual, error) = match res {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e)),
    };
    Candidate {
        name,
        residual,
        error,
        selected,
    }
}

/// Integrability residual under both curvature signs.
pub fn riemann_sign(spec: &HSpaceSpec, points: &[Point], opts: &SolveOptions) -> Outcome {
    let cands = [opts.riemann_sign, -opts.riemann_sign]
        .into_iter()
        .map(|sign| {
            let o = SolveOptions {
                riemann_sign: sign,
                ..*opts
            };
            let res = worst(points, |p| Ok(integrability_residual(&PointEval::new(spec, p, &o)?)));
            candidate(format!("{sign:+}"), sign == opts.riemann_sign, res)
        })
        .collect();
    Outcome::new("riemann sign", cands)
}

/// Symmetry of g∘B under both shift orientations.
pub fn orientation(spec: &HSpaceSpec, points: &[Point], opts: &SolveOptions) -> Outcome {
    let cands = [ShiftOrientation::Upper, ShiftOrientation::Lower]
        .into_iter()
        .map(|o| {
            let so = SolveOptions { orientation: o, ..*opts };
            let res = worst(points, |p| match PointEval::new(spec, p, &so) {
                Ok(_) => Ok(0.0),
                Err(Error::Orientation { asymmetry }) => Ok(asymmetry),
                Err(e) => Err(e),
            });
            let name = match o {
                ShiftOrientation::Upper => "upper",
                ShiftOrientation::Lower => "lower",
            };
            candidate(name.into(), o == opts.orientation, res)
        })
        .collect();
    Outcome::new("nilpotent shift orientation", cands)
}

/// Candidate readings of the ambiguous line-element terms for this type.
pub fn reading_candidates(kind: HSpaceType) -> Vec<(String, Readings)> {
    let base = Readings::default();
    match kind {
        HSpaceType::T321 => [
            ("mixed_cube", SixthFactor321::MixedCube),
            ("repeated_factor", SixthFactor321::RepeatedFactor),
        ]
        .into_iter()
        .map(|(n, v)| {
            (
                n.to_string(),
                Readings {
                    t321_sixth_factor: v,
                    ..base
                },
            )
        })
        .collect(),
        HSpaceType::T33 => [("uses_x5", SecondBlockA33::UsesX5), ("uses_x4", SecondBlockA33::UsesX4)]
            .into_iter()
            .map(|(n, v)| {
                (
                    n.to_string(),
                    Readings {
                        t33_second_block_a: v,
                        ..base
                    },
                )
            })
            .collect(),
        HSpaceType::T411 => [
            ("second_symmetric", Tail411::SecondSymmetric),
            ("inside_block", Tail411::InsideBlock),
            ("outside_block", Tail411::OutsideBlock),
        ]
        .into_iter()
        .map(|(n, v)| (n.to_string(), Readings { t411_tail: v, ..base }))
        .collect(),
        HSpaceType::T2211 | HSpaceType::T51 => Vec::new(),
    }
}

fn reading_name(kind: HSpaceType, r: &Readings) -> Option<String> {
    reading_candidates(kind)
        .into_iter()
        .find(|(_, c)| match kind {
            HSpaceType::T321 => c.t321_sixth_factor == r.t321_sixth_factor,
            HSpaceType::T33 => c.t33_second_block_a == r.t33_second_block_a,
            HSpaceType::T411 => c.t411_tail == r.t411_tail,
            _ => false,
        })
        .map(|(n, _)| n)
}

/// Eisenhart residual of the canonical solution under each reading.
pub fn line_element_reading(spec: &HSpaceSpec, points: &[Point], opts: &SolveOptions) -> Option<Outcome> {
    let cands = reading_candidates(spec.kind);
    if cands.is_empty() {
        return None;
    }
    let selected = reading_name(spec.kind, &spec.readings);
    let cands = cands
        .into_iter()
        .map(|(name, readings)| {
            let s = HSpaceSpec {
                readings,
                ..spec.clone()
            };
            let res = worst(points, |p| Ok(eisenhart_residual(&PointEval::new(&s, p, opts)?)));
            let sel = selected.as_deref() == Some(name.as_str());
            candidate(name, sel, res)
        })
        .collect();
    Some(Outcome::new(&format!("{} line element reading", spec.kind), cands))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub riemann_sign: Outcome,
    pub orientation: Outcome,
    pub reading: Option<Outcome>,
}

pub fn calibrate(spec: &HSpaceSpec, points: &[Point], opts: &SolveOptions) -> CalibrationReport {
    CalibrationReport {
        riemann_sign: riemann_sign(spec, points, opts),
        orientation: orientation(spec, points, opts),
        reading: line_element_reading(spec, points, opts),
    }
}
