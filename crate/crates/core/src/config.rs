//! JSON run configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical::{ShiftOrientation, SolveOptions};
use crate::error::{Error, Result};
use crate::jets::{ParamFn, DIM};
use crate::metrics::{validate_spec, HSpaceSpec, HSpaceType, Readings, SamplerConfig};
use crate::tensor::RIEMANN_SIGN;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Suite {
    Metric,
    Tensors,
    Eisenhart,
    Integrability,
    Vanishing,
    ProofIds,
    Curvature,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Metric,
        Suite::Tensors,
        Suite::Eisenhart,
        Suite::Integrability,
        Suite::Vanishing,
        Suite::ProofIds,
        Suite::Curvature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Metric => "metric",
            Suite::Tensors => "tensors",
            Suite::Eisenhart => "eisenhart",
            Suite::Integrability => "integrability",
            Suite::Vanishing => "vanishing",
            Suite::ProofIds => "proof_ids",
            Suite::Curvature => "curvature",
        }
    }

    /// Named checks of this suite with their default tolerances.
    pub fn checks(self) -> &'static [(&'static str, f64)] {
        match self {
            Suite::Metric => &[("metric.inverse", 1e-12), ("metric.fd", 1e-6)],
            Suite::Tensors => &[("tensors.compatibility", 1e-12), ("tensors.symmetries", 1e-10)],
            Suite::Eisenhart => &[("eisenhart", 1e-8)],
            Suite::Integrability => &[("integrability", 1e-7)],
            Suite::Vanishing => &[("vanishing", 1e-9)],
            Suite::ProofIds => &[("proof_ids", 1e-8)],
            // The curvature suite compares against fixed spread thresholds.
            Suite::Curvature => &[],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Default tolerance of a check. Sub-checks such as `vanishing.b` inherit
/// the tolerance of their parent key.
pub fn default_tolerance(check: &str) -> Option<f64> {
    let lookup = |key: &str| {
        Suite::ALL
            .iter()
            .flat_map(|s| s.checks().iter())
            .find(|(name, _)| *name == key)
            .map(|(_, t)| *t)
    };
    lookup(check).or_else(|| lookup(parent_key(check)))
}

fn parent_key(check: &str) -> &str {
    check.split_once('.').map_or(check, |(head, _)| head)
}

/// Override keys: a check name, or a suite name applying to all its checks.
fn valid_override_key(key: &str) -> bool {
    Suite::ALL
        .iter()
        .any(|s| s.name() == key || s.checks().iter().any(|(c, _)| *c == key))
}

/// Config file schema. Metric parameters sit at the top level next to run options.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    name: Option<String>,
    #[serde(rename = "type")]
    kind: HSpaceType,
    eps: u8,
    #[serde(default)]
    eps_tilde: Option<u8>,
    #[serde(default)]
    a: Option<f64>,
    #[serde(default)]
    signs: BTreeMap<usize, i64>,
    #[serde(default)]
    theta: Option<ParamFn>,
    #[serde(default)]
    omega: Option<ParamFn>,
    #[serde(default)]
    f: BTreeMap<usize, ParamFn>,
    #[serde(default)]
    relax_eps_constraint: bool,
    #[serde(default)]
    readings: Readings,
    #[serde(default)]
    sampler: SamplerConfig,
    #[serde(default = "one")]
    a1: f64,
    #[serde(default)]
    suites: Option<Vec<Suite>>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_sign")]
    riemann_sign: f64,
    #[serde(default)]
    orientation: ShiftOrientation,
    #[serde(default)]
    expected_signature: Option<(usize, usize)>,
    #[serde(default)]
    expect_constant_curvature: Option<bool>,
    #[serde(default = "default_planes")]
    planes_per_point: usize,
}

fn one() -> f64 {
    1.0
}

fn default_sign() -> f64 {
    RIEMANN_SIGN
}

fn default_planes() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub name: Option<String>,
    pub spec: HSpaceSpec,
    pub sampler: SamplerConfig,
    pub suites: Vec<Suite>,
    pub solve: SolveOptions,
    /// Overrides keyed by check or suite name (see [`Suite::checks`]).
    pub tolerances: BTreeMap<String, f64>,
    pub expected_signature: Option<(usize, usize)>,
    pub expect_constant_curvature: Option<bool>,
    pub planes_per_point: usize,
}

impl RunConfig {
    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances
            .get(check)
            .or_else(|| self.tolerances.get(parent_key(check)))
            .copied()
            .or_else(|| default_tolerance(check))
            .unwrap_or(0.0)
    }

    pub fn has(&self, suite: Suite) -> bool {
        self.suites.contains(&suite)
    }

    /// Replace the suite selection; an empty list is a config error.
    pub fn with_suites(mut self, suites: &[Suite]) -> Result<Self> {
        self.suites = normalize_suites(suites.to_vec())?;
        Ok(self)
    }
}

fn normalize_suites(suites: Vec<Suite>) -> Result<Vec<Suite>> {
    if suites.is_empty() {
        return Err(Error::schema("suites", "at least one suite must be selected"));
    }
    Ok(suites.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
}

impl TryFrom<RawConfig> for RunConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        let second = raw.kind.has_second_branch();
        let spec = HSpaceSpec {
            kind: raw.kind,
            eps: raw.eps,
            eps_tilde: raw.eps_tilde,
            a: raw.a.unwrap_or(0.0),
            signs: raw.signs,
            theta: raw.theta.unwrap_or(ParamFn::constant(0.0)),
            omega: match raw.omega {
                Some(om) => Some(om),
                None if second => Some(ParamFn::constant(0.0)),
                None => None,
            },
            f_simple: raw.f,
            relax_eps_constraint: raw.relax_eps_constraint,
            readings: raw.readings,
        };
        let spec = validate_spec(spec)?;

        let suites = normalize_suites(raw.suites.unwrap_or_else(|| Suite::ALL.to_vec()))?;
        for (check, &tol) in &raw.tolerances {
            if !valid_override_key(check) {
                return Err(Error::schema(format!("tolerances.{check}"), "unknown check name"));
            }
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::schema(format!("tolerances.{check}"), "tolerance must be positive"));
            }
        }
        if !(raw.a1.is_finite() && raw.a1 != 0.0) {
            return Err(Error::schema("a1", "must be finite and nonzero"));
        }
        if raw.riemann_sign != 1.0 && raw.riemann_sign != -1.0 {
            return Err(Error::schema("riemann_sign", "must be 1 or -1"));
        }
        if let Some((p, q)) = raw.expected_signature {
            if p + q != DIM {
                return Err(Error::schema("expected_signature", "counts must sum to 6"));
            }
        }
        if raw.planes_per_point == 0 {
            return Err(Error::schema("planes_per_point", "must be positive"));
        }
        Ok(RunConfig {
            name: raw.name,
            spec,
            sampler: raw.sampler,
            suites,
            solve: SolveOptions {
                a1: raw.a1,
                orientation: raw.orientation,
                riemann_sign: raw.riemann_sign,
            },
            tolerances: raw.tolerances,
            expected_signature: raw.expected_signature,
            expect_constant_curvature: raw.expect_constant_curvature,
            planes_per_point: raw.planes_per_point,
        })
    }
}

/// Parse a config document. Syntax errors carry line and column; schema
/// errors name the offending field path.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        if inner.is_syntax() || inner.is_eof() {
            Error::Parse {
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            }
        } else {
            let path = e.path().to_string();
            let field = if path == "." { "<root>".to_string() } else { path };
            Error::schema(field, inner.to_string())
        }
    })?;
    raw.try_into()
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL_T51: &str = r#"{
        "type": "T51", "eps": 1,
        "theta": {"kind": "polynomial", "coeffs": [1.0, 0.0, 0.5]},
        "f": {"6": {"kind": "polynomial", "coeffs": [3.0, 0.0, 1.0]}}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL_T51).unwrap();
        assert_eq!(cfg.sampler.margin, 0.1);
        assert_eq!(cfg.sampler.bounds, [(1.0, 2.0); 6]);
        assert_eq!(cfg.sampler.count, 100);
        assert_eq!(cfg.solve.a1, 1.0);
        assert_eq!(cfg.suites, Suite::ALL.to_vec());
        assert_eq!(cfg.tolerance("eisenhart"), 1e-8);
    }

    #[test]
    fn unknown_type_names_field() {
        let text = MINIMAL_T51.replace("\"T51\"", "\"T42\"");
        match parse_config(&text) {
            Err(Error::Schema { field, .. }) => assert_eq!(field, "type"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_offset_fails_validation() {
        let text = r#"{"type": "T2211", "eps": 1, "eps_tilde": 0,
            "f": {"5": {"kind": "constant", "value": 4}, "6": {"kind": "constant", "value": -3}}}"#;
        assert_eq!(parse_config(text).unwrap_err(), Error::ZeroOffset);
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_config("{\n  \"type\": \"T51\",\n  oops\n}") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_suite_list_rejected() {
        let text = MINIMAL_T51.replace("\"eps\": 1,", "\"eps\": 1, \"suites\": [],");
        assert!(matches!(parse_config(&text), Err(Error::Schema { field, .. }) if field == "suites"));
    }

    #[test]
    fn nested_field_path_reported() {
        let text = MINIMAL_T51.replace("\"eps\": 1,", "\"eps\": 1, \"sampler\": {\"count\": \"many\"},");
        assert!(matches!(parse_config(&text), Err(Error::Schema { field, .. }) if field == "sampler.count"));
    }

    #[test]
    fn suite_override_covers_its_checks() {
        let text = MINIMAL_T51.replace("\"eps\": 1,", "\"eps\": 1, \"tolerances\": {\"metric\": 1e-3, \"vanishing\": 1e-4},");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.tolerance("metric.fd"), 1e-3);
        assert_eq!(cfg.tolerance("vanishing.b"), 1e-4);
        assert_eq!(cfg.tolerance("tensors.symmetries"), 1e-10);
        assert_eq!(cfg.tolerance("vanishing.plain_partials"), 1e-4);
    }

    #[test]
    fn unknown_tolerance_rejected() {
        let text = MINIMAL_T51.replace("\"eps\": 1,", "\"eps\": 1, \"tolerances\": {\"nope\": 1e-3},");
        assert!(matches!(parse_config(&text), Err(Error::Schema { .. })));
    }
}
