use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Point, DIM};

use super::spec::HSpaceSpec;
use super::{aux_functions, eigenvalue_functions, metric_at};

/// Rejection budget: total draws are capped at this many per requested point.
pub const MAX_ATTEMPTS_PER_POINT: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    /// Closed box [lo, hi] per coordinate.
    pub bounds: [(f64, f64); DIM],
    pub count: usize,
    pub seed: u64,
    /// Minimum separation δ for eigenvalue gaps, |A| and |det g|.
    pub margin: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            bounds: [(1.0, 2.0); DIM],
            count: 100,
            seed: 20_240_611,
            margin: 0.1,
        }
    }
}

impl SamplerConfig {
    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidArgument("point count must be positive".into()));
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "margin {} must be positive",
                self.margin
            )));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "bounds for x{} must satisfy lo < hi, got [{lo}, {hi}]",
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Tally of rejections, used to name the binding constraint on exhaustion.
#[derive(Default)]
struct Rejections {
    counts: BTreeMap<String, usize>,
}

impl Rejections {
    fn hit(&mut self, name: String) {
        *self.counts.entry(name).or_default() += 1;
    }

    fn tightest(&self) -> String {
        self.counts
            .iter()
            .max_by_key(|(_, &n)| n)
            .map(|(k, n)| format!("{k} (rejected {n} draws)"))
            .unwrap_or_else(|| "none".into())
    }
}

/// First violated admissibility constraint at `p`, if any.
fn violation(spec: &HSpaceSpec, p: &Point, margin: f64) -> Option<String> {
    let f = eigenvalue_functions(spec, p);
    let groups: Vec<usize> = spec.kind.layout().iter().map(|b| b.last()).collect();
    for (n, &a) in groups.iter().enumerate() {
        for &b in &groups[n + 1..] {
            if (f[a - 1].val - f[b - 1].val).abs() < margin {
                return Some(format!("|f{a} - f{b}| >= {margin}"));
            }
        }
    }
    for ((layout, _), a) in spec.jordan_blocks().zip(aux_functions(spec, p)) {
        if a.val.abs() < margin {
            return Some(format!("|A| >= {margin} on block at x{}", layout.start));
        }
    }
    match metric_at(spec, p) {
        Ok(m) if m.values().determinant().abs() >= margin => None,
        Ok(_) => Some(format!("|det g| >= {margin}")),
        Err(_) => Some("metric finite and invertible".into()),
    }
}

/// Deterministic rejection sampling of admissible points in the box.
pub fn sample_points(spec: &HSpaceSpec, cfg: &SamplerConfig) -> Result<Vec<Point>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let budget = cfg.count.saturating_mul(MAX_ATTEMPTS_PER_POINT);
    let mut out = Vec::with_capacity(cfg.count);
    let mut rejections = Rejections::default();
    for _ in 0..budget {
        let mut x = [0.0; DIM];
        for (xi, &(lo, hi)) in x.iter_mut().zip(&cfg.bounds) {
            *xi = rng.random_range(lo..=hi);
        }
        let p = Point::new(x)?;
        match violation(spec, &p, cfg.margin) {
            None => {
                out.push(p);
                if out.len() == cfg.count {
                    return Ok(out);
                }
            }
            Some(name) => rejections.hit(name),
        }
    }
    Err(Error::SamplingExhausted {
        accepted: out.len(),
        requested: cfg.count,
        tightest: rejections.tightest(),
    })
}
