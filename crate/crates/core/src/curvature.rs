//! Curvature invariants built from the simple-root functions, the
//! constant-curvature predicates they feed, and a geometric cross-check
//! through measured sectional curvature.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Jet2, Point, DIM};
use crate::metrics::{eigenvalue_functions, metric_at, HSpaceSpec, HSpaceType, MetricField};
use crate::tensor::{christoffel, riemann, sectional_curvature, RIEMANN_SIGN};

/// Tolerance for the function-valued conditions of the predicate.
pub const PREDICATE_TOL: f64 = 1e-10;
/// Spread at or below which sectional curvature counts as constant.
pub const CONSTANT_SPREAD: f64 = 1e-8;
/// Spread at or above which sectional curvature counts as decisively varying.
pub const VARYING_SPREAD: f64 = 1e-3;
/// Minimum relative plane area accepted when drawing planes; stricter than
/// the hard limit in [`sectional_curvature`] to keep K well conditioned.
pub const ADMISSIBLE_PLANE_AREA: f64 = 1e-2;
/// Draws allowed per requested plane before giving up.
pub const PLANE_ATTEMPTS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub point: Point,
    /// ρ_p keyed by p.
    pub rho_p: BTreeMap<usize, f64>,
    /// ρ_pq keyed "p,q" with p < q.
    pub rho_pq: BTreeMap<String, f64>,
    /// ρ_σp keyed "σ,p".
    pub rho_sigma_p: BTreeMap<String, f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    /// f′_σ keyed by σ.
    pub f_prime: BTreeMap<usize, f64>,
    /// Constant-curvature conditions evaluated at this point.
    pub predicate: bool,
}

/// Block indices p and simple roots σ entering the ρ quantities.
fn rho_indices(kind: HSpaceType) -> (&'static [usize], &'static [usize]) {
    match kind {
        HSpaceType::T2211 => (&[2, 4], &[5, 6]),
        HSpaceType::T411 => (&[4], &[5, 6]),
        _ => (&[], &[]),
    }
}

struct Inputs {
    f: [Jet2; DIM],
    g: MetricField,
}

impl Inputs {
    fn f(&self, i: usize) -> f64 {
        self.f[i - 1].val
    }

    fn fp(&self, s: usize) -> f64 {
        self.f[s - 1].grad[s - 1]
    }

    fn fpp(&self, s: usize) -> f64 {
        self.f[s - 1].hess[s - 1][s - 1]
    }

    fn gss(&self, s: usize) -> f64 {
        self.g.g[s - 1][s - 1].val
    }

    /// −¼ Σ_σ (f′_σ)² / ((f_σ − f_p)(f_σ − f_q) g_σσ)
    fn rho(&self, roots: &[usize], p: usize, q: usize) -> f64 {
        -0.25
            * roots
                .iter()
                .map(|&s| self.fp(s).powi(2) / ((self.f(s) - self.f(p)) * (self.f(s) - self.f(q)) * self.gss(s)))
                .sum::<f64>()
    }

    /// −¼ Σ_σ (f′_σ)² / ((f_σ − f_4)^n g_σσ)
    fn gamma(&self, roots: &[usize], p: usize, n: i32) -> f64 {
        -0.25
            * roots
                .iter()
                .map(|&s| self.fp(s).powi(2) / ((self.f(s) - self.f(p)).powi(n) * self.gss(s)))
                .sum::<f64>()
    }

    /// ρ_σp with the f″ term multiplied through, so f′_σ = 0 is regular.
    fn rho_sigma(&self, roots: &[usize], s: usize, p: usize) -> f64 {
        let (fs, fp) = (self.f(s), self.f(p));
        let sum: f64 = (1..=DIM).filter(|&i| i != s).map(|i| 1.0 / (self.f(i) - fs)).sum();
        let bracket = 2.0 * self.fpp(s) + self.fp(s).powi(2) * (-1.0 / (fs - fp) + sum);
        let own = -0.25 * bracket / ((fs - fp) * self.gss(s));
        let others: f64 = roots
            .iter()
            .filter(|&&c| c != s)
            .map(|&c| self.fp(c).powi(2) / ((self.f(c) - fp) * (self.f(c) - fs) * self.gss(c)))
            .sum();
        own - 0.25 * others
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= PREDICATE_TOL * (1.0 + a.abs().max(b.abs()))
}

fn check_finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::pole(format!("{name} is not finite")))
    }
}

pub fn curvature_quantities(spec: &HSpaceSpec, p: &Point) -> Result<CurvatureReport> {
    let g = metric_at(spec, p)?;
    let inp = Inputs {
        f: eigenvalue_functions(spec, p),
        g,
    };
    let (ps, roots) = rho_indices(spec.kind);
    let mut rep = CurvatureReport {
        point: *p,
        rho_p: BTreeMap::new(),
        rho_pq: BTreeMap::new(),
        rho_sigma_p: BTreeMap::new(),
        gamma1: None,
        gamma2: None,
        f_prime: spec.kind.simple_roots().iter().map(|&s| (s, inp.fp(s))).collect(),
        predicate: false,
    };
    let at = |e: Error| e.at(p);
    for &q in ps {
        rep.rho_p.insert(q, check_finite("rho_p", inp.rho(roots, q, q)).map_err(at)?);
        for &s in roots {
            let v = check_finite("rho_sigma_p", inp.rho_sigma(roots, s, q)).map_err(at)?;
            rep.rho_sigma_p.insert(format!("{s},{q}"), v);
        }
    }
    for (n, &a) in ps.iter().enumerate() {
        for &b in &ps[n + 1..] {
            let v = check_finite("rho_pq", inp.rho(roots, a, b)).map_err(at)?;
            rep.rho_pq.insert(format!("{a},{b}"), v);
        }
    }
    if spec.kind == HSpaceType::T411 {
        rep.gamma1 = Some(check_finite("gamma1", inp.gamma(roots, 4, 3)).map_err(at)?);
        rep.gamma2 = Some(check_finite("gamma2", inp.gamma(roots, 4, 4)).map_err(at)?);
    }
    rep.predicate = point_predicate(spec, &rep);
    Ok(rep)
}

fn point_predicate(spec: &HSpaceSpec, rep: &CurvatureReport) -> bool {
    let eps_zero = spec.eps == 0;
    let epst_zero = spec.eps_tilde.unwrap_or(0) == 0;
    let rho_conditions = || {
        rep.rho_sigma_p.iter().all(|(key, &v)| {
            let p: usize = key.rsplit(',').next().and_then(|s| s.parse().ok()).unwrap_or(0);
            close(rep.rho_p[&p], v)
        }) && rep.rho_pq.iter().all(|(key, &v)| {
            let p: usize = key.split(',').next().and_then(|s| s.parse().ok()).unwrap_or(0);
            close(rep.rho_p[&p], v)
        })
    };
    let f6_flat = || rep.f_prime.get(&6).is_some_and(|v| v.abs() <= PREDICATE_TOL);
    match spec.kind {
        HSpaceType::T2211 => eps_zero && epst_zero && rho_conditions(),
        HSpaceType::T321 => eps_zero && epst_zero && f6_flat(),
        HSpaceType::T33 => eps_zero && epst_zero,
        HSpaceType::T411 => {
            eps_zero
                && rho_conditions()
                && rep.gamma1.is_some_and(|v| v.abs() <= PREDICATE_TOL)
                && rep.gamma2.is_some_and(|v| v.abs() <= PREDICATE_TOL)
        }
        HSpaceType::T51 => eps_zero && f6_flat(),
    }
}

/// True when the constant-curvature conditions hold at every sample.
pub fn constant_curvature_predicate(spec: &HSpaceSpec, samples: &[Point]) -> Result<bool> {
    for p in samples {
        if !curvature_quantities(spec, p)?.predicate {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub predicate: bool,
    pub k_min: f64,
    pub k_max: f64,
    pub spread: f64,
    pub planes: usize,
    /// Draws discarded as near-degenerate planes.
    pub resampled: usize,
    /// Predicate agrees with the measured spread.
    pub consistent: bool,
}

fn random_direction(rng: &mut ChaCha8Rng) -> [f64; DIM] {
    let mut v = [0.0; DIM];
    for c in &mut v {
        *c = rng.random_range(-1.0..=1.0);
    }
    v
}

fn plane_area_ratio(m: &MetricField, u: &[f64; DIM], v: &[f64; DIM]) -> f64 {
    let g = m.values();
    let form = |a: &[f64; DIM], b: &[f64; DIM]| {
        let mut s = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                s += g[(i, j)] * a[i] * b[j];
            }
        }
        s
    };
    let (uu, vv, uv) = (form(u, u), form(v, v), form(u, v));
    (uu * vv - uv * uv).abs() / ((uu * vv).abs() + uv * uv).max(f64::MIN_POSITIVE)
}

/// Sectional curvatures at one point on `planes` admissible random planes.
fn sectional_sample(spec: &HSpaceSpec, p: &Point, planes: usize, seed: u64) -> Result<(Vec<f64>, usize)> {
    let m = metric_at(spec, p)?;
    let c = christoffel(&m);
    let r = riemann(&c, &m, RIEMANN_SIGN);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ks = Vec::with_capacity(planes);
    let mut resampled = 0;
    while ks.len() < planes {
        if resampled > PLANE_ATTEMPTS * planes {
            return Err(Error::DegeneratePlane { area: 0.0 });
        }
        let (u, v) = (random_direction(&mut rng), random_direction(&mut rng));
        if plane_area_ratio(&m, &u, &v) < ADMISSIBLE_PLANE_AREA {
            resampled += 1;
            continue;
        }
        ks.push(sectional_curvature(&r, &m, &u, &v)?);
    }
    Ok((ks, resampled))
}

/// Compare the predicate against the spread of measured sectional curvature
/// over `planes_per_point` random planes at every sample.
pub fn cross_validate_constant_curvature(
    spec: &HSpaceSpec,
    samples: &[Point],
    planes_per_point: usize,
    seed: u64,
) -> Result<CrossValidation> {
    if samples.is_empty() || planes_per_point == 0 {
        return Err(Error::InvalidArgument(
            "cross-validation needs at least one sample and one plane".into(),
        ));
    }
    let predicate = constant_curvature_predicate(spec, samples)?;
    let per_point: Vec<(Vec<f64>, usize)> = samples
        .par_iter()
        .enumerate()
        .map(|(n, p)| sectional_sample(spec, p, planes_per_point, seed.wrapping_add(n as u64)))
        .collect::<Result<_>>()?;
    let ks: Vec<f64> = per_point.iter().flat_map(|(k, _)| k.iter().copied()).collect();
    let resampled = per_point.iter().map(|(_, r)| r).sum();
    let k_min = ks.iter().copied().fold(f64::INFINITY, f64::min);
    let k_max = ks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = k_max - k_min;
    let consistent = if predicate {
        spread <= CONSTANT_SPREAD
    } else {
        spread >= VARYING_SPREAD
    };
    Ok(CrossValidation {
        predicate,
        k_min,
        k_max,
        spread,
        planes: ks.len(),
        resampled,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::ParamFn;

    fn t2211(f5: ParamFn, f6: ParamFn) -> HSpaceSpec {
        let mut s = HSpaceSpec::new(HSpaceType::T2211, 1);
        s.a = 2.0;
        s.theta = ParamFn::constant(1.0);
        s.omega = Some(ParamFn::constant(1.0));
        s.f_simple.insert(5, f5);
        s.f_simple.insert(6, f6);
        s
    }

    fn pt(x: [f64; 6]) -> Point {
        Point::new(x).unwrap()
    }

    #[test]
    fn constant_roots_give_zero_quantities() {
        let s = t2211(ParamFn::constant(4.0), ParamFn::constant(-3.0));
        let rep = curvature_quantities(&s, &pt([1.2, 1.4, 1.1, 1.7, 1.3, 1.6])).unwrap();
        assert!(rep.rho_p.values().chain(rep.rho_pq.values()).chain(rep.rho_sigma_p.values()).all(|v| *v == 0.0));
    }

    #[test]
    fn rho_2_matches_hand_evaluation() {
        let s = t2211(ParamFn::polynomial([0.0, 1.0]), ParamFn::polynomial([0.0, 3.0]));
        let p = pt([1.0, 0.5, 1.0, 1.0, 1.0, 1.0]);
        let rep = curvature_quantities(&s, &p).unwrap();
        let m = metric_at(&s, &p).unwrap();
        let (f2, f5, f6) = (0.5, 1.0, 3.0);
        let expect =
            -0.25 * (1.0 / ((f5 - f2) * (f5 - f2) * m.g[4][4].val) + 9.0 / ((f6 - f2) * (f6 - f2) * m.g[5][5].val));
        assert!((rep.rho_p[&2] - expect).abs() <= 1e-12 * expect.abs());
    }

    #[test]
    fn rho_pq_is_symmetric() {
        let s = t2211(ParamFn::polynomial([0.0, 1.0]), ParamFn::polynomial([0.0, 3.0]));
        let p = pt([1.0, 0.5, 1.0, 1.0, 1.0, 1.0]);
        let inp = Inputs {
            f: eigenvalue_functions(&s, &p),
            g: metric_at(&s, &p).unwrap(),
        };
        assert_eq!(inp.rho(&[5, 6], 2, 4), inp.rho(&[5, 6], 4, 2));
    }

    #[test]
    fn t411_gamma_collapses_to_varying_root() {
        let mut s = HSpaceSpec::new(HSpaceType::T411, 1);
        s.theta = ParamFn::constant(1.0);
        s.f_simple.insert(5, ParamFn::constant(3.0));
        s.f_simple.insert(6, ParamFn::polynomial([-1.0, -1.0]));
        let p = pt([1.2, 1.4, 1.1, 1.7, 1.3, 1.6]);
        let rep = curvature_quantities(&s, &p).unwrap();
        let m = metric_at(&s, &p).unwrap();
        let (f4, f6): (f64, f64) = (1.7, -1.0 - 1.6);
        let expect = -0.25 / ((f6 - f4).powi(3) * m.g[5][5].val);
        assert!((rep.gamma1.unwrap() - expect).abs() <= 1e-12 * expect.abs());
    }

    #[test]
    fn predicates_follow_eps() {
        let mut t51 = HSpaceSpec::new(HSpaceType::T51, 1);
        t51.theta = ParamFn::constant(1.0);
        t51.f_simple.insert(6, ParamFn::constant(2.0));
        let p = pt([1.2, 1.4, 1.1, 1.7, 1.3, 1.6]);
        assert!(!constant_curvature_predicate(&t51, &[p]).unwrap());
        t51.eps = 0;
        assert!(constant_curvature_predicate(&t51, &[p]).unwrap());

        let mut t33 = HSpaceSpec::new(HSpaceType::T33, 0);
        t33.relax_eps_constraint = true;
        t33.a = 2.0;
        t33.theta = ParamFn::constant(1.0);
        t33.omega = Some(ParamFn::constant(1.0));
        assert!(constant_curvature_predicate(&t33, &[p]).unwrap());
    }

    #[test]
    fn empty_samples_rejected() {
        let s = t2211(ParamFn::constant(4.0), ParamFn::constant(-3.0));
        assert!(cross_validate_constant_curvature(&s, &[], 3, 0).is_err());
    }
}
