//! The canonical projective-motion pair (b, φ) and the checks it must pass.
//!
//! b = a₁·g(B + tr B·I) with B the Jordan operator whose eigenvalues are the
//! f_i; φ = a₁·½Σf_i. Then b_ij,k = 2g_ij φ_,k + g_ik φ_,j + g_jk φ_,i holds
//! exactly, which the residual functions below confirm numerically.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{seed_all, Jet2, Point, DIM};
use crate::metrics::{
    self, block_aux, eigenvalue_functions, metric_at, EigenRole, HSpaceSpec, HSpaceType, JetMatrix, MetricField,
};
use crate::tensor::{
    christoffel, covariant_derivative_2tensor, covariant_hessian_scalar, relative, riemann, Christoffel, Riemann,
    RIEMANN_SIGN,
};

/// Relative asymmetry of g∘B above which the shift orientation is rejected.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Direction of the nilpotent part inside each Jordan block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftOrientation {
    /// Entries above the diagonal in block coordinates.
    #[default]
    Upper,
    /// The within-block transpose.
    Lower,
}

/// B = f·I + N on each block, f_σ on simple roots. On a block of size n with
/// coordinates y¹..yⁿ and auxiliary function A, N has unit entries on the
/// first n−2 superdiagonal slots, k·ε·y^k in row k of the last column and an
/// extra (n−1)·A in row n−1 of the last column.
pub fn jordan_operator(spec: &HSpaceSpec, p: &Point, orientation: ShiftOrientation) -> JetMatrix {
    let x = seed_all(p);
    let f = eigenvalue_functions(spec, p);
    let mut b = [[Jet2::zero(); DIM]; DIM];
    for (i, row) in b.iter_mut().enumerate() {
        row[i] = f[i];
    }
    for layout in spec.kind.layout() {
        let EigenRole::Block { branch } = layout.role else {
            continue;
        };
        let (s, n) = (layout.start - 1, layout.size);
        let eps = spec.branch_eps(branch);
        let a = block_aux(spec, layout, branch, &x);
        let mut put = |r: usize, c: usize, v: Jet2| match orientation {
            ShiftOrientation::Upper => b[s + r][s + c] += v,
            ShiftOrientation::Lower => b[s + c][s + r] += v,
        };
        for k in 1..n.saturating_sub(1) {
            put(k - 1, k, Jet2::constant(1.0));
            put(k - 1, n - 1, x[s + k - 1] * (k as f64 * eps));
        }
        put(n - 2, n - 1, a * (n - 1) as f64);
    }
    b
}

fn trace(m: &JetMatrix) -> Jet2 {
    (0..DIM).map(|i| m[i][i]).sum()
}

/// φ = a₁·½Σf_i.
pub fn defining_function(spec: &HSpaceSpec, a1: f64, p: &Point) -> Jet2 {
    eigenvalue_functions(spec, p).into_iter().sum::<Jet2>() * (0.5 * a1)
}

/// b = a₁·g(B + tr B·I). Fails with [`Error::Orientation`] when g∘B is not
/// symmetric, which signals the wrong shift orientation.
pub fn canonical_b(m: &MetricField, op: &JetMatrix, a1: f64) -> Result<JetMatrix> {
    let gb = metrics::jet_matmul(&m.g, op);
    let scale = metrics::max_abs(&gb);
    let mut asym: f64 = 0.0;
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            asym = asym.max(gb[i][j].max_abs_diff(&gb[j][i]));
        }
    }
    let asymmetry = relative(asym, scale);
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::Orientation { asymmetry });
    }
    let tr = trace(op);
    let mut b = [[Jet2::zero(); DIM]; DIM];
    for i in 0..DIM {
        for j in i..DIM {
            let v = ((gb[i][j] + gb[j][i]) * 0.5 + m.g[i][j] * tr) * a1;
            b[i][j] = v;
            b[j][i] = v;
        }
    }
    Ok(b)
}

#[derive(Clone, Debug)]
pub struct CanonicalSolution {
    pub b: JetMatrix,
    pub phi: Jet2,
    pub a1: f64,
}

/// Knobs fixed by calibration; defaults are the frozen outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub a1: f64,
    pub orientation: ShiftOrientation,
    pub riemann_sign: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            a1: 1.0,
            orientation: ShiftOrientation::Upper,
            riemann_sign: RIEMANN_SIGN,
        }
    }
}

/// Everything computed at one point.
#[derive(Clone, Debug)]
pub struct PointEval {
    pub metric: MetricField,
    pub christoffel: Christoffel,
    pub riemann: Riemann,
    pub solution: CanonicalSolution,
}

impl PointEval {
    pub fn new(spec: &HSpaceSpec, p: &Point, opts: &SolveOptions) -> Result<Self> {
        let metric = metric_at(spec, p)?;
        let chris = christoffel(&metric);
        let riem = riemann(&chris, &metric, opts.riemann_sign);
        let op = jordan_operator(spec, p, opts.orientation);
        let b = canonical_b(&metric, &op, opts.a1)?;
        let phi = defining_function(spec, opts.a1, p);
        Ok(Self {
            metric,
            christoffel: chris,
            riemann: riem,
            solution: CanonicalSolution { b, phi, a1: opts.a1 },
        })
    }
}

/// Relative residual of b_ij,k = 2g_ij φ_,k + g_ik φ_,j + g_jk φ_,i.
///
/// Normalized by the largest individual term, counting ∂_k b_ij and the
/// connection terms of b_ij,k separately.
pub fn eisenhart_residual(ev: &PointEval) -> f64 {
    let (g, b, phi) = (&ev.metric.g, &ev.solution.b, &ev.solution.phi);
    let cov = covariant_derivative_2tensor(b, &ev.christoffel);
    let dphi = phi.grad;
    let mut worst: f64 = 0.0;
    let mut scale = cov.term_scale;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                let t2 = 2.0 * g[i][j].val * dphi[k];
                let t3 = g[i][k].val * dphi[j];
                let t4 = g[j][k].val * dphi[i];
                let lhs = cov.value[i][j][k];
                worst = worst.max((lhs - t2 - t3 - t4).abs());
                scale = scale.max(lhs.abs()).max(t2.abs()).max(t3.abs()).max(t4.abs());
            }
        }
    }
    relative(worst, scale)
}

/// Relative residual of
/// b_mi R^m_jkl + b_mj R^m_ikl = g_ik φ_,jl + g_jk φ_,il − g_li φ_,jk − g_lj φ_,ik,
/// normalized by the largest of the six terms over all index tuples.
pub fn integrability_residual(ev: &PointEval) -> f64 {
    let (g, b) = (&ev.metric.g, &ev.solution.b);
    let r = &ev.riemann.up;
    let h = covariant_hessian_scalar(&ev.solution.phi, &ev.christoffel);
    let mut scale: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    let mut lhs1 = 0.0;
                    let mut lhs2 = 0.0;
                    for m in 0..DIM {
                        lhs1 += b[m][i].val * r[m][j][k][l];
                        lhs2 += b[m][j].val * r[m][i][k][l];
                    }
                    let rhs = [
                        g[i][k].val * h.value[j][l],
                        g[j][k].val * h.value[i][l],
                        -g[l][i].val * h.value[j][k],
                        -g[l][j].val * h.value[i][k],
                    ];
                    let res = lhs1 + lhs2 - rhs.iter().sum::<f64>();
                    worst = worst.max(res.abs());
                    scale = rhs
                        .iter()
                        .fold(scale.max(lhs1.abs()).max(lhs2.abs()), |s, t| s.max(t.abs()));
                }
            }
        }
    }
    relative(worst, scale)
}

/// Coordinate pairs (1-based) with ∂_αβ φ = 0 stated for each type.
pub fn plain_partial_pairs(kind: HSpaceType) -> &'static [(usize, usize)] {
    match kind {
        HSpaceType::T2211 => &[(5, 6), (2, 5), (2, 6), (4, 5), (4, 6)],
        HSpaceType::T321 => &[(3, 6), (3, 5)],
        HSpaceType::T33 => &[(3, 6), (3, 3), (6, 6)],
        HSpaceType::T411 => &[(5, 6), (4, 5), (4, 6)],
        HSpaceType::T51 => &[(5, 6)],
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    /// max |b_αβ| over the zero pattern, relative to max |b|.
    pub b: f64,
    /// 1-based slot attaining `b`.
    pub worst_b_slot: Option<(usize, usize)>,
    /// max |φ_,αβ| (covariant) over the zero pattern, relative to its terms.
    pub covariant_hessian: f64,
    /// max |∂_αβ φ| over [`plain_partial_pairs`], relative to max |∂∂φ| and |φ_,αβ| terms.
    pub plain_partials: f64,
}

impl VanishingReport {
    pub fn max(&self) -> f64 {
        self.b.max(self.covariant_hessian).max(self.plain_partials)
    }
}

pub fn vanishing_checks(spec: &HSpaceSpec, ev: &PointEval) -> VanishingReport {
    let b = &ev.solution.b;
    let phi = &ev.solution.phi;
    let h = covariant_hessian_scalar(phi, &ev.christoffel);
    let bmax = b.iter().flatten().fold(0.0_f64, |m, j| m.max(j.val.abs()));
    let mut rep = VanishingReport::default();
    for (a, c) in spec.kind.zero_pattern() {
        let (a, c) = (a - 1, c - 1);
        let rb = relative(b[a][c].val.abs(), bmax);
        if rb > rep.b {
            rep.b = rb;
            rep.worst_b_slot = Some((a + 1, c + 1));
        }
        rep.covariant_hessian = rep
            .covariant_hessian
            .max(relative(h.value[a][c].abs(), h.term_scale));
    }
    let hmax = phi.hess.iter().flatten().fold(h.term_scale, |m, v| m.max(v.abs()));
    for &(a, c) in plain_partial_pairs(spec.kind) {
        rep.plain_partials = rep
            .plain_partials
            .max(relative(phi.hess[a - 1][c - 1].abs(), hmax));
    }
    rep
}

/// Values the proof identities are written in.
struct IdentityInputs<'a> {
    phi: &'a Jet2,
    b: &'a JetMatrix,
    g: &'a JetMatrix,
    f: [Jet2; DIM],
    eps: f64,
    epst: f64,
    a1: f64,
}

impl IdentityInputs<'_> {
    /// φ_,i (1-based)
    fn d(&self, i: usize) -> f64 {
        self.phi.grad[i - 1]
    }

    /// ∂_i φ_,i
    fn dd(&self, i: usize) -> f64 {
        self.phi.hess[i - 1][i - 1]
    }

    fn f(&self, i: usize) -> f64 {
        self.f[i - 1].val
    }

    /// f′_σ for a simple root.
    fn fp(&self, s: usize) -> f64 {
        self.f[s - 1].grad[s - 1]
    }

    fn fpp(&self, s: usize) -> f64 {
        self.f[s - 1].hess[s - 1][s - 1]
    }

    /// b_ij / g_ij
    fn ratio(&self, i: usize, j: usize) -> f64 {
        self.b[i - 1][j - 1].val / self.g[i - 1][j - 1].val
    }

    /// ∂_τ b_ττ / g_ττ
    fn log_slope(&self, t: usize) -> f64 {
        self.b[t - 1][t - 1].grad[t - 1] / self.g[t - 1][t - 1].val
    }

    /// −f′_τ Σ_{i≠τ}(f_i − f_τ)⁻¹ b_ττ/g_ττ + 4φ_,τ
    fn log_slope_rhs(&self, t: usize) -> f64 {
        let sum: f64 = (1..=DIM)
            .filter(|&i| i != t)
            .map(|i| 1.0 / (self.f(i) - self.f(t)))
            .sum();
        -self.fp(t) * sum * self.ratio(t, t) + 4.0 * self.d(t)
    }
}

struct Identities(Vec<(String, f64, f64)>);

impl Identities {
    fn push(&mut self, label: impl Into<String>, lhs: f64, rhs: f64) {
        self.0.push((label.into(), lhs, rhs));
    }

    fn zeros(&mut self, kind: HSpaceType, ids: &IdentityInputs, idx: &[usize]) {
        for &i in idx {
            self.push(format!("{kind} phi_{i} = 0"), ids.d(i), 0.0);
        }
    }

    /// The relations every simple root τ shares with a block whose
    /// representative entry is (r, c): gradient along x^τ, slope of b_ττ
    /// and the second-derivative relation.
    fn simple_root(&mut self, kind: HSpaceType, ids: &IdentityInputs, t: usize, block: (usize, usize)) {
        let (r, c) = block;
        let diff = ids.ratio(t, t) - ids.ratio(r, c);
        self.push(
            format!("{kind} phi_{t} from g_{t}{t} and g_{r}{c}"),
            ids.d(t),
            0.5 * ids.fp(t) / (ids.f(t) - ids.f(c)) * diff,
        );
        self.push(
            format!("{kind} d_{t} b_{t}{t} / g_{t}{t}"),
            ids.log_slope(t),
            ids.log_slope_rhs(t),
        );
        self.push(
            format!("{kind} f'_{t} d_{t} phi_{t} = f''_{t} phi_{t}"),
            ids.fp(t) * ids.dd(t),
            ids.fpp(t) * ids.d(t),
        );
    }

    /// φ_,σ = f′_σ P_στ for two simple roots.
    fn root_pair(&mut self, kind: HSpaceType, ids: &IdentityInputs, s: usize, t: usize) {
        let p = 0.5 * (ids.ratio(t, t) - ids.ratio(s, s)) / (ids.f(t) - ids.f(s));
        self.push(format!("{kind} phi_{s} = f'_{s} P_{s}{t}"), ids.d(s), ids.fp(s) * p);
    }
}

/// Relations between first derivatives of φ and ratios b_ij/g_ij that any
/// projective motion of these spaces satisfies. Residuals are
/// |lhs − rhs| / (1 + max(|lhs|, |rhs|)).
pub fn proof_relation_checks(spec: &HSpaceSpec, ev: &PointEval) -> BTreeMap<String, f64> {
    let kind = spec.kind;
    let ids = IdentityInputs {
        phi: &ev.solution.phi,
        b: &ev.solution.b,
        g: &ev.metric.g,
        f: eigenvalue_functions(spec, &ev.metric.point),
        eps: spec.eps_value(),
        epst: spec.eps_tilde_value(),
        a1: ev.solution.a1,
    };
    let (eps, epst, a1) = (ids.eps, ids.epst, ids.a1);
    let mut out = Identities(Vec::new());
    match kind {
        HSpaceType::T2211 => {
            out.zeros(kind, &ids, &[1, 3]);
            out.root_pair(kind, &ids, 5, 6);
            out.root_pair(kind, &ids, 6, 5);
            for t in [5, 6] {
                out.simple_root(kind, &ids, t, (1, 2));
                let diff = ids.ratio(t, t) - ids.ratio(1, 2);
                out.push(
                    format!("{kind} phi_2 from g_{t}{t} and g_12"),
                    ids.d(2),
                    eps / (ids.f(t) - ids.f(2)) * diff,
                );
                out.push(format!("{kind} 2 eps phi_{t} = f'_{t} phi_2"), 2.0 * eps * ids.d(t), ids.fp(t) * ids.d(2));
                out.push(
                    format!("{kind} 2 eps~ phi_{t} = f'_{t} phi_4"),
                    2.0 * epst * ids.d(t),
                    ids.fp(t) * ids.d(4),
                );
                out.push(format!("{kind} phi_{t} = a1 f'_{t} / 2"), ids.d(t), 0.5 * a1 * ids.fp(t));
            }
            let diff = (ids.ratio(3, 4) - ids.ratio(1, 2)) / (ids.f(4) - ids.f(2));
            out.push(format!("{kind} phi_2 from g_34 and g_12"), ids.d(2), eps * diff);
            out.push(format!("{kind} phi_4 from g_34 and g_12"), ids.d(4), epst * diff);
            out.push(format!("{kind} eps phi_4 = eps~ phi_2"), eps * ids.d(4), epst * ids.d(2));
            out.push(format!("{kind} phi_2 = a1 eps"), ids.d(2), a1 * eps);
            out.push(format!("{kind} phi_4 = a1 eps~"), ids.d(4), a1 * epst);
        }
        HSpaceType::T321 => {
            out.zeros(kind, &ids, &[1, 2, 4]);
            out.simple_root(kind, &ids, 6, (1, 3));
            let d13 = (ids.ratio(6, 6) - ids.ratio(1, 3)) / (ids.f(6) - ids.f(3));
            out.push(format!("{kind} phi_3 from g_66 and g_13"), ids.d(3), 1.5 * eps * d13);
            out.push(format!("{kind} 3 eps phi_6 = f'_6 phi_3"), 3.0 * eps * ids.d(6), ids.fp(6) * ids.d(3));
            let d45 = (ids.ratio(6, 6) - ids.ratio(4, 5)) / (ids.f(6) - ids.f(5));
            out.push(format!("{kind} phi_6 from g_66 and g_45"), ids.d(6), 0.5 * ids.fp(6) * d45);
            out.push(format!("{kind} phi_5 from g_66 and g_45"), ids.d(5), epst * d45);
            out.push(format!("{kind} 2 eps~ phi_6 = f'_6 phi_5"), 2.0 * epst * ids.d(6), ids.fp(6) * ids.d(5));
            let d = (ids.ratio(4, 5) - ids.ratio(1, 3)) / (ids.f(5) - ids.f(3));
            out.push(format!("{kind} phi_3 from g_45 and g_13"), ids.d(3), 1.5 * eps * d);
            out.push(format!("{kind} phi_5 from g_45 and g_13"), ids.d(5), epst * d);
            out.push(format!("{kind} 3 eps phi_5 = 2 eps~ phi_3"), 3.0 * eps * ids.d(5), 2.0 * epst * ids.d(3));
        }
        HSpaceType::T33 => {
            out.zeros(kind, &ids, &[1, 2, 4, 5]);
            let d = (ids.ratio(4, 6) - ids.ratio(1, 3)) / (ids.f(6) - ids.f(3));
            out.push(format!("{kind} phi_3 from g_46 and g_13"), ids.d(3), 1.5 * eps * d);
            out.push(format!("{kind} phi_6 from g_46 and g_13"), ids.d(6), 1.5 * epst * d);
            out.push(format!("{kind} eps~ phi_3 = eps phi_6"), epst * ids.d(3), eps * ids.d(6));
        }
        HSpaceType::T411 => {
            out.zeros(kind, &ids, &[1, 2, 3]);
            out.root_pair(kind, &ids, 5, 6);
            out.root_pair(kind, &ids, 6, 5);
            for t in [5, 6] {
                out.simple_root(kind, &ids, t, (1, 4));
                let diff = (ids.ratio(t, t) - ids.ratio(1, 4)) / (ids.f(t) - ids.f(4));
                out.push(format!("{kind} phi_4 from g_{t}{t} and g_14"), ids.d(4), 2.0 * eps * diff);
                out.push(format!("{kind} 4 eps phi_{t} = f'_{t} phi_4"), 4.0 * eps * ids.d(t), ids.fp(t) * ids.d(4));
            }
        }
        HSpaceType::T51 => {
            out.zeros(kind, &ids, &[1, 2, 3, 4]);
            out.simple_root(kind, &ids, 6, (1, 5));
            let d = (ids.ratio(6, 6) - ids.ratio(1, 5)) / (ids.f(6) - ids.f(5));
            out.push(format!("{kind} phi_5 from g_66 and g_15"), ids.d(5), 2.5 * eps * d);
            out.push(format!("{kind} 5 eps phi_6 = f'_6 phi_5"), 5.0 * eps * ids.d(6), ids.fp(6) * ids.d(5));
        }
    }
    out.0
        .into_iter()
        .map(|(label, lhs, rhs)| {
            let res = (lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs()));
            (label, res)
        })
        .collect()
}

/// One scalar slot of (b, φ) to perturb.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// b_ij value (and b_ji), 0-based.
    BValue(usize, usize),
    /// ∂_k b_ij (and b_ji), 0-based.
    BGrad(usize, usize, usize),
    /// ∂_k φ, 0-based.
    PhiGrad(usize),
}

impl CanonicalSolution {
    /// Copy with `delta` added to one slot, keeping b symmetric.
    pub fn perturbed(&self, slot: Slot, delta: f64) -> Self {
        let mut out = self.clone();
        match slot {
            Slot::BValue(i, j) => {
                out.b[i][j].val += delta;
                if i != j {
                    out.b[j][i].val += delta;
                }
            }
            Slot::BGrad(i, j, k) => {
                out.b[i][j].grad[k] += delta;
                if i != j {
                    out.b[j][i].grad[k] += delta;
                }
            }
            Slot::PhiGrad(k) => out.phi.grad[k] += delta,
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub point: Point,
    pub eisenhart_max: f64,
    pub integrability_max: f64,
    pub vanishing_max: f64,
    pub proof_ids_max: BTreeMap<String, f64>,
}

pub fn residual_report(spec: &HSpaceSpec, ev: &PointEval) -> ResidualReport {
    ResidualReport {
        point: ev.metric.point,
        eisenhart_max: eisenhart_residual(ev),
        integrability_max: integrability_residual(ev),
        vanishing_max: vanishing_checks(spec, ev).max(),
        proof_ids_max: proof_relation_checks(spec, ev),
    }
}
