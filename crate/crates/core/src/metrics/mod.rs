//! Canonical metrics of the five Segre types, their inverses and sampling.

mod forms;
mod sampler;
mod spec;

use nalgebra::{Matrix6, SymmetricEigen};

use crate::error::{Error, Result};
use crate::jets::{seed_all, Jet2, Point, DIM};

pub use forms::block_aux;
pub use sampler::{sample_points, SamplerConfig, MAX_ATTEMPTS_PER_POINT};
pub use spec::{
    validate_spec, BlockLayout, Branch, EigenRole, HSpaceSpec, HSpaceType, Readings, SecondBlockA33,
    SixthFactor321, Tail411,
};

pub type JetMatrix = [[Jet2; DIM]; DIM];

/// Largest condition number accepted by [`invert_jet_matrix`].
pub const MAX_CONDITION: f64 = 1e12;

/// Relative tolerance (against the largest |eigenvalue|) below which an
/// eigenvalue of g counts as zero.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// g and g⁻¹ at one point, both as jets.
#[derive(Clone, Debug)]
pub struct MetricField {
    pub point: Point,
    pub g: JetMatrix,
    pub g_inv: JetMatrix,
}

impl MetricField {
    pub fn values(&self) -> Matrix6<f64> {
        values(&self.g)
    }
}

pub fn values(m: &JetMatrix) -> Matrix6<f64> {
    Matrix6::from_fn(|i, j| m[i][j].val)
}

/// ∂_k of every entry, 0-based k.
pub fn partial(m: &JetMatrix, k: usize) -> Matrix6<f64> {
    Matrix6::from_fn(|i, j| m[i][j].grad[k])
}

pub fn second_partial(m: &JetMatrix, k: usize, l: usize) -> Matrix6<f64> {
    Matrix6::from_fn(|i, j| m[i][j].hess[k][l])
}

pub fn max_abs(m: &JetMatrix) -> f64 {
    m.iter().flatten().map(Jet2::max_abs).fold(0.0, f64::max)
}

/// Entrywise product of two jet matrices.
pub fn jet_matmul(a: &JetMatrix, b: &JetMatrix) -> JetMatrix {
    let mut out = [[Jet2::zero(); DIM]; DIM];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..DIM).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Eigenvalue functions f_1..f_6 at a point, with block multiplicity.
pub fn eigenvalue_functions(spec: &HSpaceSpec, p: &Point) -> [Jet2; DIM] {
    forms::eigen_jets(spec, &seed_all(p))
}

/// Auxiliary functions A (and Ã) of each Jordan block, in layout order.
pub fn aux_functions(spec: &HSpaceSpec, p: &Point) -> Vec<Jet2> {
    let x = seed_all(p);
    spec.jordan_blocks()
        .map(|(layout, branch)| block_aux(spec, &layout, branch, &x))
        .collect()
}

/// Metric jet at `p`. Poles carry the point; the inverse must be well conditioned.
pub fn metric_at(spec: &HSpaceSpec, p: &Point) -> Result<MetricField> {
    let g = forms::line_element(spec, p).map_err(|e| e.at(p))?;
    if g.iter().flatten().any(|j| !j.is_finite()) {
        return Err(Error::pole("non-finite metric component").at(p));
    }
    let g_inv = invert_jet_matrix(&g)?;
    Ok(MetricField { point: *p, g, g_inv })
}

/// Metric values at `p` without the inverse; cheap enough for stencils.
pub fn metric_values(spec: &HSpaceSpec, p: &Point) -> Result<Matrix6<f64>> {
    Ok(values(&forms::line_element(spec, p).map_err(|e| e.at(p))?))
}

/// Inverse of a symmetric jet matrix.
///
/// The value comes from an LU inverse; derivatives follow from
/// ∂(M⁻¹) = −M⁻¹(∂M)M⁻¹ and its second-order analogue.
pub fn invert_jet_matrix(m: &JetMatrix) -> Result<JetMatrix> {
    let v = values(m);
    let sv = v.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::SingularMatrix { condition });
    }
    let inv = v
        .try_inverse()
        .ok_or(Error::SingularMatrix { condition })?;
    let inv = (inv + inv.transpose()) * 0.5;

    // M_k = G ∂_k g
    let mk: Vec<Matrix6<f64>> = (0..DIM).map(|k| inv * partial(m, k)).collect();
    let dinv: Vec<Matrix6<f64>> = mk.iter().map(|mk| -(mk * inv)).collect();

    let mut out = [[Jet2::zero(); DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            out[i][j].val = inv[(i, j)];
            for k in 0..DIM {
                out[i][j].grad[k] = 0.5 * (dinv[k][(i, j)] + dinv[k][(j, i)]);
            }
        }
    }
    for k in 0..DIM {
        for l in k..DIM {
            let d2 = -(inv * second_partial(m, k, l) * inv)
                + (mk[k] * mk[l] + mk[l] * mk[k]) * inv;
            for i in 0..DIM {
                for j in 0..DIM {
                    let h = 0.5 * (d2[(i, j)] + d2[(j, i)]);
                    out[i][j].hess[k][l] = h;
                    out[i][j].hess[l][k] = h;
                }
            }
        }
    }
    Ok(out)
}

/// Signature (p, q) of a symmetric matrix: counts of positive and negative
/// eigenvalues. Near-zero eigenvalues are a degeneracy error.
pub fn check_signature(g: &Matrix6<f64>) -> Result<(usize, usize)> {
    let eig = SymmetricEigen::new((g + g.transpose()) * 0.5).eigenvalues;
    let scale = eig.amax();
    let tol = DEGENERACY_TOL * scale;
    if let Some(&ev) = eig.iter().find(|e| e.abs() <= tol) {
        return Err(Error::DegenerateMetric { eigenvalue: ev });
    }
    let pos = eig.iter().filter(|&&e| e > 0.0).count();
    Ok((pos, DIM - pos))
}
