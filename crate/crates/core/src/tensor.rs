//! Christoffel symbols, curvature and covariant derivatives from metric jets.
//!
//! Residual-style outputs are normalized by the magnitude of the terms that
//! build them, so a tensor that vanishes by cancellation still yields a
//! meaningful relative figure.

use crate::error::{Error, Result};
use crate::jets::{Jet2, DIM};
use crate::metrics::{JetMatrix, MetricField};

pub type Arr2 = [[f64; DIM]; DIM];
pub type Arr3 = [[[f64; DIM]; DIM]; DIM];
pub type Arr4 = [[[[f64; DIM]; DIM]; DIM]; DIM];

/// Sign in front of the curvature convention
/// R^i_jkl = ∂_kΓ^i_jl − ∂_lΓ^i_jk + Γ^i_km Γ^m_jl − Γ^i_lm Γ^m_jk.
/// Calibrated against the integrability condition of the Eisenhart equation.
pub const RIEMANN_SIGN: f64 = 1.0;

/// Minimum |g(u,u)g(v,v) − g(u,v)²| relative to |g(u,u)g(v,v)| + g(u,v)².
pub const MIN_PLANE_AREA: f64 = 1e-9;

const TINY: f64 = 1e-300;

fn zeros4() -> Box<Arr4> {
    Box::new([[[[0.0; DIM]; DIM]; DIM]; DIM])
}

fn max3(a: &Arr3) -> f64 {
    a.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

fn max4(a: &Arr4) -> f64 {
    a.iter().flatten().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Relative measure: `num / max(scale, TINY)`, zero when both vanish.
pub fn relative(num: f64, scale: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / scale.max(TINY)
    }
}

#[derive(Clone, Debug)]
pub struct Christoffel {
    /// gamma[i][j][k] = Γ^i_jk
    pub gamma: Arr3,
    /// dgamma[i][j][k][l] = ∂_l Γ^i_jk
    pub dgamma: Box<Arr4>,
}

impl Christoffel {
    pub fn max_abs(&self) -> f64 {
        max3(&self.gamma)
    }

    pub fn max_abs_derivative(&self) -> f64 {
        max4(&self.dgamma)
    }

    /// Largest |Γ^i_jk − Γ^i_kj|; zero by construction.
    pub fn symmetry_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    m = m.max((self.gamma[i][j][k] - self.gamma[i][k][j]).abs());
                }
            }
        }
        m
    }
}

/// Γ^i_jk = ½ g^il (∂_j g_lk + ∂_k g_jl − ∂_l g_jk) together with ∂_m Γ^i_jk.
pub fn christoffel(m: &MetricField) -> Christoffel {
    christoffel_from(&m.g, &m.g_inv)
}

pub(crate) fn christoffel_from(g: &JetMatrix, g_inv: &JetMatrix) -> Christoffel {
    let mut gamma = [[[0.0; DIM]; DIM]; DIM];
    let mut dgamma = zeros4();
    for j in 0..DIM {
        for k in j..DIM {
            // first kind and its derivatives, indexed by l
            let mut t = [0.0; DIM];
            let mut dt = [[0.0; DIM]; DIM];
            for l in 0..DIM {
                t[l] = 0.5 * (g[l][k].grad[j] + g[j][l].grad[k] - g[j][k].grad[l]);
                for mm in 0..DIM {
                    dt[l][mm] =
                        0.5 * (g[l][k].hess[j][mm] + g[j][l].hess[k][mm] - g[j][k].hess[l][mm]);
                }
            }
            for i in 0..DIM {
                let v: f64 = (0..DIM).map(|l| g_inv[i][l].val * t[l]).sum();
                gamma[i][j][k] = v;
                gamma[i][k][j] = v;
                for mm in 0..DIM {
                    let d: f64 = (0..DIM)
                        .map(|l| g_inv[i][l].grad[mm] * t[l] + g_inv[i][l].val * dt[l][mm])
                        .sum();
                    dgamma[i][j][k][mm] = d;
                    dgamma[i][k][j][mm] = d;
                }
            }
        }
    }
    Christoffel { gamma, dgamma }
}

#[derive(Clone, Debug)]
pub struct Riemann {
    /// up[i][j][k][l] = R^i_jkl
    pub up: Box<Arr4>,
    /// low[i][j][k][l] = R_ijkl = g_im R^m_jkl
    pub low: Box<Arr4>,
    /// Magnitude of the derivative and quadratic terms building R^i_jkl.
    pub term_scale: f64,
    /// The same scale carried through the lowering with g.
    pub low_term_scale: f64,
}

pub fn riemann(c: &Christoffel, m: &MetricField, sign: f64) -> Riemann {
    let g = &m.g;
    let mut up = zeros4();
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in (k + 1)..DIM {
                    let mut v = c.dgamma[i][j][l][k] - c.dgamma[i][j][k][l];
                    for mm in 0..DIM {
                        v += c.gamma[i][k][mm] * c.gamma[mm][j][l]
                            - c.gamma[i][l][mm] * c.gamma[mm][j][k];
                    }
                    up[i][j][k][l] = sign * v;
                    up[i][j][l][k] = -sign * v;
                }
            }
        }
    }
    let mut low = zeros4();
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    low[i][j][k][l] = (0..DIM).map(|mm| g[i][mm].val * up[mm][j][k][l]).sum();
                }
            }
        }
    }
    let gamma_max = c.max_abs();
    let term_scale = c.max_abs_derivative() + gamma_max * gamma_max;
    let gmax = g.iter().flatten().fold(0.0_f64, |a, j| a.max(j.val.abs()));
    Riemann {
        up,
        low,
        term_scale,
        low_term_scale: term_scale * gmax,
    }
}

/// Relative violations of the algebraic symmetries of R.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RiemannSymmetry {
    /// R_ijkl + R_jikl
    pub first_pair: f64,
    /// R_ijkl + R_ijlk
    pub second_pair: f64,
    /// R_ijkl − R_klij
    pub pair_exchange: f64,
    /// R^i_jkl + R^i_klj + R^i_ljk
    pub first_bianchi: f64,
}

impl RiemannSymmetry {
    pub fn max(&self) -> f64 {
        self.first_pair
            .max(self.second_pair)
            .max(self.pair_exchange)
            .max(self.first_bianchi)
    }
}

impl Riemann {
    pub fn max_abs(&self) -> f64 {
        max4(&self.low)
    }

    pub fn symmetry_residuals(&self) -> RiemannSymmetry {
        let (r, u) = (&self.low, &self.up);
        let mut s = RiemannSymmetry::default();
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        s.first_pair = s.first_pair.max((r[i][j][k][l] + r[j][i][k][l]).abs());
                        s.second_pair = s.second_pair.max((r[i][j][k][l] + r[i][j][l][k]).abs());
                        s.pair_exchange =
                            s.pair_exchange.max((r[i][j][k][l] - r[k][l][i][j]).abs());
                        s.first_bianchi = s
                            .first_bianchi
                            .max((u[i][j][k][l] + u[i][k][l][j] + u[i][l][j][k]).abs());
                    }
                }
            }
        }
        let low_scale = self.max_abs().max(self.low_term_scale);
        let up_scale = max4(u).max(self.term_scale);
        RiemannSymmetry {
            first_pair: relative(s.first_pair, low_scale),
            second_pair: relative(s.second_pair, low_scale),
            pair_exchange: relative(s.pair_exchange, low_scale),
            first_bianchi: relative(s.first_bianchi, up_scale),
        }
    }

    /// Ricci tensor R_jl = R^i_jil.
    pub fn ricci(&self) -> Arr2 {
        let mut out = [[0.0; DIM]; DIM];
        for (j, row) in out.iter_mut().enumerate() {
            for (l, cell) in row.iter_mut().enumerate() {
                *cell = (0..DIM).map(|i| self.up[i][j][i][l]).sum();
            }
        }
        out
    }
}

/// A covariant derivative together with the size of its ingredients.
#[derive(Clone, Debug)]
pub struct Covariant<T> {
    pub value: T,
    /// Largest |partial| or |connection term| that entered any component.
    pub term_scale: f64,
}

/// b_ij,k = ∂_k b_ij − Γ^m_ki b_mj − Γ^m_kj b_im, stored as value[i][j][k].
pub fn covariant_derivative_2tensor(b: &JetMatrix, c: &Christoffel) -> Covariant<Arr3> {
    let mut value = [[[0.0; DIM]; DIM]; DIM];
    let mut scale: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                let partial = b[i][j].grad[k];
                let mut conn = 0.0;
                for m in 0..DIM {
                    let t1 = c.gamma[m][k][i] * b[m][j].val;
                    let t2 = c.gamma[m][k][j] * b[i][m].val;
                    scale = scale.max(t1.abs()).max(t2.abs());
                    conn += t1 + t2;
                }
                scale = scale.max(partial.abs());
                value[i][j][k] = partial - conn;
            }
        }
    }
    Covariant {
        value,
        term_scale: scale,
    }
}

/// φ_,ij = ∂_i∂_j φ − Γ^m_ij ∂_m φ.
pub fn covariant_hessian_scalar(phi: &Jet2, c: &Christoffel) -> Covariant<Arr2> {
    let mut value = [[0.0; DIM]; DIM];
    let mut scale: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            let mut conn = 0.0;
            for m in 0..DIM {
                let t = c.gamma[m][i][j] * phi.grad[m];
                scale = scale.max(t.abs());
                conn += t;
            }
            scale = scale.max(phi.hess[i][j].abs());
            value[i][j] = phi.hess[i][j] - conn;
        }
    }
    Covariant {
        value,
        term_scale: scale,
    }
}

/// Relative size of ∇g; vanishes for the Levi-Civita connection.
pub fn metric_compatibility(m: &MetricField, c: &Christoffel) -> f64 {
    let d = covariant_derivative_2tensor(&m.g, c);
    relative(max3(&d.value), d.term_scale)
}

fn bilinear(g: &nalgebra::Matrix6<f64>, u: &[f64; DIM], v: &[f64; DIM]) -> f64 {
    let mut s = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            s += g[(i, j)] * u[i] * v[j];
        }
    }
    s
}

/// K(u, v) = R_ijkl u^i v^j u^k v^l / (g(u,u)g(v,v) − g(u,v)²).
///
/// With the sign convention above, K is positive on round spheres.
pub fn sectional_curvature(r: &Riemann, m: &MetricField, u: &[f64; DIM], v: &[f64; DIM]) -> Result<f64> {
    let g = m.values();
    let (guu, gvv, guv) = (bilinear(&g, u, u), bilinear(&g, v, v), bilinear(&g, u, v));
    let area = guu * gvv - guv * guv;
    let scale = (guu * gvv).abs() + guv * guv;
    if area.is_nan() || area.abs() <= MIN_PLANE_AREA * scale {
        return Err(Error::DegeneratePlane { area: area.abs() });
    }
    let mut num = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    num += r.low[i][j][k][l] * u[i] * v[j] * u[k] * v[l];
                }
            }
        }
    }
    Ok(num / area)
}
