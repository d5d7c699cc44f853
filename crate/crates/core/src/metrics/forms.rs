//! Canonical line elements, written once over jets.

use crate::error::Result;
use crate::jets::{seed_all, Jet2, Point, DIM};

use super::spec::{BlockLayout, Branch, EigenRole, HSpaceSpec, HSpaceType, SecondBlockA33, SixthFactor321, Tail411};
use super::JetMatrix;

/// Accumulates g from a line element g_ij dx^i dx^j. Indices are 1-based.
struct LineElement {
    g: JetMatrix,
}

impl LineElement {
    fn new() -> Self {
        Self {
            g: [[Jet2::zero(); DIM]; DIM],
        }
    }

    /// c·(dx^i)²
    fn square(&mut self, i: usize, c: Jet2) {
        self.g[i - 1][i - 1] += c;
    }

    /// c·dx^i dx^j with i ≠ j, split evenly between g_ij and g_ji.
    fn cross(&mut self, i: usize, j: usize, c: Jet2) {
        let half = c * 0.5;
        self.g[i - 1][j - 1] += half;
        self.g[j - 1][i - 1] += half;
    }
}

fn inv(d: Jet2) -> Result<Jet2> {
    d.recip()
}

/// Auxiliary function A of a Jordan block: ε_b·x^{n−1} + param(x^n) over the
/// block's last two coordinates. The [33] second block optionally reads x⁴.
pub fn block_aux(spec: &HSpaceSpec, layout: &BlockLayout, branch: Branch, x: &[Jet2; DIM]) -> Jet2 {
    let last = layout.last();
    let lin = if spec.kind == HSpaceType::T33
        && branch == Branch::Second
        && spec.readings.t33_second_block_a == SecondBlockA33::UsesX4
    {
        layout.start
    } else {
        last - 1
    };
    x[lin - 1] * spec.branch_eps(branch) + spec.branch_param(branch).eval_jet(&x[last - 1])
}

/// Eigenvalue functions f_1..f_6 as jets, with block multiplicity.
pub(crate) fn eigen_jets(spec: &HSpaceSpec, x: &[Jet2; DIM]) -> [Jet2; DIM] {
    let mut f = [Jet2::zero(); DIM];
    for layout in spec.kind.layout() {
        let last = layout.last();
        let value = match layout.role {
            EigenRole::Block { branch } => {
                x[last - 1] * spec.branch_eps(branch) + spec.branch_offset(branch)
            }
            EigenRole::Simple => spec.simple_fn(last).eval_jet(&x[last - 1]),
        };
        for i in layout.indices() {
            f[i - 1] = value;
        }
    }
    f
}

/// Π_{i≠σ} (f_i − f_σ) over all six eigenvalues, with multiplicity.
fn simple_root_factor(f: &[Jet2; DIM], sigma: usize) -> Jet2 {
    (1..=DIM)
        .filter(|&i| i != sigma)
        .fold(Jet2::constant(1.0), |acc, i| acc * (f[i - 1] - f[sigma - 1]))
}

fn aux(spec: &HSpaceSpec, x: &[Jet2; DIM], n: usize) -> Jet2 {
    let (layout, branch) = spec
        .jordan_blocks()
        .nth(n)
        .expect("layout has the requested Jordan block");
    block_aux(spec, &layout, branch, x)
}

pub(crate) fn line_element(spec: &HSpaceSpec, p: &Point) -> Result<JetMatrix> {
    let x = seed_all(p);
    let f = eigen_jets(spec, &x);
    let mut le = LineElement::new();
    let e = |i| spec.sign(i);
    let eps = spec.eps_value();
    let c = Jet2::constant;

    match spec.kind {
        HSpaceType::T2211 => {
            let (f2, f4, f5, f6) = (f[1], f[3], f[4], f[5]);
            let a = aux(spec, &x, 0);
            let at = aux(spec, &x, 1);
            let s1 = c(2.0) * inv(f4 - f2)? + inv(f5 - f2)? + inv(f6 - f2)?;
            let s2 = c(2.0) * inv(f2 - f4)? + inv(f5 - f4)? + inv(f6 - f4)?;
            let p1 = (f4 - f2) * (f4 - f2) * (f5 - f2) * (f6 - f2) * e(2);
            let p2 = (f2 - f4) * (f2 - f4) * (f5 - f4) * (f6 - f4) * e(4);
            le.cross(1, 2, p1 * a * 2.0);
            le.square(2, -(p1 * a * a * s1));
            le.cross(3, 4, p2 * at * 2.0);
            le.square(4, -(p2 * at * at * s2));
        }
        HSpaceType::T321 => {
            let (f3, f5, f6) = (f[2], f[4], f[5]);
            let a = aux(spec, &x, 0);
            let at = aux(spec, &x, 1);
            let (i63, i53) = (inv(f6 - f3)?, inv(f5 - f3)?);
            let s1 = i63 + i53 * 2.0;
            let s2 = i63 * i63 + i53 * i53 * 2.0;
            let s3 = (s1 * s1 - s2) * 0.5;
            let s4 = inv(f3 - f5)? * 3.0 + inv(f6 - f5)?;
            let ex1 = x[0] * eps;
            let p = (f5 - f3) * (f5 - f3) * (f6 - f3) * e(3);
            le.square(2, p);
            le.cross(1, 3, p * a * 4.0);
            le.cross(2, 3, p * (ex1 - a * s1 * 2.0) * 2.0);
            le.square(3, p * (ex1 * ex1 - ex1 * a * s1 * 4.0 + a * a * s3 * 4.0));
            let q = (f3 - f5).powi(3)? * (f6 - f5) * e(5);
            le.cross(4, 5, q * at * 2.0);
            le.square(5, -(q * s4 * at * at));
            let g66 = match spec.readings.t321_sixth_factor {
                SixthFactor321::MixedCube => simple_root_factor(&f, 6),
                SixthFactor321::RepeatedFactor => (f5 - f6).powi(5)?,
            };
            le.square(6, g66 * e(6));
        }
        HSpaceType::T33 => {
            let (f3, f6) = (f[2], f[5]);
            let a = aux(spec, &x, 0);
            let at = aux(spec, &x, 1);
            let i63 = inv(f6 - f3)?;
            let s1 = i63 * 3.0;
            let s2 = i63 * i63 * 3.0;
            let ex1 = x[0] * eps;
            let p = (f6 - f3).powi(3)? * e(3);
            le.square(2, p);
            le.cross(1, 3, p * a * 4.0);
            le.cross(2, 3, p * (ex1 - a * s1 * 2.0) * 2.0);
            le.square(3, p * (ex1 * ex1 - ex1 * a * s1 * 4.0 + a * a * s2 * 4.0));
            let etx4 = x[3] * spec.eps_tilde_value();
            let q = (f3 - f6).powi(3)? * e(6);
            le.square(5, q);
            le.cross(4, 6, q * at * 4.0);
            le.cross(5, 6, q * (etx4 + at * s1 * 2.0) * 2.0);
            le.square(6, q * (etx4 * etx4 + etx4 * at * s1 * 4.0 + at * at * s2 * 4.0));
        }
        HSpaceType::T411 => {
            let (f4, f5, f6) = (f[3], f[4], f[5]);
            let a = aux(spec, &x, 0);
            let (i54, i64) = (inv(f5 - f4)?, inv(f6 - f4)?);
            let s1 = i54 + i64;
            let ex1 = x[0] * eps;
            let ex2 = x[1] * eps;
            let p = (f5 - f4) * (f6 - f4) * e(4);
            le.cross(1, 4, p * a * 6.0);
            le.cross(2, 3, p * 2.0);
            le.cross(2, 4, p * (ex2 * 2.0 - a * s1 * 3.0) * 2.0);
            le.square(3, -(p * s1));
            le.cross(3, 4, p * (ex1 - ex2 * s1 * 2.0) * 2.0);
            let main = |sq_sign: f64| {
                p * (ex2 * ex2 * s1 * sq_sign + ex1 * ex2 - ex1 * a * s1 * 1.5) * 4.0
            };
            match spec.readings.t411_tail {
                Tail411::SecondSymmetric => {
                    let pe2 = p * i54 * i64;
                    le.square(4, main(-1.0));
                    le.cross(3, 4, pe2 * a * 6.0);
                    le.square(4, pe2 * ex2 * a * 12.0);
                }
                Tail411::InsideBlock => {
                    le.square(4, main(1.0));
                    le.cross(3, 4, p * a * 3.0);
                    le.square(4, p * ex2 * a * 12.0);
                }
                Tail411::OutsideBlock => {
                    le.square(4, main(1.0));
                    le.cross(3, 4, a * 3.0);
                    le.square(4, ex2 * a * 12.0);
                }
            }
        }
        HSpaceType::T51 => {
            let (f5, f6) = (f[4], f[5]);
            let a = aux(spec, &x, 0);
            let s1 = inv(f6 - f5)?;
            let (ex1, ex2, ex3) = (x[0] * eps, x[1] * eps, x[2] * eps);
            let p = (f6 - f5) * e(5);
            le.cross(1, 5, p * a * 8.0);
            le.cross(2, 4, p * 2.0);
            le.cross(2, 5, p * (ex3 * 3.0 - a * s1 * 4.0) * 2.0);
            le.square(3, p);
            le.cross(3, 4, -(p * s1 * 2.0));
            le.cross(3, 5, p * (ex2 * 2.0 - ex3 * s1 * 3.0) * 2.0);
            le.cross(4, 5, p * (ex1 - ex2 * s1 * 2.0) * 2.0);
            le.square(
                5,
                p * (ex1 * ex3 * 1.5 + ex2 * ex2 - ex1 * a * s1 * 2.0 - ex2 * ex3 * s1 * 3.0)
                    * 4.0,
            );
        }
    }

    // Simple roots share one shape; [321] g66 is handled above.
    if spec.kind != HSpaceType::T321 {
        for &sigma in spec.kind.simple_roots() {
            le.square(sigma, simple_root_factor(&f, sigma) * e(sigma));
        }
    }
    Ok(le.g)
}
