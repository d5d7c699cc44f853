//! Order-2 jets in six coordinates.
//!
//! A [`Jet2`] carries a value together with its gradient and Hessian at a
//! fixed point. Arithmetic propagates all three exactly (to rounding), so a
//! formula written once over jets yields its first and second partials for
//! free. The Hessian is always stored as a full, exactly symmetric matrix.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DIM: usize = 6;

/// Default step for [`fd_oracle`].
pub const FD_STEP: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: [f64; DIM],
}

impl Point {
    pub fn new(x: [f64; DIM]) -> Result<Self> {
        if x.iter().all(|v| v.is_finite()) {
            Ok(Self { x })
        } else {
            Err(Error::NonFinitePoint)
        }
    }

    /// Coordinate x^axis with a 1-based axis.
    pub fn coord(&self, axis: usize) -> f64 {
        self.x[axis - 1]
    }

    fn shifted(&self, shifts: &[(usize, f64)]) -> Point {
        let mut x = self.x;
        for &(i, h) in shifts {
            x[i] += h;
        }
        Point { x }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub val: f64,
    pub grad: [f64; DIM],
    pub hess: [[f64; DIM]; DIM],
}

impl Default for Jet2 {
    fn default() -> Self {
        Self::zero()
    }
}

impl Jet2 {
    pub const fn constant(val: f64) -> Self {
        Self {
            val,
            grad: [0.0; DIM],
            hess: [[0.0; DIM]; DIM],
        }
    }

    pub const fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Independent variable on a 0-based index; callers guarantee the range.
    pub(crate) fn variable(val: f64, index: usize) -> Self {
        let mut j = Self::constant(val);
        j.grad[index] = 1.0;
        j
    }

    pub fn is_finite(&self) -> bool {
        self.val.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().flatten().all(|h| h.is_finite())
    }

    /// Largest absolute value over all stored components.
    pub fn max_abs(&self) -> f64 {
        self.grad
            .iter()
            .chain(self.hess.iter().flatten())
            .fold(self.val.abs(), |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Jet2) -> f64 {
        let mut m = (self.val - other.val).abs();
        for i in 0..DIM {
            m = m.max((self.grad[i] - other.grad[i]).abs());
            for j in 0..DIM {
                m = m.max((self.hess[i][j] - other.hess[i][j]).abs());
            }
        }
        m
    }

    /// Component-wise difference relative to the larger of the two jets.
    pub fn rel_diff(&self, other: &Jet2) -> f64 {
        let scale = self.max_abs().max(other.max_abs());
        if scale == 0.0 {
            0.0
        } else {
            self.max_abs_diff(other) / scale
        }
    }

    /// Compose with a univariate function given (f, f', f'') at `self.val`.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Jet2 {
        let mut out = Jet2::constant(f);
        for i in 0..DIM {
            out.grad[i] = df * self.grad[i];
        }
        for i in 0..DIM {
            for j in i..DIM {
                let h = d2f * self.grad[i] * self.grad[j] + df * self.hess[i][j];
                out.hess[i][j] = h;
                out.hess[j][i] = h;
            }
        }
        out
    }

    pub fn recip(&self) -> Result<Jet2> {
        let v = self.val;
        if v == 0.0 || !v.is_finite() {
            return Err(Error::pole("reciprocal of a jet with zero value"));
        }
        let r = 1.0 / v;
        let out = self.chain(r, -r * r, 2.0 * r * r * r);
        if !out.is_finite() {
            return Err(Error::pole("reciprocal overflowed"));
        }
        Ok(out)
    }

    pub fn checked_div(&self, rhs: &Jet2) -> Result<Jet2> {
        Ok(*self * rhs.recip()?)
    }

    /// Integer power; negative exponents go through [`Jet2::recip`].
    pub fn powi(&self, n: i32) -> Result<Jet2> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let v = self.val;
        let f = v.powi(n);
        let df = if n >= 1 { n as f64 * v.powi(n - 1) } else { 0.0 };
        let d2f = if n >= 2 {
            (n * (n - 1)) as f64 * v.powi(n - 2)
        } else {
            0.0
        };
        Ok(self.chain(f, df, d2f))
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        let mut out = *self;
        out.val *= c;
        for i in 0..DIM {
            out.grad[i] *= c;
            for j in 0..DIM {
                out.hess[i][j] *= c;
            }
        }
        out
    }
}

/// Jet of the coordinate function x^axis at `p` (1-based axis).
pub fn seed_coordinate(p: &Point, axis: usize) -> Result<Jet2> {
    if !(1..=DIM).contains(&axis) {
        return Err(Error::AxisOutOfRange(axis));
    }
    Ok(Jet2::variable(p.x[axis - 1], axis - 1))
}

/// All six coordinate jets at `p`.
pub fn seed_all(p: &Point) -> [Jet2; DIM] {
    std::array::from_fn(|i| Jet2::variable(p.x[i], i))
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: Jet2) -> Jet2 {
        self += rhs;
        self
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, rhs: Jet2) {
        self.val += rhs.val;
        for i in 0..DIM {
            self.grad[i] += rhs.grad[i];
            for j in 0..DIM {
                self.hess[i][j] += rhs.hess[i][j];
            }
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        self + (-rhs)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let (a, b) = (&self, &rhs);
        let mut out = Jet2::constant(a.val * b.val);
        for i in 0..DIM {
            out.grad[i] = a.grad[i] * b.val + a.val * b.grad[i];
        }
        for i in 0..DIM {
            for j in i..DIM {
                let h = a.hess[i][j] * b.val
                    + a.val * b.hess[i][j]
                    + (a.grad[i] * b.grad[j] + b.grad[i] * a.grad[j]);
                out.hess[i][j] = h;
                out.hess[j][i] = h;
            }
        }
        out
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: f64) -> Jet2 {
        self.scale(rhs)
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        rhs.scale(self)
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: f64) -> Jet2 {
        self.val += rhs;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, rhs: f64) -> Jet2 {
        self.val -= rhs;
        self
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        -rhs + self
    }
}

impl std::iter::Sum for Jet2 {
    fn sum<I: Iterator<Item = Jet2>>(iter: I) -> Jet2 {
        iter.fold(Jet2::zero(), |a, b| a + b)
    }
}

/// Arbitrary univariate parameter function θ, ω or f_σ.
///
/// Polynomial coefficients are in ascending order: `[c0, c1, c2]` is
/// c0 + c1·t + c2·t².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamFn {
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// amplitude·sin(frequency·t + phase) + offset
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    Constant {
        value: f64,
    },
}

impl ParamFn {
    pub fn constant(value: f64) -> Self {
        ParamFn::Constant { value }
    }

    pub fn polynomial(coeffs: impl Into<Vec<f64>>) -> Self {
        ParamFn::Polynomial {
            coeffs: coeffs.into(),
        }
    }

    /// (f, f′, f″) at t.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match self {
            ParamFn::Constant { value } => (*value, 0.0, 0.0),
            ParamFn::Polynomial { coeffs } => {
                // Horner on f, f' and f'' together.
                let (mut f, mut df, mut d2f) = (0.0, 0.0, 0.0);
                for &c in coeffs.iter().rev() {
                    d2f = d2f * t + 2.0 * df;
                    df = df * t + f;
                    f = f * t + c;
                }
                (f, df, d2f)
            }
            ParamFn::Sinusoid {
                amplitude,
                frequency,
                phase,
                offset,
            } => {
                let arg = frequency * t + phase;
                let (s, c) = arg.sin_cos();
                (
                    amplitude * s + offset,
                    amplitude * frequency * c,
                    -amplitude * frequency * frequency * s,
                )
            }
        }
    }

    pub fn eval_jet(&self, t: &Jet2) -> Jet2 {
        let (f, df, d2f) = self.eval(t.val);
        t.chain(f, df, d2f)
    }

    pub fn is_finite(&self) -> bool {
        match self {
            ParamFn::Constant { value } => value.is_finite(),
            ParamFn::Polynomial { coeffs } => coeffs.iter().all(|c| c.is_finite()),
            ParamFn::Sinusoid {
                amplitude,
                frequency,
                phase,
                offset,
            } => [amplitude, frequency, phase, offset]
                .iter()
                .all(|v| v.is_finite()),
        }
    }
}

/// Central-difference jet of a scalar field: O(h²) gradient and Hessian.
///
/// Independent of the jet arithmetic; it only evaluates `field` on a stencil.
pub fn fd_oracle<F>(field: F, p: &Point, h: f64) -> Result<Jet2>
where
    F: Fn(&Point) -> Result<f64>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step h = {h} must be positive")));
    }
    let eval = |q: Point| field(&q).map_err(|e| e.at(&q));
    let f0 = eval(*p)?;
    let mut out = Jet2::constant(f0);
    let mut plus = [0.0; DIM];
    let mut minus = [0.0; DIM];
    for i in 0..DIM {
        plus[i] = eval(p.shifted(&[(i, h)]))?;
        minus[i] = eval(p.shifted(&[(i, -h)]))?;
        out.grad[i] = (plus[i] - minus[i]) / (2.0 * h);
        out.hess[i][i] = (plus[i] - 2.0 * f0 + minus[i]) / (h * h);
    }
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            let pp = eval(p.shifted(&[(i, h), (j, h)]))?;
            let pm = eval(p.shifted(&[(i, h), (j, -h)]))?;
            let mp = eval(p.shifted(&[(i, -h), (j, h)]))?;
            let mm = eval(p.shifted(&[(i, -h), (j, -h)]))?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            out.hess[i][j] = v;
            out.hess[j][i] = v;
        }
    }
    Ok(out)
}
