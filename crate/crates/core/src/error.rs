use thiserror::Error;

use crate::jets::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("axis {0} out of range (expected 1..=6)")]
    AxisOutOfRange(usize),

    #[error("point has a non-finite coordinate")]
    NonFinitePoint,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A denominator vanished. `point` is attached by the layer that knows it.
    #[error("pole: {what}{}", point_suffix(.point))]
    Pole { what: String, point: Option<[f64; 6]> },

    #[error("matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("ε ≠ ε̃ violated (ε = ε̃ = {eps})")]
    EpsEquality { eps: u8 },

    #[error("a must be nonzero when ε̃ = 0")]
    ZeroOffset,

    #[error("sign e{index} must be +1 or -1, got {value}")]
    BadSign { index: usize, value: i64 },

    #[error("sampling exhausted: accepted {accepted} of {requested} points; tightest constraint: {tightest}")]
    SamplingExhausted {
        accepted: usize,
        requested: usize,
        tightest: String,
    },

    #[error("degenerate metric: eigenvalue {eigenvalue:e} is within tolerance of zero")]
    DegenerateMetric { eigenvalue: f64 },

    #[error("degenerate plane: |g(u,u)g(v,v) - g(u,v)^2| = {area:e}")]
    DegeneratePlane { area: f64 },

    #[error("b = g∘B is not symmetric (asymmetry {asymmetry:e}); nilpotent shift orientation is wrong")]
    Orientation { asymmetry: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("schema violation at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

fn point_suffix(point: &Option<[f64; 6]>) -> String {
    match point {
        Some(x) => format!(" at {x:?}"),
        None => String::new(),
    }
}

impl Error {
    pub fn pole(what: impl Into<String>) -> Self {
        Error::Pole {
            what: what.into(),
            point: None,
        }
    }

    /// Attach the evaluation point to a pole error that does not carry one yet.
    pub fn at(self, p: &Point) -> Self {
        match self {
            Error::Pole { what, point: None } => Error::Pole {
                what,
                point: Some(p.x),
            },
            other => other,
        }
    }

    pub fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}
