//! Jet-derived quantities against central finite differences of plain values.

#![allow(clippy::needless_range_loop)]

use hspace::canonical::{PointEval, SolveOptions};
use hspace::fixtures::FIXTURES;
use hspace::jets::{fd_oracle, Jet2, Point, DIM, FD_STEP};
use hspace::metrics::{metric_at, metric_values, sample_points, HSpaceSpec};
use hspace::tensor::{christoffel, covariant_derivative_2tensor};

const TOL: f64 = 1e-6;

fn generic_specs() -> Vec<(&'static str, HSpaceSpec, Vec<Point>)> {
    FIXTURES
        .iter()
        .filter(|f| !f.name.ends_with("_flat"))
        .map(|f| {
            let mut cfg = f.config().unwrap();
            cfg.sampler.count = 3;
            let pts = sample_points(&cfg.spec, &cfg.sampler).unwrap();
            (f.name, cfg.spec, pts)
        })
        .collect()
}

/// Central-difference gradient of every component of a vector field,
/// evaluating the field once per stencil point. Result is [component][axis].
fn fd_grad_all<F: Fn(&Point) -> Vec<f64>>(f: F, p: &Point) -> Vec<[f64; DIM]> {
    let mut out: Vec<[f64; DIM]> = Vec::new();
    for axis in 0..DIM {
        let shift = |h: f64| {
            let mut x = p.x;
            x[axis] += h;
            f(&Point::new(x).unwrap())
        };
        let (plus, minus) = (shift(FD_STEP), shift(-FD_STEP));
        out.resize(plus.len(), [0.0; DIM]);
        for (c, (a, b)) in plus.iter().zip(&minus).enumerate() {
            out[c][axis] = (a - b) / (2.0 * FD_STEP);
        }
    }
    out
}

fn flat3(a: &[[[f64; DIM]; DIM]; DIM]) -> Vec<f64> {
    a.iter().flatten().flatten().copied().collect()
}

fn b_values(spec: &HSpaceSpec, q: &Point, opts: &SolveOptions) -> Vec<f64> {
    PointEval::new(spec, q, opts)
        .unwrap()
        .solution
        .b
        .iter()
        .flatten()
        .map(|j| j.val)
        .collect()
}

/// Γ^i_jk from finite-difference metric derivatives and a plain inverse.
fn fd_christoffel(spec: &HSpaceSpec, p: &Point) -> [[[f64; DIM]; DIM]; DIM] {
    let g = metric_values(spec, p).unwrap();
    let ginv = g.try_inverse().unwrap();
    let d = fd_grad_all(|q| metric_values(spec, q).unwrap().iter().copied().collect(), p);
    // nalgebra storage is column-major, and g is symmetric
    let dg = |a: usize, b: usize, k: usize| d[b * DIM + a][k];
    let mut out = [[[0.0; DIM]; DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                out[i][j][k] = (0..DIM)
                    .map(|l| 0.5 * ginv[(i, l)] * (dg(l, k, j) + dg(j, l, k) - dg(j, k, l)))
                    .sum();
            }
        }
    }
    out
}

fn max_rel(a: impl Iterator<Item = (f64, f64)>) -> f64 {
    let pairs: Vec<(f64, f64)> = a.collect();
    let scale = pairs.iter().fold(0.0_f64, |m, (x, y)| m.max(x.abs()).max(y.abs()));
    let diff = pairs.iter().fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

#[test]
fn christoffel_symbols_match_finite_differences() {
    for (name, spec, pts) in generic_specs() {
        for p in &pts {
            let c = christoffel(&metric_at(&spec, p).unwrap());
            let fd = fd_christoffel(&spec, p);
            let err = max_rel(
                (0..DIM).flat_map(|i| (0..DIM).flat_map(move |j| (0..DIM).map(move |k| (i, j, k))))
                    .map(|(i, j, k)| (c.gamma[i][j][k], fd[i][j][k])),
            );
            assert!(err <= TOL, "{name}: {err:e}");
        }
    }
}

#[test]
fn christoffel_derivatives_match_finite_differences() {
    for (name, spec, pts) in generic_specs() {
        let p = &pts[0];
        let c = christoffel(&metric_at(&spec, p).unwrap());
        let d = fd_grad_all(|q| flat3(&christoffel(&metric_at(&spec, q).unwrap()).gamma), p);
        let mut pairs = Vec::new();
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        pairs.push((c.dgamma[i][j][k][l], d[(i * DIM + j) * DIM + k][l]));
                    }
                }
            }
        }
        let err = max_rel(pairs.into_iter());
        assert!(err <= TOL, "{name}: {err:e}");
    }
}

#[test]
fn riemann_tensor_matches_finite_difference_connection() {
    for (name, spec, pts) in generic_specs() {
        let p = &pts[0];
        let ev = PointEval::new(&spec, p, &SolveOptions::default()).unwrap();
        let gamma = ev.christoffel.gamma;
        let d = fd_grad_all(|q| flat3(&fd_christoffel(&spec, q)), p);
        let dgamma = |i: usize, j: usize, k: usize, l: usize| d[(i * DIM + j) * DIM + k][l];
        let mut pairs = Vec::new();
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        let mut r = dgamma(i, j, l, k) - dgamma(i, j, k, l);
                        for m in 0..DIM {
                            r += gamma[i][k][m] * gamma[m][j][l] - gamma[i][l][m] * gamma[m][j][k];
                        }
                        pairs.push((ev.riemann.up[i][j][k][l], r));
                    }
                }
            }
        }
        // nested differences lose accuracy, so the bound is looser here
        let err = max_rel(pairs.into_iter());
        assert!(err <= 1e-4, "{name}: {err:e}");
    }
}

#[test]
fn canonical_solution_jets_match_finite_differences() {
    let opts = SolveOptions::default();
    for (name, spec, pts) in generic_specs() {
        let p = &pts[1];
        let ev = PointEval::new(&spec, p, &opts).unwrap();
        let phi_fd = fd_oracle(
            |q| Ok(PointEval::new(&spec, q, &opts)?.solution.phi.val),
            p,
            FD_STEP,
        )
        .unwrap();
        assert!(ev.solution.phi.rel_diff(&phi_fd) <= TOL, "{name}: phi");
        let d = &fd_grad_all(|q| b_values(&spec, q, &opts), p);
        let pairs = (0..DIM * DIM).flat_map(|c| {
            let jet: Jet2 = ev.solution.b[c / DIM][c % DIM];
            (0..DIM).map(move |l| (jet.grad[l], d[c][l]))
        });
        let err = max_rel(pairs);
        assert!(err <= TOL, "{name}: b gradient {err:e}");
    }
}

#[test]
fn covariant_derivative_of_b_matches_finite_differences() {
    let opts = SolveOptions::default();
    for (name, spec, pts) in generic_specs() {
        let p = &pts[2];
        let ev = PointEval::new(&spec, p, &opts).unwrap();
        let cov = covariant_derivative_2tensor(&ev.solution.b, &ev.christoffel);
        let gamma = fd_christoffel(&spec, p);
        let d = fd_grad_all(|q| b_values(&spec, q, &opts), p);
        let b = &ev.solution.b;
        let mut pairs = Vec::new();
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    let mut v = d[i * DIM + j][k];
                    for m in 0..DIM {
                        v -= gamma[m][k][i] * b[m][j].val + gamma[m][k][j] * b[i][m].val;
                    }
                    pairs.push((cov.value[i][j][k], v));
                }
            }
        }
        // both sides are ~0, so compare against the size of the ingredients
        let diff = pairs.iter().fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(diff <= TOL * cov.term_scale, "{name}: {diff:e} vs {:e}", cov.term_scale);
    }
}
