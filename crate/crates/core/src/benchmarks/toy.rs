//! Two-parameter nonlinear test function on `[−1, 1]²`.

use std::f64::consts::PI;

use super::fom::{Axis, SnapshotMatrix};
use super::params::{ParameterDomain, ParameterSample};
use crate::linalg::DenseMatrix;

pub const SPACE_POINTS: usize = 50;
pub const PARAMETER_POINTS: usize = 40;
pub const MU_BOUND: f64 = 0.4;

/// `f(x; μ) = (1 + π²/4 (μ₂ − μ₁ − (μ₁+μ₂) x₂)² sin²(π(x₁+1)/2))
///            / (1 + (μ₁+μ₂) cos(π(x₁+1)/2))`.
pub fn toy_eval(x1: f64, x2: f64, mu: &ParameterSample) -> f64 {
    let (m1, m2) = (mu.values[0], mu.values[1]);
    let phase = PI * (x1 + 1.0) / 2.0;
    let shear = m2 - m1 - (m1 + m2) * x2;
    let s = phase.sin();
    (1.0 + PI * PI / 4.0 * shear * shear * s * s) / (1.0 + (m1 + m2) * phase.cos())
}

pub fn toy_domain() -> ParameterDomain {
    ParameterDomain::new(vec![-MU_BOUND; 2], vec![MU_BOUND; 2]).expect("static bounds")
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Spatial grid points, `x₁` varying fastest.
pub fn toy_space_points() -> Vec<(f64, f64)> {
    let g = linspace(-1.0, 1.0, SPACE_POINTS);
    let mut pts = Vec::with_capacity(SPACE_POINTS * SPACE_POINTS);
    for &x2 in &g {
        for &x1 in &g {
            pts.push((x1, x2));
        }
    }
    pts
}

/// Parameter grid, `μ₁` varying fastest.
pub fn toy_parameter_points() -> Vec<ParameterSample> {
    let g = linspace(-MU_BOUND, MU_BOUND, PARAMETER_POINTS);
    let mut pts = Vec::with_capacity(PARAMETER_POINTS * PARAMETER_POINTS);
    for &m2 in &g {
        for &m1 in &g {
            pts.push(ParameterSample::new(vec![m1, m2]));
        }
    }
    pts
}

/// 2500 × 1600 matrix with one column per parameter and one row per
/// spatial point.
pub fn toy_snapshots() -> SnapshotMatrix {
    let xs = toy_space_points();
    let mus = toy_parameter_points();
    let m = DenseMatrix::from_fn(xs.len(), mus.len(), |i, j| toy_eval(xs[i].0, xs[i].1, &mus[j]))
        .expect("toy function is finite on its domain");
    SnapshotMatrix::new(m, Axis::Space, Axis::Parameter)
}
