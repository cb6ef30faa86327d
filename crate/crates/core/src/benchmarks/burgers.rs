//! Viscous Burgers equation on (0, 1):
//! `∂x/∂t + x ∂x/∂w = μ ∂²x/∂w² + 1`, `x(0, t) = 0`, `∂x/∂w(1, t) = 0`.

use super::fom::{AffineTerm, Coefficient, Nonlinearity, ParametricFom, TimeGrid, Trajectory};
use super::params::{GridSpacing, ParameterDomain, ParameterSample, TrainingSet};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

pub const VISCOSITY_MIN: f64 = 0.005;
pub const VISCOSITY_MAX: f64 = 1.0;
pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_DT: f64 = 0.001;
pub const DEFAULT_HORIZON: f64 = 2.0;

/// Unknowns sit at `w_j = j Δw`, j = 1..n, with `Δw = 1/n`. The Dirichlet
/// node is eliminated and the Neumann condition enters as `x_{n+1} = x_n`.
/// The returned stiffness term is the negated diffusion operator, scaled
/// by μ at solve time.
pub fn build_burgers(n: usize, dt: f64, horizon: f64) -> Result<ParametricFom> {
    if n < 3 {
        return Err(Error::InvalidModel(format!("burgers needs n >= 3, got {n}")));
    }
    let time = TimeGrid::new(dt, horizon)?;
    let dw = 1.0 / n as f64;
    let inv = 1.0 / (dw * dw);
    let mut t = Vec::with_capacity(3 * n);
    for j in 0..n {
        let last = j + 1 == n;
        t.push((j, j, if last { inv } else { 2.0 * inv }));
        if j > 0 {
            t.push((j, j - 1, -inv));
        }
        if !last {
            t.push((j, j + 1, -inv));
        }
    }
    let diffusion = CsrMatrix::from_triplets(n, n, &t);
    let fom = ParametricFom {
        name: "burgers".into(),
        mass: CsrMatrix::identity(n),
        stiffness: vec![AffineTerm {
            coefficient: Coefficient::Parameter(0),
            matrix: diffusion,
        }],
        input: vec![1.0; n],
        output: CsrMatrix::from_triplets(1, n, &[(0, n - 1, 1.0)]),
        nonlinearity: Some(Nonlinearity::UpwindConvection { dw }),
        input_signal: 1.0,
        time,
        steady: false,
        domain: burgers_domain(),
    };
    fom.validate()?;
    Ok(fom)
}

pub fn burgers_domain() -> ParameterDomain {
    ParameterDomain::new(vec![VISCOSITY_MIN], vec![VISCOSITY_MAX]).expect("static bounds")
}

/// `count` equally spaced viscosities over the admissible interval.
pub fn burgers_training_set(count: usize) -> Result<TrainingSet> {
    TrainingSet::grid(&burgers_domain(), &[count], GridSpacing::Linear)
}

pub fn solve_burgers(fom: &ParametricFom, mu: &ParameterSample) -> Result<Trajectory> {
    fom.solve(mu)
}

pub fn default_burgers() -> ParametricFom {
    build_burgers(DEFAULT_N, DEFAULT_DT, DEFAULT_HORIZON).expect("default burgers model")
}
