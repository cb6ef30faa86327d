use super::params::{ParameterDomain, ParameterSample};
use crate::error::{Error, Result};
use crate::linalg::{BandedCholesky, CsrMatrix, DenseMatrix};

/// How the scalar multiplying an affine term is obtained from μ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficient {
    Constant(f64),
    Parameter(usize),
}

impl Coefficient {
    pub fn eval(&self, mu: &ParameterSample) -> f64 {
        match *self {
            Coefficient::Constant(c) => c,
            Coefficient::Parameter(i) => mu.values[i],
        }
    }
}

#[derive(Clone, Debug)]
pub struct AffineTerm {
    pub coefficient: Coefficient,
    pub matrix: CsrMatrix,
}

/// Explicitly treated nonlinear term `f(x)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Nonlinearity {
    /// `f_j = −x_j (x_j − x_{j−1}) / Δw` with `x_{−1} = 0`, the first-order
    /// upwind form of `−x ∂x/∂w` for non-negative transport.
    UpwindConvection { dw: f64 },
}

impl Nonlinearity {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.eval_into(x, &mut out);
        out
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), out.len());
        let mut prev = 0.0;
        for (o, &xj) in out.iter_mut().zip(x) {
            *o = self.eval_local(xj, prev);
            prev = xj;
        }
    }

    /// Value of entry `j` from `x_j` and its upwind neighbour `x_{j−1}`.
    #[inline]
    pub fn eval_local(&self, xj: f64, prev: f64) -> f64 {
        match *self {
            Nonlinearity::UpwindConvection { dw } => -xj * (xj - prev) / dw,
        }
    }

    /// State indices entry `j` depends on: itself and its upwind neighbour.
    pub fn support(&self, j: usize) -> (usize, Option<usize>) {
        (j, j.checked_sub(1))
    }

    /// Entries at `indices` only, reading just the supporting state values.
    pub fn eval_masked(&self, indices: &[usize], x: &[f64]) -> Vec<f64> {
        indices
            .iter()
            .map(|&j| {
                let (i, prev) = self.support(j);
                self.eval_local(x[i], prev.map_or(0.0, |p| x[p]))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    /// Number of steps K; the grid holds K + 1 instants.
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, horizon: f64) -> Result<Self> {
        if !(dt > 0.0) || !(horizon > 0.0) {
            return Err(Error::InvalidModel(format!("time step {dt} and horizon {horizon} must be positive")));
        }
        let steps = (horizon / dt).round() as usize;
        Ok(Self { dt, steps: steps.max(1) })
    }

    pub fn instants(&self) -> usize {
        self.steps + 1
    }
}

/// Full-order model
/// `E (x^k − x^{k−1}) / Δt = −K(μ) x^k + f(x^{k−1}) + B u`
/// with `K(μ) = Σ θ_i(μ) K_i` and output `y = C x`. Each step solves
/// `(E + Δt K(μ)) x^k = E x^{k−1} + Δt (f(x^{k−1}) + B u)`, which is the
/// IMEX scheme when `f` is present and implicit Euler otherwise. In the
/// steady case the single state solves `K(μ) x = B u`.
#[derive(Clone, Debug)]
pub struct ParametricFom {
    pub name: String,
    pub mass: CsrMatrix,
    pub stiffness: Vec<AffineTerm>,
    pub input: Vec<f64>,
    pub output: CsrMatrix,
    pub nonlinearity: Option<Nonlinearity>,
    pub input_signal: f64,
    pub time: TimeGrid,
    pub steady: bool,
    pub domain: ParameterDomain,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: DenseMatrix,
    pub outputs: DenseMatrix,
    /// `f(x^{k})` for k = 0..K−1, present for nonlinear models.
    pub nonlinear: Option<DenseMatrix>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Space,
    Parameter,
    Time,
    /// Output components within time instants.
    OutputTime,
}

/// Snapshot data with the meaning of its rows and columns attached.
#[derive(Clone, Debug)]
pub struct SnapshotMatrix {
    pub matrix: DenseMatrix,
    pub rows: Axis,
    pub cols: Axis,
}

impl SnapshotMatrix {
    pub fn new(matrix: DenseMatrix, rows: Axis, cols: Axis) -> Self {
        Self { matrix, rows, cols }
    }

    pub fn transposed(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
            rows: self.cols,
            cols: self.rows,
        }
    }
}

impl ParametricFom {
    pub fn dim(&self) -> usize {
        self.mass.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.output.rows()
    }

    pub fn parameter_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        let bad = |what: &str| Err(Error::InvalidModel(format!("{what} does not match dimension {n}")));
        if self.mass.cols() != n {
            return bad("mass matrix");
        }
        if self.stiffness.iter().any(|t| t.matrix.rows() != n || t.matrix.cols() != n) {
            return bad("stiffness term");
        }
        if self.input.len() != n {
            return bad("input vector");
        }
        if self.output.cols() != n || self.output.rows() == 0 {
            return bad("output map");
        }
        for t in &self.stiffness {
            if let Coefficient::Parameter(i) = t.coefficient {
                if i >= self.parameter_dim() {
                    return Err(Error::InvalidModel(format!("coefficient refers to parameter {i}")));
                }
            }
        }
        Ok(())
    }

    pub fn coefficients(&self, mu: &ParameterSample) -> Vec<f64> {
        self.stiffness.iter().map(|t| t.coefficient.eval(mu)).collect()
    }

    pub fn stiffness_at(&self, mu: &ParameterSample) -> CsrMatrix {
        let theta = self.coefficients(mu);
        let terms: Vec<(f64, &CsrMatrix)> = theta.iter().copied().zip(self.stiffness.iter().map(|t| &t.matrix)).collect();
        CsrMatrix::linear_combination(&terms)
    }

    pub fn step_matrix(&self, mu: &ParameterSample) -> CsrMatrix {
        let k = self.stiffness_at(mu);
        CsrMatrix::linear_combination(&[(1.0, &self.mass), (self.time.dt, &k)])
    }

    pub fn output_of(&self, x: &[f64]) -> Vec<f64> {
        self.output.matvec(x)
    }

    /// Factorization of the step matrix (or of `K(μ)` when steady).
    pub fn factor(&self, mu: &ParameterSample) -> Result<BandedCholesky> {
        self.domain.check(mu)?;
        let a = if self.steady { self.stiffness_at(mu) } else { self.step_matrix(mu) };
        BandedCholesky::factor(&a).map_err(|e| match e {
            Error::Singular { context } => Error::Singular {
                context: format!("{} system at mu = {:?}: {context}", self.name, mu.values),
            },
            other => other,
        })
    }

    pub fn solve(&self, mu: &ParameterSample) -> Result<Trajectory> {
        self.run(mu, true)
    }

    /// Output trajectory only, without keeping the states.
    pub fn solve_outputs(&self, mu: &ParameterSample) -> Result<DenseMatrix> {
        Ok(self.run(mu, false)?.outputs)
    }

    fn run(&self, mu: &ParameterSample, keep_states: bool) -> Result<Trajectory> {
        let n = self.dim();
        let q = self.output_dim();
        let chol = self.factor(mu)?;
        if self.steady {
            if self.nonlinearity.is_some() {
                return Err(Error::InvalidModel("steady solve supports linear models only".into()));
            }
            let rhs: Vec<f64> = self.input.iter().map(|b| b * self.input_signal).collect();
            let x = chol.solve(&rhs);
            let y = self.output_of(&x);
            return Ok(Trajectory {
                states: DenseMatrix::new(n, 1, x)?,
                outputs: DenseMatrix::new(q, 1, y)?,
                nonlinear: None,
            });
        }
        let nt = self.time.instants();
        let dt = self.time.dt;
        let mut states = if keep_states { Some(DenseMatrix::zeros(n, nt)) } else { None };
        let mut nonlinear = match (&self.nonlinearity, keep_states) {
            (Some(_), true) => Some(DenseMatrix::zeros(n, self.time.steps)),
            _ => None,
        };
        let mut outputs = DenseMatrix::zeros(q, nt);
        let mut x = vec![0.0; n];
        let y0 = self.output_of(&x);
        outputs.column_mut(0).copy_from_slice(&y0);
        let forcing: Vec<f64> = self.input.iter().map(|b| dt * b * self.input_signal).collect();
        let mut rhs = vec![0.0; n];
        let mut fx = vec![0.0; n];
        for k in 1..nt {
            self.mass.matvec_into(&x, &mut rhs);
            for (r, f) in rhs.iter_mut().zip(&forcing) {
                *r += f;
            }
            if let Some(nl) = &self.nonlinearity {
                nl.eval_into(&x, &mut fx);
                if let Some(store) = nonlinear.as_mut() {
                    store.column_mut(k - 1).copy_from_slice(&fx);
                }
                for (r, f) in rhs.iter_mut().zip(&fx) {
                    *r += dt * f;
                }
            }
            chol.solve_in_place(&mut rhs);
            std::mem::swap(&mut x, &mut rhs);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Singular {
                    context: format!("{} step {k} at mu = {:?} produced non-finite state", self.name, mu.values),
                });
            }
            if matches!(self.nonlinearity, Some(Nonlinearity::UpwindConvection { .. })) {
                let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                if let Some(&v) = x.iter().find(|&&v| v < -1e-12 * scale) {
                    return Err(Error::NegativeTransport {
                        mu: mu.values.clone(),
                        step: k,
                        value: v,
                    });
                }
            }
            self.output.matvec_into(&x, outputs.column_mut(k));
            if let Some(s) = states.as_mut() {
                s.column_mut(k).copy_from_slice(&x);
            }
        }
        Ok(Trajectory {
            states: states.unwrap_or_else(|| DenseMatrix::zeros(n, 1)),
            outputs,
            nonlinear,
        })
    }
}
