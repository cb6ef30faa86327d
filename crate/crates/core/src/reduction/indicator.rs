use faer::Mat;
use serde::{Deserialize, Serialize};

use super::output::{parameter_error, time_averaged_error};
use super::rom::{rom_solve, ReducedTrajectory, RomOperators};
use crate::benchmarks::{Coefficient, ParameterSample, ParametricFom};
use crate::error::{Error, Result};
use crate::linalg::svd::singular_values;
use crate::linalg::{norm2, BandedCholesky, CsrMatrix, DenseMatrix};

/// How Δ(μ) is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndicatorMode {
    /// `‖C‖₂ · (1/(K+1)) Σ_k ‖ρ^k‖₂`.
    Residual,
    /// Residuals measured in the `E⁻¹` norm and accumulated in time:
    /// `‖C‖_{E⁻¹} · (1/(K+1)) Σ_k Σ_{j≤k} ‖ρ^j‖_{E⁻¹}`. For a linear model
    /// with symmetric positive semi-definite `K(μ)` this bounds the output
    /// error.
    Accumulated,
    /// Full-order solve and the time-averaged output error itself.
    TrueError,
}

impl IndicatorMode {
    pub fn label(&self) -> &'static str {
        match self {
            IndicatorMode::Residual => "residual",
            IndicatorMode::Accumulated => "accumulated",
            IndicatorMode::TrueError => "true-error",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [IndicatorMode::Residual, IndicatorMode::Accumulated, IndicatorMode::TrueError]
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown indicator '{s}'")))
    }
}

#[derive(Clone, Debug)]
pub struct ErrorEstimate {
    pub value: f64,
    /// `‖ρ^k‖` for k = 0..K (the first entry is zero). Empty in true-error
    /// mode.
    pub breakdown: Vec<f64>,
}

/// Stiffness coefficient group. Constant terms are merged into one.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Group {
    Constant,
    Parameter(usize),
}

impl Group {
    fn theta(&self, mu: &ParameterSample) -> f64 {
        match *self {
            Group::Constant => 1.0,
            Group::Parameter(i) => mu.values[i],
        }
    }
}

fn group_terms(fom: &ParametricFom) -> Vec<(Group, CsrMatrix)> {
    let mut groups: Vec<(Group, Vec<(f64, &CsrMatrix)>)> = Vec::new();
    for t in &fom.stiffness {
        let (g, w) = match t.coefficient {
            Coefficient::Constant(c) => (Group::Constant, c),
            Coefficient::Parameter(i) => (Group::Parameter(i), 1.0),
        };
        match groups.iter_mut().find(|(h, _)| *h == g) {
            Some((_, v)) => v.push((w, &t.matrix)),
            None => groups.push((g, vec![(w, &t.matrix)])),
        }
    }
    groups.into_iter().map(|(g, v)| (g, CsrMatrix::linear_combination(&v))).collect()
}

/// Residual-based estimator. The residual of step k is a linear function of
/// `w_k = [z^k − z^{k−1}; z^k; c^{k−1}; 1]`, `ρ^k = W_μ w_k`, where
/// the columns of `W_μ` are combinations of `E V`, `K_i V`, `U` and `B`.
/// A thin QR of those blocks, computed once per basis, turns `‖ρ^k‖` into
/// the norm of a short vector, so the online cost does not depend on `n`.
#[derive(Clone, Debug)]
pub struct ErrorIndicator {
    mode: IndicatorMode,
    r: usize,
    l: usize,
    groups: Vec<Group>,
    /// Triangular factor of the stacked blocks, `m × cols`.
    factor: Option<Mat<f64>>,
    output_norm: f64,
}

impl ErrorIndicator {
    pub fn new(fom: &ParametricFom, rom: &RomOperators, mode: IndicatorMode) -> Result<Self> {
        let r = rom.dim();
        let l = rom.interpolation_size();
        let groups_full = group_terms(fom);
        let groups: Vec<Group> = groups_full.iter().map(|(g, _)| *g).collect();
        if mode == IndicatorMode::TrueError {
            return Ok(Self {
                mode,
                r,
                l,
                groups,
                factor: None,
                output_norm: 0.0,
            });
        }
        if rom.nonlinearity.is_some() && rom.hyper.is_none() {
            return Err(Error::Config(
                "the residual indicator needs a hyper-reduced nonlinearity; use true-error mode".into(),
            ));
        }
        let dual = match mode {
            IndicatorMode::Accumulated => Some(BandedCholesky::factor(&fom.mass)?),
            _ => None,
        };
        let v = rom.basis.matrix().ok_or(Error::EmptyMatrix { rows: fom.dim(), cols: 0 })?;
        let mut blocks: Vec<DenseMatrix> = Vec::new();
        if !rom.steady {
            blocks.push(fom.mass.mul_dense(&v));
        }
        for (_, k) in &groups_full {
            blocks.push(k.mul_dense(&v));
        }
        if let Some(h) = &rom.hyper {
            if !rom.steady {
                blocks.push(h.selection.basis.clone());
            }
        }
        blocks.push(DenseMatrix::new(fom.dim(), 1, fom.input.clone())?);
        let cols: usize = blocks.iter().map(DenseMatrix::cols).sum();
        let n = fom.dim();
        let mut stacked = Mat::<f64>::zeros(n, cols);
        let mut offset = 0;
        for b in &blocks {
            for j in 0..b.cols() {
                let mut col = b.column(j).to_vec();
                if let Some(ch) = &dual {
                    ch.forward_in_place(&mut col);
                }
                for (i, &x) in col.iter().enumerate() {
                    stacked[(i, offset + j)] = x;
                }
            }
            offset += b.cols();
        }
        let factor = stacked.qr().thin_R().to_owned();

        let mut ct = fom.output.to_dense().transpose();
        if let Some(ch) = &dual {
            for j in 0..ct.cols() {
                ch.forward_in_place(ct.column_mut(j));
            }
        }
        let output_norm = singular_values(&ct)?.first().copied().unwrap_or(0.0);
        Ok(Self {
            mode,
            r,
            l,
            groups,
            factor: Some(factor),
            output_norm,
        })
    }

    pub fn mode(&self) -> IndicatorMode {
        self.mode
    }

    /// Solves the ROM at `mu` and estimates its output error.
    pub fn evaluate(&self, fom: &ParametricFom, rom: &RomOperators, mu: &ParameterSample) -> Result<(ErrorEstimate, ReducedTrajectory)> {
        let traj = rom_solve(rom, mu)?;
        let est = self.estimate(fom, rom, &traj, mu)?;
        Ok((est, traj))
    }

    /// Estimate from an existing reduced trajectory.
    pub fn estimate(
        &self,
        fom: &ParametricFom,
        rom: &RomOperators,
        traj: &ReducedTrajectory,
        mu: &ParameterSample,
    ) -> Result<ErrorEstimate> {
        if self.mode == IndicatorMode::TrueError {
            let y = fom.solve_outputs(mu)?;
            return Ok(ErrorEstimate {
                value: time_averaged_error(&y, &traj.outputs),
                breakdown: Vec::new(),
            });
        }
        let norms = self.residual_norms(rom, traj, mu);
        Ok(self.combine(norms))
    }

    fn combine(&self, norms: Vec<f64>) -> ErrorEstimate {
        let nt = norms.len() as f64;
        let value = match self.mode {
            IndicatorMode::Accumulated => {
                let mut acc = 0.0;
                norms
                    .iter()
                    .map(|&x| {
                        acc += x;
                        acc
                    })
                    .sum::<f64>()
                    / nt
            }
            _ => norms.iter().sum::<f64>() / nt,
        } * self.output_norm;
        ErrorEstimate { value, breakdown: norms }
    }

    /// `‖ρ^k‖` for every instant, from the precomputed factor.
    pub fn residual_norms(&self, rom: &RomOperators, traj: &ReducedTrajectory, mu: &ParameterSample) -> Vec<f64> {
        let rf = self.factor.as_ref().expect("residual modes keep a factor");
        let (r, l) = (self.r, self.l);
        let m = rf.nrows();
        let u = rom.input_signal;
        if rom.steady {
            let mut reff = Mat::<f64>::zeros(m, r + 1);
            for (g_idx, g) in self.groups.iter().enumerate() {
                let th = g.theta(mu);
                for j in 0..r {
                    for i in 0..m {
                        reff[(i, j)] += th * rf[(i, g_idx * r + j)];
                    }
                }
            }
            let b = self.groups.len() * r;
            for i in 0..m {
                reff[(i, r)] = -u * rf[(i, b)];
            }
            let mut w = Mat::<f64>::zeros(r + 1, 1);
            for i in 0..r {
                w[(i, 0)] = traj.coords[i];
            }
            w[(r, 0)] = 1.0;
            let rho = &reff * &w;
            return vec![(0..m).map(|i| rho[(i, 0)].powi(2)).sum::<f64>().sqrt()];
        }

        let dt = rom.time.dt;
        let p = self.groups.len();
        let ncols = 2 * r + l + 1;
        let mut reff = Mat::<f64>::zeros(m, ncols);
        for j in 0..r {
            for i in 0..m {
                reff[(i, j)] = rf[(i, j)];
            }
        }
        for (g_idx, g) in self.groups.iter().enumerate() {
            let th = dt * g.theta(mu);
            let base = (1 + g_idx) * r;
            for j in 0..r {
                for i in 0..m {
                    reff[(i, r + j)] += th * rf[(i, base + j)];
                }
            }
        }
        let u_base = (1 + p) * r;
        for j in 0..l {
            for i in 0..m {
                reff[(i, 2 * r + j)] = -dt * rf[(i, u_base + j)];
            }
        }
        for i in 0..m {
            reff[(i, 2 * r + l)] = -dt * u * rf[(i, u_base + l)];
        }

        let steps = traj.instants() - 1;
        let coeffs = traj.deim_coefficients.as_deref();
        let w = Mat::<f64>::from_fn(ncols, steps, |i, k| {
            if i < r {
                traj.z(k + 1)[i] - traj.z(k)[i]
            } else if i < 2 * r {
                traj.z(k + 1)[i - r]
            } else if i < 2 * r + l {
                coeffs.map_or(0.0, |c| c[k * l + i - 2 * r])
            } else {
                1.0
            }
        });
        let rho = &reff * &w;
        let mut norms = Vec::with_capacity(steps + 1);
        norms.push(0.0);
        for k in 0..steps {
            norms.push(rho.col(k).iter().map(|x| x * x).sum::<f64>().sqrt());
        }
        norms
    }
}

/// Residual norms assembled in full dimension, for validation.
pub fn direct_residual_norms(
    fom: &ParametricFom,
    rom: &RomOperators,
    traj: &ReducedTrajectory,
    mu: &ParameterSample,
    dual: bool,
) -> Result<Vec<f64>> {
    let chol = if dual { Some(BandedCholesky::factor(&fom.mass)?) } else { None };
    let finish = |mut rho: Vec<f64>| {
        if let Some(ch) = &chol {
            ch.forward_in_place(&mut rho);
        }
        norm2(&rho)
    };
    let k = fom.stiffness_at(mu);
    let u = fom.input_signal;
    if fom.steady {
        let x = rom.basis.expand(&traj.coords);
        let rho: Vec<f64> = k.matvec(&x).iter().zip(&fom.input).map(|(a, b)| a - u * b).collect();
        return Ok(vec![finish(rho)]);
    }
    let dt = fom.time.dt;
    let l = rom.interpolation_size();
    let mut norms = vec![0.0];
    for step in 1..traj.instants() {
        let x = rom.basis.expand(traj.z(step));
        let xp = rom.basis.expand(traj.z(step - 1));
        let mx = fom.mass.matvec(&x);
        let mxp = fom.mass.matvec(&xp);
        let kx = k.matvec(&x);
        let f = match (&rom.hyper, &fom.nonlinearity) {
            (Some(h), Some(_)) => {
                let c = &traj.deim_coefficients.as_ref().expect("hyper-reduced solve stores coefficients")[(step - 1) * l..step * l];
                h.selection.basis.matvec(c)
            }
            (None, Some(nl)) => nl.eval(&xp),
            _ => vec![0.0; fom.dim()],
        };
        let rho: Vec<f64> = (0..fom.dim())
            .map(|i| mx[i] - mxp[i] + dt * kx[i] - dt * f[i] - dt * u * fom.input[i])
            .collect();
        norms.push(finish(rho));
    }
    Ok(norms)
}

/// Convenience wrapper building a one-off indicator.
pub fn error_indicator(fom: &ParametricFom, rom: &RomOperators, mu: &ParameterSample, mode: IndicatorMode) -> Result<ErrorEstimate> {
    if mode == IndicatorMode::TrueError {
        return Ok(ErrorEstimate {
            value: parameter_error(fom, Some(rom), mu)?,
            breakdown: Vec::new(),
        });
    }
    Ok(ErrorIndicator::new(fom, rom, mode)?.evaluate(fom, rom, mu)?.0)
}
