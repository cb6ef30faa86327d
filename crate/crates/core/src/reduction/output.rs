use rayon::prelude::*;

use super::rom::{rom_solve, RomOperators};
use crate::benchmarks::{ParameterSample, ParametricFom, TrainingSet};
use crate::error::{Error, Result};
use crate::linalg::{norm2, DenseMatrix};

/// Where output snapshots come from.
#[derive(Clone, Copy, Debug)]
pub enum OutputSolver<'a> {
    Full,
    Reduced(&'a RomOperators),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputSource {
    True,
    Approximate,
}

/// One row per training sample; columns run over the kept time instants,
/// with the output components of each instant adjacent.
#[derive(Clone, Debug)]
pub struct OutputSnapshotMatrix {
    pub matrix: DenseMatrix,
    pub source: OutputSource,
    pub stride: usize,
}

/// Flattens a `q × N_t` output trajectory into a row, keeping instants
/// `0, s, 2s, …`.
pub fn output_row(outputs: &DenseMatrix, stride: usize) -> Vec<f64> {
    (0..outputs.cols()).step_by(stride.max(1)).flat_map(|k| outputs.column(k).iter().copied()).collect()
}

pub(crate) fn annotate<T>(index: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::AtParameter {
        index,
        source: Box::new(e),
    })
}

fn outputs_of(fom: &ParametricFom, solver: OutputSolver<'_>, mu: &ParameterSample) -> Result<DenseMatrix> {
    match solver {
        OutputSolver::Full => fom.solve_outputs(mu),
        OutputSolver::Reduced(rom) => Ok(rom_solve(rom, mu)?.outputs),
    }
}

pub fn assemble_output_matrix(
    fom: &ParametricFom,
    solver: OutputSolver<'_>,
    train: &TrainingSet,
    stride: usize,
) -> Result<OutputSnapshotMatrix> {
    if stride == 0 {
        return Err(Error::Config("output stride must be at least 1".into()));
    }
    let rows: Vec<Vec<f64>> = train
        .samples()
        .par_iter()
        .enumerate()
        .map(|(i, mu)| annotate(i, outputs_of(fom, solver, mu).map(|y| output_row(&y, stride))))
        .collect::<Result<_>>()?;
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    Ok(OutputSnapshotMatrix {
        matrix: DenseMatrix::from_rows(&refs)?,
        source: match solver {
            OutputSolver::Full => OutputSource::True,
            OutputSolver::Reduced(_) => OutputSource::Approximate,
        },
        stride,
    })
}

/// `(1/(K+1)) Σ_k ‖y^k − ỹ^k‖₂`.
pub fn time_averaged_error(y: &DenseMatrix, y_approx: &DenseMatrix) -> f64 {
    let nt = y.cols();
    let total: f64 = (0..nt)
        .map(|k| {
            let d: Vec<f64> = y.column(k).iter().zip(y_approx.column(k)).map(|(a, b)| a - b).collect();
            norm2(&d)
        })
        .sum();
    total / nt as f64
}

/// Time-averaged output error at every test parameter.
#[derive(Clone, Debug)]
pub struct TrueErrorReport {
    pub per_parameter: Vec<f64>,
    pub max: f64,
    pub argmax: usize,
}

/// Compares FOM outputs with the ROM (or with zero when `rom` is `None`,
/// the empty-basis case) over `test`.
pub fn true_output_error(fom: &ParametricFom, rom: Option<&RomOperators>, test: &TrainingSet) -> Result<TrueErrorReport> {
    let per_parameter: Vec<f64> = test
        .samples()
        .par_iter()
        .enumerate()
        .map(|(i, mu)| annotate(i, parameter_error(fom, rom, mu)))
        .collect::<Result<_>>()?;
    let mut argmax = 0;
    for (i, &e) in per_parameter.iter().enumerate() {
        if e > per_parameter[argmax] {
            argmax = i;
        }
    }
    Ok(TrueErrorReport {
        max: per_parameter.get(argmax).copied().unwrap_or(0.0),
        argmax,
        per_parameter,
    })
}

pub fn parameter_error(fom: &ParametricFom, rom: Option<&RomOperators>, mu: &ParameterSample) -> Result<f64> {
    let y = fom.solve_outputs(mu)?;
    let approx = match rom {
        Some(rom) => rom_solve(rom, mu)?.outputs,
        None => DenseMatrix::zeros(y.rows(), y.cols()),
    };
    Ok(time_averaged_error(&y, &approx))
}
