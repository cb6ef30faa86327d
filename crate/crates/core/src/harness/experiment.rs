use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Benchmark, ExperimentConfig, ResolvedExperiment};
use super::matfile::{write_atomic, write_matrix};
use super::report::{emit_report, read_report, ResultRow};
use crate::benchmarks::toy::{toy_parameter_points, toy_snapshots, toy_space_points};
use crate::benchmarks::TrainingSet;
use crate::error::{Error, Result};
use crate::greedy::{run_scheme, GreedyOutcome, GreedyTrace, IterationFlag, Scheme};
use crate::linalg::svd;
use crate::reduction::true_output_error;
use crate::selector::{deim_from_svd, SelectorKind};

pub const TRACE_HEADER: [&str; 12] = [
    "iteration",
    "stage",
    "parameter_index",
    "mu",
    "delta",
    "r_pod",
    "r",
    "r_ei",
    "max_estimate",
    "orthogonality_error",
    "selection_len",
    "flags",
];

/// What a finished run reports back to the caller.
#[derive(Clone, Debug)]
pub struct ExperimentSummary {
    pub rows: Vec<ResultRow>,
    pub converged: bool,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    benchmark: Benchmark,
    scheme: &'a str,
    selector: &'a str,
    seed: u64,
    test_seed: u64,
    test_size: usize,
    termination: crate::greedy::Termination,
    converged: bool,
    stage_switch_fallback: bool,
    final_estimate: f64,
    test_error_max: f64,
    test_error_argmax: usize,
    offline_seconds: Vec<f64>,
}

#[derive(Serialize)]
struct ToySummary {
    eps_svd: f64,
    rank: usize,
    space_points: usize,
    parameter_points: usize,
}

/// Runs one experiment and writes its artifacts under `cfg.out`. On failure
/// an `error.json` record is written there before the error is returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let result = match cfg.benchmark {
        Benchmark::Toy => run_toy(cfg),
        _ => run_dynamic(cfg),
    };
    if let Err(e) = &result {
        let record = ErrorRecord {
            kind: e.kind(),
            message: e.to_string(),
        };
        // best effort: the original error is what the caller needs
        let _ = write_json(&cfg.out.join("error.json"), &record);
    }
    result
}

fn run_dynamic(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let ResolvedExperiment { fom, train, test, greedy } = cfg.resolve()?;
    if test.is_empty() {
        return Err(Error::Config("test set must not be empty".into()));
    }
    let out = &cfg.out;
    std::fs::create_dir_all(out)?;

    let mut rows = Vec::new();
    let mut baseline = None;
    if cfg.with_baseline && cfg.scheme != Scheme::Fixed {
        let (outcome, times) = repeated(cfg.repeats, || run_scheme(Scheme::Fixed, &fom, &train, &greedy))?;
        let err = true_output_error(&fom, Some(&outcome.rom), &test)?;
        let t = median(&times);
        baseline = Some(t);
        write_trace(&out.join("trace_fixed.csv"), &outcome.trace)?;
        rows.push(result_row(&outcome, "fixed".into(), train.len(), err.max, t, Some(1.0)));
    } else if let Some(path) = &cfg.baseline_report {
        baseline = Some(baseline_from_report(path)?);
    }

    let (outcome, times) = repeated(cfg.repeats, || run_scheme(cfg.scheme, &fom, &train, &greedy))?;
    let t = median(&times);
    let report = true_output_error(&fom, Some(&outcome.rom), &test)?;
    let n_train = match &outcome.trace.subsampled {
        Some(s) => s.len(),
        None => train.len(),
    };
    let speedup = if cfg.scheme == Scheme::Fixed {
        Some(baseline.map_or(1.0, |b| b / t))
    } else {
        baseline.map(|b| b / t)
    };
    rows.push(result_row(&outcome, method_label(cfg.scheme, cfg.selector), n_train, report.max, t, speedup));

    write_trace(&out.join("trace.csv"), &outcome.trace)?;
    write_selection(&out.join("selection.csv"), &outcome.trace, &train)?;
    if let Some(v) = outcome.basis.matrix() {
        write_matrix(&out.join("basis.rbm"), &v)?;
    }
    if let Some(u) = outcome.nonlinear_basis.matrix() {
        write_matrix(&out.join("nonlinear_basis.rbm"), &u)?;
    }
    write_parameter_csv(&out.join("test_errors.csv"), &test, Some(&report.per_parameter))?;
    let test_seed = cfg.test.seed.unwrap_or(cfg.seed.wrapping_add(1));
    let tr = &outcome.trace;
    write_json(
        &out.join("summary.json"),
        &RunSummary {
            benchmark: cfg.benchmark,
            scheme: cfg.scheme.label(),
            selector: cfg.selector.label(),
            seed: cfg.seed,
            test_seed,
            test_size: test.len(),
            termination: tr.termination,
            converged: tr.converged,
            stage_switch_fallback: tr.stage_switch_fallback,
            final_estimate: tr.final_estimate,
            test_error_max: report.max,
            test_error_argmax: report.argmax,
            offline_seconds: times,
        },
    )?;
    write_atomic(&out.join("config.toml"), cfg.to_toml_string()?.as_bytes())?;
    emit_report(&rows, &out.join("report.csv"))?;
    Ok(ExperimentSummary {
        rows,
        converged: outcome.trace.converged,
        out: out.clone(),
    })
}

/// DEIM on the toy snapshots and on their transpose; writes the selected
/// spatial and parameter points.
fn run_toy(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let eps = cfg.toy_eps_svd();
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("eps_svd must lie in (0, 1), got {eps}")));
    }
    let out = &cfg.out;
    std::fs::create_dir_all(out)?;
    let snaps = toy_snapshots();
    let s = svd(&snaps.matrix)?;
    let space = deim_from_svd(&s, eps, false)?;
    let params = deim_from_svd(&s, eps, true)?;

    let xs = toy_space_points();
    let space_rows = space
        .indices
        .iter()
        .enumerate()
        .map(|(k, &i)| vec![k.to_string(), i.to_string(), format_float(xs[i].0), format_float(xs[i].1)])
        .collect();
    write_csv(&out.join("toy_space_points.csv"), &["order", "index", "x1", "x2"], space_rows)?;
    let mus = toy_parameter_points();
    let param_rows = params
        .indices
        .iter()
        .enumerate()
        .map(|(k, &i)| vec![k.to_string(), i.to_string(), format_float(mus[i].values[0]), format_float(mus[i].values[1])])
        .collect();
    write_csv(&out.join("toy_parameter_points.csv"), &["order", "index", "mu1", "mu2"], param_rows)?;
    let sv_rows = s
        .singular_values
        .iter()
        .enumerate()
        .map(|(k, v)| vec![k.to_string(), format_float(*v)])
        .collect();
    write_csv(&out.join("toy_singular_values.csv"), &["k", "sigma"], sv_rows)?;
    write_json(
        &out.join("summary.json"),
        &ToySummary {
            eps_svd: eps,
            rank: space.rank(),
            space_points: space.len(),
            parameter_points: params.len(),
        },
    )?;
    emit_report(&[], &out.join("report.csv"))?;
    Ok(ExperimentSummary {
        rows: Vec::new(),
        converged: true,
        out: out.clone(),
    })
}

/// Runs `f` `repeats` times and keeps the first outcome; the runs are
/// deterministic so only their offline times differ.
fn repeated(repeats: usize, mut f: impl FnMut() -> Result<GreedyOutcome>) -> Result<(GreedyOutcome, Vec<f64>)> {
    let first = f()?;
    let mut times = vec![first.trace.offline_seconds];
    for _ in 1..repeats {
        times.push(f()?.trace.offline_seconds);
    }
    Ok((first, times))
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `fixed` for the baseline, `<scheme>-<selector>` otherwise.
pub fn method_label(scheme: Scheme, selector: SelectorKind) -> String {
    match scheme {
        Scheme::Fixed => "fixed".to_string(),
        s => format!("{}-{}", s.label(), selector.label()),
    }
}

fn result_row(o: &GreedyOutcome, method: String, n_train: usize, eps_t_max: f64, offline_s: f64, speedup: Option<f64>) -> ResultRow {
    ResultRow {
        method,
        n_train,
        eps_t_max,
        r_pod: o.basis.dim(),
        r_ei: o.nonlinear_basis.dim(),
        iterations: o.trace.iterations(),
        offline_s,
        speedup,
    }
}

fn baseline_from_report(path: &Path) -> Result<f64> {
    read_report(path)?
        .into_iter()
        .find(|r| r.method == "fixed")
        .map(|r| r.offline_s)
        .ok_or_else(|| Error::Config(format!("no 'fixed' row in {}", path.display())))
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e6)`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e6).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn join_mu(values: &[f64]) -> String {
    values.iter().map(|&v| format_float(v)).collect::<Vec<_>>().join(";")
}

fn flag_label(f: IterationFlag) -> &'static str {
    match f {
        IterationFlag::Deflated => "deflated",
        IterationFlag::ForcedRunnerUp => "forced-runner-up",
    }
}

pub fn write_trace(path: &Path, trace: &GreedyTrace) -> Result<()> {
    let mut header: Vec<&str> = TRACE_HEADER.to_vec();
    header.push("seconds");
    let rows = trace
        .records
        .iter()
        .map(|r| {
            vec![
                r.iteration.to_string(),
                r.stage.to_string(),
                r.parameter_index.to_string(),
                join_mu(&r.mu),
                r.delta.map(format_float).unwrap_or_default(),
                r.r_pod.to_string(),
                r.r.to_string(),
                r.r_ei.to_string(),
                format_float(r.max_estimate),
                format_float(r.orthogonality_error),
                r.selection_len.map(|d| d.to_string()).unwrap_or_default(),
                r.flags.iter().map(|f| flag_label(*f)).collect::<Vec<_>>().join(";"),
                r.seconds.to_string(),
            ]
        })
        .collect();
    write_csv(path, &header, rows)
}

/// Fine-set indices of the subsampled training set, in selection order.
pub fn write_selection(path: &Path, trace: &GreedyTrace, train: &TrainingSet) -> Result<()> {
    let rows = trace
        .selection
        .iter()
        .flatten()
        .enumerate()
        .map(|(k, &i)| vec![k.to_string(), i.to_string(), join_mu(&train.get(i).values)])
        .collect();
    write_csv(path, &["order", "index", "mu"], rows)
}

fn write_parameter_csv(path: &Path, set: &TrainingSet, errors: Option<&[f64]>) -> Result<()> {
    let rows = set
        .samples()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut row = vec![i.to_string(), join_mu(&s.values)];
            if let Some(e) = errors {
                row.push(format_float(e[i]));
            }
            row
        })
        .collect();
    let header: &[&str] = if errors.is_some() { &["index", "mu", "error"] } else { &["index", "mu"] };
    write_csv(path, header, rows)
}

pub fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    write_atomic(path, text.as_bytes())
}
