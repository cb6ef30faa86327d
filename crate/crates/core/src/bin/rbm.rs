use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use rbm_core::greedy::Scheme;
use rbm_core::harness::{configure_threads, run_experiment, Benchmark, ExperimentConfig};
use rbm_core::reduction::IndicatorMode;
use rbm_core::selector::SelectorKind;
use rbm_core::Result;

/// Greedy reduced basis construction with output-driven training set
/// subsampling. Flags override values from `--config`.
#[derive(Parser, Debug)]
#[command(name = "rbm", version, allow_negative_numbers = true)]
struct Cli {
    /// burgers, thermal or toy
    benchmark: String,
    /// fixed, scheme1 or scheme2
    #[arg(long)]
    scheme: Option<String>,
    /// qr, deim, qdeim, kdeim, gappy-eig or gappy-clust
    #[arg(long)]
    selector: Option<String>,
    #[arg(long)]
    eps_svd: Option<f64>,
    #[arg(long)]
    eps_qr: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    tol_coarse: Option<f64>,
    #[arg(long)]
    oversample: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// residual, accumulated or true-error
    #[arg(long)]
    indicator: Option<String>,
    /// Also run the fixed-set greedy and report the speedup against it.
    #[arg(long)]
    with_baseline: bool,
    /// Report file holding a `fixed` row to compute the speedup against.
    #[arg(long)]
    baseline_report: Option<PathBuf>,
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.benchmark = Benchmark::parse(&cli.benchmark)?;
    if let Some(s) = &cli.scheme {
        cfg.scheme = Scheme::parse(s)?;
    }
    if let Some(s) = &cli.selector {
        cfg.selector = SelectorKind::parse(s)?;
    }
    if let Some(s) = &cli.indicator {
        cfg.greedy.indicator = Some(IndicatorMode::parse(s)?);
    }
    let g = &mut cfg.greedy;
    g.eps_svd = cli.eps_svd.or(g.eps_svd);
    g.eps_qr = cli.eps_qr.or(g.eps_qr);
    g.tol = cli.tol.or(g.tol);
    g.tol_coarse = cli.tol_coarse.or(g.tol_coarse);
    g.oversample = cli.oversample.or(g.oversample);
    cfg.seed = cli.seed.unwrap_or(cfg.seed);
    cfg.repeats = cli.repeats.unwrap_or(cfg.repeats);
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.with_baseline |= cli.with_baseline;
    if cli.baseline_report.is_some() {
        cfg.baseline_report = cli.baseline_report.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors share the generic error code; 2 means non-converged
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match build_config(&cli).and_then(|c| configure_threads().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match run_experiment(&cfg) {
        Ok(summary) => {
            for r in &summary.rows {
                println!(
                    "{}: n_train={} eps_t_max={:.3e} r_pod={} r_ei={} iterations={} offline_s={:.3}{}",
                    r.method,
                    r.n_train,
                    r.eps_t_max,
                    r.r_pod,
                    r.r_ei,
                    r.iterations,
                    r.offline_s,
                    r.speedup.map(|s| format!(" speedup={s:.2}")).unwrap_or_default()
                );
            }
            println!("artifacts written to {}", summary.out.display());
            if summary.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
