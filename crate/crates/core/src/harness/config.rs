use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::benchmarks::burgers::{self, build_burgers};
use crate::benchmarks::thermal::{self, build_thermal_with, ThermalGeometry};
use crate::benchmarks::{GridSpacing, ParameterDomain, ParametricFom, TrainingSet};
use crate::error::{Error, Result};
use crate::greedy::{GreedyConfig, Scheme, DEFAULT_MAX_ITERATIONS};
use crate::reduction::IndicatorMode;
use crate::selector::SelectorKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    Burgers,
    Thermal,
    Toy,
}

impl Benchmark {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "burgers" => Ok(Benchmark::Burgers),
            "thermal" => Ok(Benchmark::Thermal),
            "toy" => Ok(Benchmark::Toy),
            _ => Err(Error::Config(format!("unknown benchmark '{s}'"))),
        }
    }
}

/// Greedy settings; unset values take the benchmark default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreedySection {
    pub tol: Option<f64>,
    pub tol_coarse: Option<f64>,
    pub eps_svd: Option<f64>,
    pub eps_qr: Option<f64>,
    pub oversample: Option<f64>,
    pub max_iterations: Option<usize>,
    pub stride: Option<usize>,
    pub indicator: Option<IndicatorMode>,
    pub deim_floor: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    /// Grid points per parameter dimension.
    pub counts: Option<Vec<usize>>,
    pub spacing: Option<GridSpacing>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestSection {
    pub size: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// Burgers grid size.
    pub n: Option<usize>,
    /// Thermal mesh density (cells per unit length).
    pub mesh_density: Option<usize>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: Benchmark,
    pub scheme: Scheme,
    pub selector: SelectorKind,
    pub seed: u64,
    pub repeats: usize,
    pub out: PathBuf,
    /// Also run the fixed-set greedy for the speedup column.
    pub with_baseline: bool,
    /// Report file whose `fixed` row provides the baseline time.
    pub baseline_report: Option<PathBuf>,
    pub greedy: GreedySection,
    pub training: TrainingSection,
    pub test: TestSection,
    pub model: ModelSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            benchmark: Benchmark::Burgers,
            scheme: Scheme::Scheme1,
            selector: SelectorKind::Qdeim,
            seed: 0,
            repeats: 1,
            out: PathBuf::from("results"),
            with_baseline: false,
            baseline_report: None,
            greedy: GreedySection::default(),
            training: TrainingSection::default(),
            test: TestSection::default(),
            model: ModelSection::default(),
        }
    }
}

/// Everything a run needs, with benchmark defaults filled in.
#[derive(Clone, Debug)]
pub struct ResolvedExperiment {
    pub fom: ParametricFom,
    pub train: TrainingSet,
    pub test: TrainingSet,
    pub greedy: GreedyConfig,
}

struct Defaults {
    tol: f64,
    eps: f64,
    stride: usize,
    indicator: IndicatorMode,
    counts: Vec<usize>,
    test_size: usize,
}

fn defaults(b: Benchmark) -> Defaults {
    match b {
        Benchmark::Burgers => Defaults {
            tol: 1e-6,
            eps: 1e-6,
            stride: 25,
            indicator: IndicatorMode::Residual,
            counts: vec![100],
            test_size: 300,
        },
        Benchmark::Thermal => Defaults {
            tol: 1e-3,
            eps: 1e-10,
            stride: 1,
            indicator: IndicatorMode::Accumulated,
            counts: vec![6, 6, 6],
            test_size: 100,
        },
        Benchmark::Toy => Defaults {
            tol: 1e-6,
            eps: 1e-10,
            stride: 1,
            indicator: IndicatorMode::Residual,
            counts: vec![40, 40],
            test_size: 0,
        },
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn greedy_config(&self) -> Result<GreedyConfig> {
        let d = defaults(self.benchmark);
        let g = &self.greedy;
        let cfg = GreedyConfig {
            tol: g.tol.unwrap_or(d.tol),
            tol_coarse: g.tol_coarse.unwrap_or(1.0),
            selector: self.selector,
            eps_svd: g.eps_svd.unwrap_or(d.eps),
            eps_qr: g.eps_qr.unwrap_or(d.eps),
            oversample: g.oversample.unwrap_or(2.0),
            max_iterations: g.max_iterations.unwrap_or(DEFAULT_MAX_ITERATIONS),
            stride: g.stride.unwrap_or(d.stride),
            seed: self.seed,
            indicator: g.indicator.unwrap_or(d.indicator),
            deim_floor: g.deim_floor.unwrap_or(1e-10),
        };
        cfg.validate(self.scheme)?;
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        Ok(cfg)
    }

    fn domain(&self, default: ParameterDomain) -> Result<ParameterDomain> {
        let t = &self.training;
        let lower = t.lower.clone().unwrap_or_else(|| default.lower.clone());
        let upper = t.upper.clone().unwrap_or_else(|| default.upper.clone());
        if lower.len() != default.dim() || upper.len() != default.dim() {
            return Err(Error::Config(format!("domain bounds must have {} entries", default.dim())));
        }
        ParameterDomain::new(lower, upper)
    }

    fn build_model(&self) -> Result<ParametricFom> {
        let m = &self.model;
        let mut fom = match self.benchmark {
            Benchmark::Burgers => build_burgers(
                m.n.unwrap_or(burgers::DEFAULT_N),
                m.dt.unwrap_or(burgers::DEFAULT_DT),
                m.horizon.unwrap_or(burgers::DEFAULT_HORIZON),
            )?,
            Benchmark::Thermal => build_thermal_with(
                m.mesh_density.unwrap_or(thermal::DEFAULT_MESH_DENSITY),
                &ThermalGeometry::default(),
                m.dt.unwrap_or(thermal::DEFAULT_DT),
                m.horizon.unwrap_or(thermal::DEFAULT_HORIZON),
            )?,
            Benchmark::Toy => return Err(Error::Config("the toy benchmark has no dynamical model".into())),
        };
        fom.domain = self.domain(fom.domain.clone())?;
        Ok(fom)
    }

    /// Builds the model, the training grid and the disjoint random test set.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        let greedy = self.greedy_config()?;
        let fom = self.build_model()?;
        let d = defaults(self.benchmark);
        let counts = self.training.counts.clone().unwrap_or(d.counts);
        if counts.len() != fom.parameter_dim() {
            return Err(Error::Config(format!(
                "training counts must have {} entries, got {}",
                fom.parameter_dim(),
                counts.len()
            )));
        }
        let train = TrainingSet::grid(&fom.domain, &counts, self.training.spacing.unwrap_or_default())?;
        let test = TrainingSet::random(
            &fom.domain,
            self.test.size.unwrap_or(d.test_size),
            self.test.seed.unwrap_or(self.seed.wrapping_add(1)),
            Some(&train),
        )?;
        Ok(ResolvedExperiment { fom, train, test, greedy })
    }

    /// Tolerance used by the toy DEIM runs.
    pub fn toy_eps_svd(&self) -> f64 {
        self.greedy.eps_svd.unwrap_or(defaults(Benchmark::Toy).eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_defaults() {
        let text = r#"
benchmark = "thermal"
scheme = "scheme2"
selector = "gappy-eig"
seed = 3

[greedy]
tol = 2e-3
"#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        let g = cfg.greedy_config().unwrap();
        assert_eq!(g.tol, 2e-3);
        assert_eq!(g.eps_svd, 1e-10);
        assert_eq!(g.indicator, IndicatorMode::Accumulated);
        assert_eq!(g.stride, 1);
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("benchmark = \"burgers\"\nfoo = 1\n").is_err());
        assert!(ExperimentConfig::from_toml_str("[greedy]\ntoll = 1\n").is_err());
    }
}
