//! Greedy basis construction on a fixed training set and the two
//! two-stage variants that subsample the training set from the outputs of
//! a coarse reduced model.

mod driver;

use serde::{Deserialize, Serialize};

pub use driver::{pod_greedy_fixed, run_scheme, scheme1, scheme2, GreedyOutcome};

use crate::benchmarks::TrainingSet;
use crate::error::{Error, Result};
use crate::reduction::IndicatorMode;
use crate::selector::{InterpolationSelection, SelectorConfig, SelectorKind};

pub const DEFAULT_MAX_ITERATIONS: usize = 200;
pub const MAX_MODES_PER_ITERATION: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Fixed,
    Scheme1,
    Scheme2,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Fixed => "fixed",
            Scheme::Scheme1 => "scheme1",
            Scheme::Scheme2 => "scheme2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [Scheme::Fixed, Scheme::Scheme1, Scheme::Scheme2]
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub tol: f64,
    /// Stage-1 tolerance of the first subsampling scheme.
    pub tol_coarse: f64,
    pub selector: SelectorKind,
    pub eps_svd: f64,
    pub eps_qr: f64,
    pub oversample: f64,
    /// Iteration cap n_g, shared by both stages.
    pub max_iterations: usize,
    /// Time stride of the output snapshot matrix.
    pub stride: usize,
    pub seed: u64,
    pub indicator: IndicatorMode,
    /// Relative singular value floor when growing the nonlinear basis.
    pub deim_floor: f64,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            tol_coarse: 1.0,
            selector: SelectorKind::Qdeim,
            eps_svd: 1e-6,
            eps_qr: 1e-6,
            oversample: 2.0,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            stride: 1,
            seed: 0,
            indicator: IndicatorMode::Residual,
            deim_floor: 1e-10,
        }
    }
}

impl GreedyConfig {
    pub fn selector_config(&self) -> SelectorConfig {
        SelectorConfig {
            eps_svd: self.eps_svd,
            eps_qr: self.eps_qr,
            oversample: self.oversample,
            seed: self.seed,
        }
    }

    pub fn validate(&self, scheme: Scheme) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} must be positive, got {v}")))
            }
        };
        positive(self.tol, "tol")?;
        positive(self.deim_floor, "deim_floor")?;
        for (v, what) in [(self.eps_svd, "eps_svd"), (self.eps_qr, "eps_qr")] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{what} must lie in (0, 1), got {v}")));
            }
        }
        if scheme == Scheme::Scheme1 && !(self.tol_coarse >= self.tol) {
            return Err(Error::Config(format!(
                "tol_coarse ({}) must not be below tol ({})",
                self.tol_coarse, self.tol
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        if !(self.oversample >= 1.0) {
            return Err(Error::Config(format!("oversample must be at least 1, got {}", self.oversample)));
        }
        Ok(())
    }
}

/// Why an iteration is marked in the trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IterationFlag {
    /// The snapshots added no new direction.
    Deflated,
    /// The largest estimate sat at a fully deflated parameter, so the
    /// runner-up was taken instead.
    ForcedRunnerUp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub stage: u8,
    /// Index of the enriched parameter in the fine training set.
    pub parameter_index: usize,
    pub mu: Vec<f64>,
    /// Estimate that led to choosing this parameter; absent for the seeded
    /// first pick and for the first pick of a stage.
    pub delta: Option<f64>,
    pub r_pod: usize,
    pub r: usize,
    pub r_ei: usize,
    /// Largest estimate over the active training set after enrichment.
    pub max_estimate: f64,
    pub orthogonality_error: f64,
    pub selection_len: Option<usize>,
    pub flags: Vec<IterationFlag>,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    IterationCap,
    /// The same fully deflated parameter won twice in a row.
    Stagnated,
}

#[derive(Clone, Debug)]
pub struct GreedyTrace {
    pub scheme: Scheme,
    pub seed: u64,
    pub records: Vec<IterationRecord>,
    /// Subsampled training set used in stage 2.
    pub subsampled: Option<TrainingSet>,
    /// Fine-set indices returned by the selector.
    pub selection: Option<Vec<usize>>,
    /// Selector result the subsampled set was drawn from.
    pub selector_output: Option<InterpolationSelection>,
    pub termination: Termination,
    pub converged: bool,
    /// The second scheme reached n_g/2 without its stage-switch criterion.
    pub stage_switch_fallback: bool,
    pub final_estimate: f64,
    pub offline_seconds: f64,
}

impl GreedyTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn stage_iterations(&self, stage: u8) -> usize {
        self.records.iter().filter(|r| r.stage == stage).count()
    }

    pub fn selected_parameters(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.parameter_index).collect()
    }

    pub fn max_orthogonality_error(&self) -> f64 {
        self.records.iter().map(|r| r.orthogonality_error).fold(0.0, f64::max)
    }
}

/// `clamp(⌈log₁₀(Δ*/tol)⌉, 1, 5)`.
pub fn adaptive_mode_count(delta_star: f64, tol: f64) -> usize {
    if !(delta_star > 0.0 && tol > 0.0) || !delta_star.is_finite() {
        return if delta_star.is_infinite() { MAX_MODES_PER_ITERATION } else { 1 };
    }
    // the small shift keeps exact powers of ten from rounding up
    let raw = ((delta_star / tol).log10() - 1e-9).ceil();
    (raw.max(1.0) as usize).min(MAX_MODES_PER_ITERATION)
}

/// True when a previous selection exists and has the same length.
pub fn stagnation_check(prev: Option<&InterpolationSelection>, curr: &InterpolationSelection) -> bool {
    prev.is_some_and(|p| p.len() == curr.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn mode_count_examples() {
        assert_eq!(adaptive_mode_count(1e-6, 1e-6), 1);
        assert_eq!(adaptive_mode_count(1e-3, 1e-6), 3);
        assert_eq!(adaptive_mode_count(1e3, 1e-6), 5);
        assert_eq!(adaptive_mode_count(0.5e-6, 1e-6), 1);
        assert_eq!(adaptive_mode_count(1.0 + 1e-6, 1e-6), 5);
        assert_eq!(adaptive_mode_count(2e-5, 1e-6), 2);
    }

    #[test]
    fn stagnation_examples() {
        let sel = |n: usize| InterpolationSelection {
            basis: DenseMatrix::zeros(20, n),
            indices: (0..n).collect(),
            method: SelectorKind::Deim,
        };
        assert!(!stagnation_check(None, &sel(12)));
        assert!(stagnation_check(Some(&sel(12)), &sel(12)));
        assert!(!stagnation_check(Some(&sel(12)), &sel(15)));
    }

    #[test]
    fn config_checks() {
        let mut c = GreedyConfig::default();
        assert!(c.validate(Scheme::Scheme1).is_ok());
        c.tol_coarse = 1e-8;
        assert!(c.validate(Scheme::Scheme1).is_err());
        assert!(c.validate(Scheme::Fixed).is_ok());
        c.eps_svd = 1.5;
        assert!(c.validate(Scheme::Fixed).is_err());
    }
}
