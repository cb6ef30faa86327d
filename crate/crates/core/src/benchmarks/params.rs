use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSample {
    pub values: Vec<f64>,
}

impl ParameterSample {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

impl From<Vec<f64>> for ParameterSample {
    fn from(values: Vec<f64>) -> Self {
        Self { values }
    }
}

/// Axis-aligned box of admissible parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ParameterDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Config(format!(
                "domain bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
            return Err(Error::Config(format!("empty domain box {lower:?}..{upper:?}")));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, mu: &ParameterSample) -> bool {
        // a relative slack absorbs rounding in grid construction
        mu.values.len() == self.dim()
            && mu.values.iter().enumerate().all(|(i, &v)| {
                let slack = 1e-12 * self.lower[i].abs().max(self.upper[i].abs()).max(1e-300);
                v >= self.lower[i] - slack && v <= self.upper[i] + slack
            })
    }

    pub fn check(&self, mu: &ParameterSample) -> Result<()> {
        if self.contains(mu) {
            Ok(())
        } else {
            Err(Error::ParameterOutOfDomain {
                values: mu.values.clone(),
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Fine,
    Subsampled,
    Test,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridSpacing {
    #[default]
    Linear,
    Log,
}

/// Ordered, duplicate-free list of parameter samples. The position of a
/// sample in the list is its identity for the selectors.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    samples: Vec<ParameterSample>,
    provenance: Provenance,
}

impl TrainingSet {
    pub fn new(samples: Vec<ParameterSample>, provenance: Provenance) -> Result<Self> {
        if let Some(dim) = samples.first().map(|s| s.dim()) {
            if samples.iter().any(|s| s.dim() != dim) {
                return Err(Error::Config("samples of mixed dimension".into()));
            }
        }
        let mut keys: Vec<(Vec<u64>, usize)> = samples
            .iter()
            .enumerate()
            .map(|(i, s)| (s.values.iter().map(|v| v.to_bits()).collect(), i))
            .collect();
        keys.sort();
        for w in keys.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateSample { index: w[1].1.max(w[0].1) });
            }
        }
        Ok(Self { samples, provenance })
    }

    pub fn in_domain(samples: Vec<ParameterSample>, provenance: Provenance, domain: &ParameterDomain) -> Result<Self> {
        for s in &samples {
            domain.check(s)?;
        }
        Self::new(samples, provenance)
    }

    /// Tensor grid with `counts[d]` points along dimension `d`; the first
    /// dimension varies fastest.
    pub fn grid(domain: &ParameterDomain, counts: &[usize], spacing: GridSpacing) -> Result<Self> {
        if counts.len() != domain.dim() || counts.contains(&0) {
            return Err(Error::Config(format!(
                "grid counts {counts:?} do not match a {}-dimensional domain",
                domain.dim()
            )));
        }
        let axes: Vec<Vec<f64>> = (0..domain.dim())
            .map(|d| axis_points(domain.lower[d], domain.upper[d], counts[d], spacing))
            .collect::<Result<_>>()?;
        let total: usize = counts.iter().product();
        let mut samples = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            let values = axes
                .iter()
                .map(|axis| {
                    let v = axis[rest % axis.len()];
                    rest /= axis.len();
                    v
                })
                .collect();
            samples.push(ParameterSample::new(values));
        }
        Self::in_domain(samples, Provenance::Fine, domain)
    }

    /// `count` samples drawn uniformly from the box, redrawing any sample
    /// that coincides with a member of `exclude`.
    pub fn random(domain: &ParameterDomain, count: usize, seed: u64, exclude: Option<&TrainingSet>) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut samples: Vec<ParameterSample> = Vec::with_capacity(count);
        let clash = |s: &ParameterSample, acc: &[ParameterSample]| {
            exclude.is_some_and(|e| e.samples.contains(s)) || acc.contains(s)
        };
        while samples.len() < count {
            let s = ParameterSample::new(
                (0..domain.dim())
                    .map(|d| {
                        if domain.upper[d] > domain.lower[d] {
                            rng.gen_range(domain.lower[d]..=domain.upper[d])
                        } else {
                            domain.lower[d]
                        }
                    })
                    .collect(),
            );
            if !clash(&s, &samples) {
                samples.push(s);
            }
        }
        Self::in_domain(samples, Provenance::Test, domain)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[ParameterSample] {
        &self.samples
    }

    pub fn get(&self, i: usize) -> &ParameterSample {
        &self.samples[i]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn position(&self, mu: &ParameterSample) -> Option<usize> {
        self.samples.iter().position(|s| s == mu)
    }

    /// Members at `indices`, kept in the order they have in this set.
    pub fn subset(&self, indices: &[usize], provenance: Provenance) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.len(),
            });
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        Self::new(sorted.iter().map(|&i| self.samples[i].clone()).collect(), provenance)
    }
}

fn axis_points(lo: f64, hi: f64, count: usize, spacing: GridSpacing) -> Result<Vec<f64>> {
    if count == 1 {
        return Ok(vec![lo]);
    }
    let t = |i: usize| i as f64 / (count - 1) as f64;
    match spacing {
        GridSpacing::Linear => Ok((0..count)
            .map(|i| if i + 1 == count { hi } else { lo + (hi - lo) * t(i) })
            .collect()),
        GridSpacing::Log => {
            if lo <= 0.0 {
                return Err(Error::Config("log spacing needs a positive lower bound".into()));
            }
            let (a, b) = (lo.ln(), hi.ln());
            Ok((0..count)
                .map(|i| match i {
                    0 => lo,
                    _ if i + 1 == count => hi,
                    _ => (a + (b - a) * t(i)).exp(),
                })
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_first_dimension_fastest() {
        let d = ParameterDomain::new(vec![0.0, 10.0], vec![1.0, 20.0]).unwrap();
        let g = TrainingSet::grid(&d, &[2, 3], GridSpacing::Linear).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.get(1).values, vec![1.0, 10.0]);
        assert_eq!(g.get(2).values, vec![0.0, 15.0]);
        assert_eq!(g.get(5).values, vec![1.0, 20.0]);
    }

    #[test]
    fn duplicates_rejected() {
        let s = vec![ParameterSample::new(vec![1.0]), ParameterSample::new(vec![1.0])];
        assert!(matches!(TrainingSet::new(s, Provenance::Fine), Err(Error::DuplicateSample { index: 1 })));
    }

    #[test]
    fn random_set_avoids_training_points() {
        let d = ParameterDomain::new(vec![0.0], vec![1.0]).unwrap();
        let train = TrainingSet::grid(&d, &[11], GridSpacing::Linear).unwrap();
        let test = TrainingSet::random(&d, 50, 3, Some(&train)).unwrap();
        assert_eq!(test.len(), 50);
        assert!(test.samples().iter().all(|s| train.position(s).is_none()));
        assert_eq!(test, TrainingSet::random(&d, 50, 3, Some(&train)).unwrap());
    }

    #[test]
    fn subset_keeps_fine_order() {
        let d = ParameterDomain::new(vec![0.0], vec![1.0]).unwrap();
        let g = TrainingSet::grid(&d, &[5], GridSpacing::Linear).unwrap();
        let s = g.subset(&[3, 0], Provenance::Subsampled).unwrap();
        assert_eq!(s.get(0).values, vec![0.0]);
        assert_eq!(s.get(1).values, vec![0.75]);
        assert!(g.subset(&[5], Provenance::Subsampled).is_err());
    }

    #[test]
    fn log_grid_hits_endpoints() {
        let d = ParameterDomain::new(vec![1e-5], vec![1e-2]).unwrap();
        let g = TrainingSet::grid(&d, &[4], GridSpacing::Log).unwrap();
        assert_eq!(g.get(0).values[0], 1e-5);
        assert!((g.get(1).values[0] - 1e-4).abs() < 1e-18);
        assert_eq!(g.get(3).values[0], 1e-2);
    }
}
