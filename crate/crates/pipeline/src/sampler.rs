use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::{PipelineError, Result};

fn counts(labels: &[usize]) -> Vec<usize> {
    let n = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut c = vec![0usize; n];
    for &l in labels {
        c[l] += 1;
    }
    c
}

/// Per-sample drawing probabilities proportional to the inverse frequency of
/// each sample's class, normalized to sum to 1. Every class present is then
/// drawn equally often in expectation.
pub fn sampler_weights(labels: &[usize]) -> Vec<f64> {
    let c = counts(labels);
    let raw: Vec<f64> = labels.iter().map(|&l| 1.0 / c[l] as f64).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Cross-entropy class weights: inverse class frequency, normalized so the
/// weights average 1. Fails if any of the `n_classes` classes is absent.
pub fn class_weights(labels: &[usize], n_classes: usize) -> Result<Vec<f64>> {
    let mut c = vec![0usize; n_classes];
    for &l in labels {
        if l >= n_classes {
            return Err(PipelineError::Data(format!("label {l} out of range for {n_classes} classes")));
        }
        c[l] += 1;
    }
    if let Some(missing) = c.iter().position(|&n| n == 0) {
        return Err(PipelineError::Data(format!("class {missing} has no training samples")));
    }
    let inv: Vec<f64> = c.iter().map(|&n| 1.0 / n as f64).collect();
    let mean = inv.iter().sum::<f64>() / n_classes as f64;
    Ok(inv.into_iter().map(|w| w / mean).collect())
}

/// Draws sample indices with replacement according to fixed weights.
#[derive(Debug, Clone)]
pub struct WeightedSampler {
    dist: WeightedIndex<f64>,
}

impl WeightedSampler {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let dist = WeightedIndex::new(weights).map_err(|e| PipelineError::Data(format!("sampler weights: {e}")))?;
        Ok(Self { dist })
    }

    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        Self::new(&sampler_weights(labels))
    }

    pub fn draw(&self, n: usize, rng: &mut impl Rng) -> Vec<usize> {
        (0..n).map(|_| self.dist.sample(rng)).collect()
    }
}
