//! Size-penalised and size-plus-resilience fitness, and the degradation
//! metric used to score perturbed networks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::Evaluator;
use crate::error::{Error, Result};
use crate::network::Network;
use crate::perturbation::{sample_variation, VariationSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitnessConfig {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_variations")]
    pub n_variations: usize,
    #[serde(default = "half")]
    pub w1: f64,
    #[serde(default = "half")]
    pub w2: f64,
    pub variation_spec: VariationSpec,
    pub optimal_performance: f64,
}

fn default_delta() -> f64 {
    0.001
}

fn default_variations() -> usize {
    5
}

fn half() -> f64 {
    0.5
}

impl FitnessConfig {
    /// Size penalty only (`w1 = 1`, `w2 = 0`).
    pub fn size_only(delta: f64, variation_spec: VariationSpec, optimal_performance: f64) -> Self {
        Self {
            delta,
            n_variations: default_variations(),
            w1: 1.0,
            w2: 0.0,
            variation_spec,
            optimal_performance,
        }
    }

    pub fn multi_objective(variation_spec: VariationSpec, optimal_performance: f64) -> Self {
        Self {
            delta: default_delta(),
            n_variations: default_variations(),
            w1: 0.5,
            w2: 0.5,
            variation_spec,
            optimal_performance,
        }
    }

    /// `w1, w2 ∈ [0, 1]`, `w1 + w2 = 1`, `δ ∈ [0, 1)`, `n ≥ 1`. A zero δ is
    /// accepted so the unpenalised baseline can share this type.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(0.0..=1.0).contains(&self.w1) || !(0.0..=1.0).contains(&self.w2) {
            return bad("w1 and w2 must lie in [0, 1]");
        }
        if (self.w1 + self.w2 - 1.0).abs() > 1e-12 {
            return bad("w1 + w2 must equal 1");
        }
        if !(0.0..1.0).contains(&self.delta) {
            return bad("delta must lie in [0, 1)");
        }
        if self.n_variations == 0 {
            return bad("n_variations must be at least 1");
        }
        if !(self.optimal_performance > 0.0) {
            return bad("optimal_performance must be positive");
        }
        Ok(())
    }
}

/// `performance · (1 − hidden/total · δ)`.
pub fn size_penalty_fitness(performance: f64, hidden: usize, total: usize, delta: f64) -> Result<f64> {
    if total == 0 {
        return Err(Error::InvalidArgument("network has no neurons".into()));
    }
    if hidden > total {
        return Err(Error::InvalidArgument("hidden count exceeds total".into()));
    }
    Ok(performance * (1.0 - (hidden as f64 / total as f64) * delta))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessDetail {
    pub performance: f64,
    pub size_term: f64,
    /// Absent when `w2 = 0`, in which case no variations are evaluated.
    pub mean_variation_performance: Option<f64>,
    pub hidden: usize,
    pub total: usize,
}

/// `w1 · size_penalty_fitness + w2 · mean(performance of n variations)`.
///
/// Variations are drawn from `rng` one after another. With `w2 = 0` the
/// variation term is skipped and the result equals the size-penalty term.
pub fn multi_objective_fitness<E, R>(
    network: &Network,
    evaluator: &E,
    cfg: &FitnessConfig,
    rng: &mut R,
) -> Result<(f64, FitnessDetail)>
where
    E: Evaluator + ?Sized,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let performance = evaluator.evaluate(network)?;
    let hidden = network.hidden_count();
    let total = network.neuron_count();
    let size_term = size_penalty_fitness(performance, hidden, total, cfg.delta)?;

    if cfg.w2 == 0.0 {
        let detail = FitnessDetail {
            performance,
            size_term,
            mean_variation_performance: None,
            hidden,
            total,
        };
        return Ok((cfg.w1 * size_term, detail));
    }

    let mut sum = 0.0;
    for index in 0..cfg.n_variations {
        let variation = sample_variation(network, &cfg.variation_spec, rng)?;
        sum += evaluator.evaluate(&variation).map_err(|e| Error::Variation {
            index,
            source: Box::new(e),
        })?;
    }
    let mean = sum / cfg.n_variations as f64;
    let fitness = combine(cfg.w1, size_term, cfg.w2, mean);
    Ok((
        fitness,
        FitnessDetail {
            performance,
            size_term,
            mean_variation_performance: Some(mean),
            hidden,
            total,
        },
    ))
}

pub fn combine(w1: f64, size_term: f64, w2: f64, mean_variation: f64) -> f64 {
    w1 * size_term + w2 * mean_variation
}

/// `(optimal − performance) / optimal`: 0 is full retention, 1 total loss.
pub fn resilience_metric(optimal: f64, performance: f64) -> Result<f64> {
    if !(optimal > 0.0) {
        return Err(Error::InvalidArgument("optimal performance must be positive".into()));
    }
    Ok((optimal - performance) / optimal)
}

/// Sample mean and sample standard deviation (n − 1 denominator).
pub fn fit_normal(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}
