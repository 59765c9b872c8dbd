//! Synaptic fault models, variation sampling and the perturbation sweep.
//!
//! Digital weights are faulted by flipping one bit of their 12-bit two's
//! complement encoding. Analog weights are faulted either by shrinking their
//! magnitude toward zero or by subtracting a signed offset.

use std::io::Write;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::Evaluator;
use crate::error::{Error, Result};
use crate::fitness::{fit_normal, resilience_metric};
use crate::network::{ArchitectureProfile, Network, ProfileKind, SynapseId};
use crate::rng::{self, tag};

/// Width of the register that holds a digital weight.
pub const WEIGHT_BITS: u32 = 12;
pub const MAX_FLIP_BIT: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Epsilon {
    Fixed(f64),
    Uniform { lo: f64, hi: f64 },
}

impl Epsilon {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Epsilon::Fixed(e) => e,
            Epsilon::Uniform { lo, hi } => rng.random_range(lo..hi),
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            Epsilon::Fixed(e) if e > 0.0 && e.is_finite() => Ok(()),
            Epsilon::Uniform { lo, hi } if lo > 0.0 && lo < hi && hi.is_finite() => Ok(()),
            other => Err(Error::InvalidArgument(format!(
                "epsilon {other:?} must be positive with lo < hi"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiminishMode {
    TowardZero,
    Subtract,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbationModel {
    /// Flips bit `bit` (0 = least significant).
    BitFlip { bit: u32 },
    DiminishTowardZero { epsilon: Epsilon },
    Subtract { epsilon: Epsilon },
}

impl PerturbationModel {
    pub fn check(&self, profile: &ArchitectureProfile) -> Result<()> {
        match (self, profile.kind) {
            (PerturbationModel::BitFlip { bit }, ProfileKind::Digital) => {
                if *bit > MAX_FLIP_BIT {
                    Err(Error::InvalidArgument(format!(
                        "bit index {bit} outside 0..={MAX_FLIP_BIT}"
                    )))
                } else {
                    Ok(())
                }
            }
            (PerturbationModel::BitFlip { .. }, ProfileKind::Analog) => Err(Error::Profile(
                "bit flips apply only to the digital profile".into(),
            )),
            (
                PerturbationModel::DiminishTowardZero { epsilon }
                | PerturbationModel::Subtract { epsilon },
                ProfileKind::Analog,
            ) => epsilon.check(),
            (_, ProfileKind::Digital) => Err(Error::Profile(
                "diminish/subtract apply only to the analog profile".into(),
            )),
        }
    }

    /// Applies the fault to one weight, drawing epsilon from `rng` when the
    /// model has a range.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        weight: f64,
        profile: &ArchitectureProfile,
        rng: &mut R,
    ) -> Result<f64> {
        match *self {
            PerturbationModel::BitFlip { bit } => {
                Ok(flip_bit(weight.round() as i32, bit, profile)? as f64)
            }
            PerturbationModel::DiminishTowardZero { epsilon } => {
                Ok(diminish(weight, epsilon.sample(rng), DiminishMode::TowardZero))
            }
            PerturbationModel::Subtract { epsilon } => {
                Ok(diminish(weight, epsilon.sample(rng), DiminishMode::Subtract))
            }
        }
    }
}

/// Inverts bit `bit` of the 12-bit two's complement encoding of `weight`,
/// decodes, and clamps to the profile's weight range.
pub fn flip_bit(weight: i32, bit: u32, profile: &ArchitectureProfile) -> Result<i32> {
    if profile.kind != ProfileKind::Digital {
        return Err(Error::Profile("bit flips apply only to the digital profile".into()));
    }
    if bit > MAX_FLIP_BIT {
        return Err(Error::InvalidArgument(format!(
            "bit index {bit} outside 0..={MAX_FLIP_BIT}"
        )));
    }
    let mask = (1u32 << WEIGHT_BITS) - 1;
    let encoded = (weight as u32) & mask;
    let flipped = encoded ^ (1 << bit);
    let sign = 1u32 << (WEIGHT_BITS - 1);
    let decoded = if flipped & sign != 0 {
        flipped as i32 - (1 << WEIGHT_BITS)
    } else {
        flipped as i32
    };
    Ok(decoded.clamp(profile.weight_min as i32, profile.weight_max as i32))
}

/// `TowardZero` shrinks |w| by epsilon without crossing zero; `Subtract`
/// lowers the signed weight and clamps to `[-1, 1]`.
pub fn diminish(weight: f64, epsilon: f64, mode: DiminishMode) -> f64 {
    match mode {
        DiminishMode::TowardZero => weight.signum() * (weight.abs() - epsilon).max(0.0),
        DiminishMode::Subtract => (weight - epsilon).clamp(-1.0, 1.0),
    }
}

/// Copy of `network` with exactly the listed synapses faulted.
pub fn perturb<R: Rng + ?Sized>(
    network: &Network,
    synapse_ids: &[SynapseId],
    model: &PerturbationModel,
    rng: &mut R,
) -> Result<Network> {
    model.check(&network.profile)?;
    let mut out = network.clone();
    for &id in synapse_ids {
        let profile = &network.profile;
        let syn = out.synapse_mut(id).ok_or(Error::UnknownSynapse(id))?;
        syn.weight = model.apply(syn.weight, profile, rng)?;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationSpec {
    pub model: PerturbationModel,
    /// Chance that each synapse is faulted; 1.0 faults every synapse.
    pub per_synapse_probability: f64,
}

impl VariationSpec {
    pub fn check(&self, profile: &ArchitectureProfile) -> Result<()> {
        if !(0.0..=1.0).contains(&self.per_synapse_probability) {
            return Err(Error::InvalidArgument(
                "per_synapse_probability must be in [0, 1]".into(),
            ));
        }
        self.model.check(profile)
    }
}

/// A variation: each synapse independently faulted with the configured
/// probability.
pub fn sample_variation<R: Rng + ?Sized>(
    network: &Network,
    spec: &VariationSpec,
    rng: &mut R,
) -> Result<Network> {
    spec.check(&network.profile)?;
    let mut out = network.clone();
    for syn in out.synapses.iter_mut() {
        if rng.random_bool(spec.per_synapse_probability) {
            syn.weight = spec.model.apply(syn.weight, &network.profile, rng)?;
        }
    }
    Ok(out)
}

fn default_k_values() -> Vec<usize> {
    vec![1, 2, 3, 4, 5]
}

fn default_trials() -> usize {
    100
}

fn default_bins() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Synapses faulted per trial. `0` is allowed as an unperturbed control.
    #[serde(default = "default_k_values")]
    pub k_values: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials_per_k: usize,
    pub model: PerturbationModel,
    #[serde(default)]
    pub seed: u64,
    /// Performance below which a perturbed network counts as failed.
    #[serde(default)]
    pub failure_threshold: Option<f64>,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
}

impl SweepConfig {
    pub fn new(model: PerturbationModel, seed: u64) -> Self {
        Self {
            k_values: default_k_values(),
            trials_per_k: default_trials(),
            model,
            seed,
            failure_threshold: None,
            histogram_bins: default_bins(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub k: usize,
    pub trial: usize,
    pub synapse_ids: Vec<SynapseId>,
    pub performance: f64,
    pub degradation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub records: usize,
    pub optimal_performance: f64,
    pub mean_performance: f64,
    pub degradation_mean: f64,
    pub degradation_stddev: f64,
    /// `1 - degradation_mean`, higher is better.
    pub resilience_mean: f64,
    pub histogram: Vec<HistogramBin>,
    pub failure_threshold: Option<f64>,
    pub fraction_below_threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub base_performance: f64,
    pub records: Vec<SweepRecord>,
    pub summary: SweepSummary,
}

/// Histogram of performance over `[0, optimal]`; values outside land in the
/// nearest end bin.
pub fn performance_histogram(values: &[f64], optimal: f64, bins: usize) -> Vec<HistogramBin> {
    let bins = bins.max(1);
    let width = optimal / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            lo: i as f64 * width,
            hi: if i + 1 == bins { optimal } else { (i + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for &v in values {
        let i = if width > 0.0 { (v / width).floor() } else { 0.0 };
        let i = if i.is_nan() { 0 } else { (i.max(0.0) as usize).min(bins - 1) };
        out[i].count += 1;
    }
    out
}

/// Aggregates of a set of sweep records.
pub fn summarize(
    records: &[SweepRecord],
    optimal: f64,
    bins: usize,
    failure_threshold: Option<f64>,
) -> SweepSummary {
    let n = records.len();
    let perf: Vec<f64> = records.iter().map(|r| r.performance).collect();
    let degr: Vec<f64> = records.iter().map(|r| r.degradation).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (degradation_mean, degradation_stddev) = match fit_normal(&degr) {
        Ok(fit) => fit,
        Err(_) => (mean(&degr), 0.0),
    };
    SweepSummary {
        records: n,
        optimal_performance: optimal,
        mean_performance: mean(&perf),
        degradation_mean,
        degradation_stddev,
        resilience_mean: 1.0 - degradation_mean,
        histogram: performance_histogram(&perf, optimal, bins),
        failure_threshold,
        fraction_below_threshold: failure_threshold
            .map(|t| perf.iter().filter(|&&p| p < t).count() as f64 / n as f64),
    }
}

/// For each k and trial: fault k distinct synapses chosen uniformly, score
/// the result. Trial `(k, i)` draws from its own stream so the report does
/// not depend on scheduling.
pub fn sweep<E: Evaluator + ?Sized>(
    network: &Network,
    evaluator: &E,
    cfg: &SweepConfig,
) -> Result<SweepReport> {
    if cfg.trials_per_k == 0 || cfg.k_values.is_empty() {
        return Err(Error::InvalidArgument("sweep would produce an empty report".into()));
    }
    cfg.model.check(&network.profile)?;
    let need = cfg.k_values.iter().copied().max().unwrap_or(0);
    if network.synapse_count() < need {
        return Err(Error::TooFewSynapses {
            have: network.synapse_count(),
            need,
        });
    }
    let optimal = evaluator.optimal_performance();
    let base_performance = evaluator.evaluate(network)?;

    let jobs: Vec<(usize, usize)> = cfg
        .k_values
        .iter()
        .flat_map(|&k| (0..cfg.trials_per_k).map(move |t| (k, t)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(k, trial)| {
            let mut r = rng::stream(cfg.seed, &[tag::SWEEP, k as u64, trial as u64]);
            let mut ids: Vec<SynapseId> = index::sample(&mut r, network.synapse_count(), k)
                .into_iter()
                .map(|i| network.synapses[i].id)
                .collect();
            ids.sort_unstable();
            let faulted = perturb(network, &ids, &cfg.model, &mut r)?;
            let performance = if k == 0 {
                base_performance
            } else {
                evaluator.evaluate(&faulted)?
            };
            Ok(SweepRecord {
                k,
                trial,
                synapse_ids: ids,
                performance,
                degradation: resilience_metric(optimal, performance)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let summary = summarize(&records, optimal, cfg.histogram_bins, cfg.failure_threshold);
    Ok(SweepReport {
        base_performance,
        records,
        summary,
    })
}

pub const SWEEP_CSV_HEADER: [&str; 6] =
    ["network_id", "k", "trial", "synapse_ids", "performance", "degradation"];

pub fn write_sweep_csv<W: Write>(
    reports: &[(String, &SweepReport)],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_CSV_HEADER)?;
    for (network_id, report) in reports {
        for r in &report.records {
            let ids = r
                .synapse_ids
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                network_id.clone(),
                r.k.to_string(),
                r.trial.to_string(),
                ids,
                r.performance.to_string(),
                r.degradation.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_sweep_csv`] as `(network_id, record)`.
pub fn read_sweep_csv<R: std::io::Read>(input: R) -> Result<Vec<(String, SweepRecord)>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> Result<&str> {
            rec.get(i).ok_or_else(|| Error::Parse {
                line: row + 2,
                column: i + 1,
                message: format!("missing column `{}`", SWEEP_CSV_HEADER[i]),
            })
        };
        let bad = |i: usize, e: &dyn std::fmt::Display| Error::Parse {
            line: row + 2,
            column: i + 1,
            message: format!("{}: {e}", SWEEP_CSV_HEADER[i]),
        };
        let ids_text = field(3)?;
        let synapse_ids = if ids_text.is_empty() {
            Vec::new()
        } else {
            ids_text
                .split(';')
                .map(|s| s.parse::<SynapseId>().map_err(|e| bad(3, &e)))
                .collect::<Result<Vec<_>>>()?
        };
        out.push((
            field(0)?.to_string(),
            SweepRecord {
                k: field(1)?.parse().map_err(|e| bad(1, &e))?,
                trial: field(2)?.parse().map_err(|e| bad(2, &e))?,
                synapse_ids,
                performance: field(4)?.parse().map_err(|e| bad(4, &e))?,
                degradation: field(5)?.parse().map_err(|e| bad(5, &e))?,
            },
        ));
    }
    Ok(out)
}
