//! Rate encoding of observations into input spikes and decoding of output
//! fire counts into labels or control forces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NeuronId;
use crate::simulator::{InputSchedule, SimulationResult};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateEncoderConfig {
    pub features: Vec<FeatureRange>,
    pub window: u32,
    pub max_rate: u32,
    pub charge_per_spike: f64,
}

impl RateEncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidArgument("encoder window must be at least 1".into()));
        }
        if self.max_rate == 0 || self.max_rate > self.window {
            return Err(Error::InvalidArgument(format!(
                "max_rate must be in 1..={}",
                self.window
            )));
        }
        if let Some((i, _)) = self
            .features
            .iter()
            .enumerate()
            .find(|(_, f)| !(f.min < f.max))
        {
            return Err(Error::InvalidArgument(format!(
                "feature {i}: min must be below max"
            )));
        }
        Ok(())
    }
}

/// Number of injections a feature value maps to.
pub fn injection_count(value: f64, range: FeatureRange, max_rate: u32) -> u32 {
    let scaled = ((value - range.min) / (range.max - range.min)).clamp(0.0, 1.0);
    let scaled = if scaled.is_nan() { 0.0 } else { scaled };
    (max_rate as f64 * scaled).round() as u32
}

/// `count` timesteps spread evenly across the window, starting at 0.
pub fn spread(count: u32, window: u32) -> impl Iterator<Item = u32> {
    let count = count.min(window) as u64;
    (0..count).map(move |j| (j * window as u64 / count) as u32)
}

/// Feature `i` drives input neuron `input_ids[i]`.
pub fn rate_encode(
    observation: &[f64],
    cfg: &RateEncoderConfig,
    input_ids: &[NeuronId],
) -> Result<InputSchedule> {
    if observation.len() != cfg.features.len() {
        return Err(Error::Arity(format!(
            "observation has {} values, encoder expects {}",
            observation.len(),
            cfg.features.len()
        )));
    }
    if input_ids.len() != cfg.features.len() {
        return Err(Error::Arity(format!(
            "network has {} inputs, encoder expects {}",
            input_ids.len(),
            cfg.features.len()
        )));
    }
    let mut schedule = InputSchedule::new();
    for ((&v, range), &id) in observation.iter().zip(&cfg.features).zip(input_ids) {
        let count = injection_count(v, *range, cfg.max_rate);
        for t in spread(count, cfg.window) {
            schedule.push(id, t, cfg.charge_per_spike);
        }
    }
    Ok(schedule)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecoderMode {
    Argmax,
    BangBang { force: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecoderConfig {
    pub mode: DecoderMode,
}

impl DecoderConfig {
    pub fn argmax() -> Self {
        Self {
            mode: DecoderMode::Argmax,
        }
    }

    pub fn bang_bang(force: f64) -> Self {
        Self {
            mode: DecoderMode::BangBang { force },
        }
    }

    pub fn check_outputs(&self, outputs: &[NeuronId]) -> Result<()> {
        match self.mode {
            DecoderMode::Argmax if outputs.is_empty() => {
                Err(Error::Arity("argmax decoding needs at least one output".into()))
            }
            DecoderMode::BangBang { .. } if outputs.len() != 2 => Err(Error::Arity(format!(
                "bang-bang decoding needs exactly 2 outputs, network has {}",
                outputs.len()
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decision {
    Label(usize),
    Force(f64),
}

/// Index of the largest count; the lowest index wins ties.
pub fn argmax_label(counts: &[u32]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

pub fn bang_bang_force(count_pos: u32, count_neg: u32, force: f64) -> f64 {
    match count_pos.cmp(&count_neg) {
        std::cmp::Ordering::Greater => force,
        std::cmp::Ordering::Less => -force,
        std::cmp::Ordering::Equal => 0.0,
    }
}

pub fn decode(result: &SimulationResult, cfg: &DecoderConfig, outputs: &[NeuronId]) -> Result<Decision> {
    cfg.check_outputs(outputs)?;
    let counts = outputs
        .iter()
        .map(|&id| result.fire_count(id).ok_or(Error::UnknownNeuron(id)))
        .collect::<Result<Vec<u32>>>()?;
    Ok(decide(&counts, cfg))
}

/// Decision from output fire counts given in output order. The caller has
/// already checked the output arity.
pub fn decide(output_counts: &[u32], cfg: &DecoderConfig) -> Decision {
    match cfg.mode {
        DecoderMode::Argmax => Decision::Label(argmax_label(output_counts)),
        DecoderMode::BangBang { force } => {
            Decision::Force(bang_bang_force(output_counts[0], output_counts[1], force))
        }
    }
}
