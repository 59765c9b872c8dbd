use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{decide, rate_encode, Decision, DecoderConfig, FeatureRange, RateEncoderConfig};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::rng;
use crate::simulator::Simulator;

use super::{Evaluator, Probe};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl std::ops::Neg for CartPoleState {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            x: -self.x,
            x_dot: -self.x_dot,
            theta: -self.theta,
            theta_dot: -self.theta_dot,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CartPoleConfig {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    pub pole_half_length: f64,
    pub force_magnitude: f64,
    pub dt: f64,
    pub fail_x: f64,
    pub fail_theta: f64,
    pub max_time: f64,
}

impl Default for CartPoleConfig {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            cart_mass: 1.0,
            pole_mass: 0.1,
            pole_half_length: 0.5,
            force_magnitude: 10.0,
            dt: 0.02,
            fail_x: 2.4,
            fail_theta: 12f64.to_radians(),
            max_time: 300.02,
        }
    }
}

impl CartPoleConfig {
    pub fn max_steps(&self) -> u64 {
        (self.max_time / self.dt).round().max(0.0) as u64
    }

    pub fn failed(&self, s: &CartPoleState) -> bool {
        s.x.abs() > self.fail_x || s.theta.abs() > self.fail_theta || !s.theta.is_finite()
    }
}

/// One explicit Euler step of the classic cart-pole equations of motion.
pub fn cartpole_step(s: CartPoleState, force: f64, cfg: &CartPoleConfig) -> CartPoleState {
    let total_mass = cfg.cart_mass + cfg.pole_mass;
    let pole_mass_length = cfg.pole_mass * cfg.pole_half_length;
    let (sin, cos) = s.theta.sin_cos();
    let temp = (force + pole_mass_length * s.theta_dot * s.theta_dot * sin) / total_mass;
    let theta_acc = (cfg.gravity * sin - cos * temp)
        / (cfg.pole_half_length * (4.0 / 3.0 - cfg.pole_mass * cos * cos / total_mass));
    let x_acc = temp - pole_mass_length * theta_acc * cos / total_mass;
    CartPoleState {
        x: s.x + cfg.dt * s.x_dot,
        x_dot: s.x_dot + cfg.dt * x_acc,
        theta: s.theta + cfg.dt * s.theta_dot,
        theta_dot: s.theta_dot + cfg.dt * theta_acc,
    }
}

/// Seeded start state, each component uniform in `[-spread, spread]`.
pub fn initial_state(seed: u64, spread: f64) -> CartPoleState {
    let mut r = rng::stream(seed, &[]);
    let mut draw = || r.random_range(-spread..=spread);
    CartPoleState {
        x: draw(),
        x_dot: draw(),
        theta: draw(),
        theta_dot: draw(),
    }
}

/// Each state variable is split into its positive and negative part so that
/// a rate encoder can express the sign: `[x+, x-, x'+, x'-, θ+, θ-, θ'+, θ'-]`.
pub fn observation(s: &CartPoleState) -> [f64; 8] {
    let split = |v: f64| [v.max(0.0), (-v).max(0.0)];
    let [a, b] = split(s.x);
    let [c, d] = split(s.x_dot);
    let [e, f] = split(s.theta);
    let [g, h] = split(s.theta_dot);
    [a, b, c, d, e, f, g, h]
}

/// Encoder for [`observation`]: 8 features, the given scales per variable.
pub fn signed_encoder(
    x_scale: f64,
    x_dot_scale: f64,
    theta_scale: f64,
    theta_dot_scale: f64,
    window: u32,
    charge_per_spike: f64,
) -> RateEncoderConfig {
    let features = [x_scale, x_dot_scale, theta_scale, theta_dot_scale]
        .iter()
        .flat_map(|&s| [FeatureRange::new(0.0, s), FeatureRange::new(0.0, s)])
        .collect();
    RateEncoderConfig {
        features,
        window,
        max_rate: window,
        charge_per_spike,
    }
}

pub fn default_encoder(charge_per_spike: f64) -> RateEncoderConfig {
    signed_encoder(2.4, 1.0, 0.1, 1.0, 10, charge_per_spike)
}

struct Episode {
    time: f64,
    counts: Vec<u64>,
    sim_steps: u64,
}

fn simulate_episode(
    network: &Network,
    enc: &RateEncoderConfig,
    dec: &DecoderConfig,
    cfg: &CartPoleConfig,
    start: CartPoleState,
    keep_counts: bool,
) -> Result<Episode> {
    if enc.features.len() != 8 || network.inputs.len() != 8 {
        return Err(Error::Arity(format!(
            "pole balancing needs 8 encoder features and 8 inputs, got {} and {}",
            enc.features.len(),
            network.inputs.len()
        )));
    }
    if !matches!(dec.mode, crate::encoding::DecoderMode::BangBang { .. }) {
        return Err(Error::Arity("pole balancing needs a bang-bang decoder".into()));
    }
    dec.check_outputs(&network.outputs)?;

    let max_steps = cfg.max_steps();
    let mut episode = Episode {
        time: 0.0,
        counts: if keep_counts { vec![0; network.neurons.len()] } else { Vec::new() },
        sim_steps: 0,
    };
    if max_steps == 0 {
        return Ok(episode);
    }

    let mut sim = Simulator::new(network)?;
    let out_idx: Vec<usize> = network
        .outputs
        .iter()
        .map(|&id| sim.index_of(id).expect("validated output"))
        .collect();
    let mut counts = Vec::new();
    let mut out_counts = vec![0u32; out_idx.len()];
    let mut state = start;
    let mut steps = 0u64;
    while steps < max_steps {
        let schedule = rate_encode(&observation(&state), enc, &network.inputs)?;
        sim.run_window_counts(&schedule, enc.window, &mut counts)?;
        episode.sim_steps += enc.window as u64;
        if keep_counts {
            for (total, &c) in episode.counts.iter_mut().zip(&counts) {
                *total += c as u64;
            }
        }
        for (o, &i) in out_counts.iter_mut().zip(&out_idx) {
            *o = counts[i];
        }
        let force = match decide(&out_counts, dec) {
            Decision::Force(f) => f,
            Decision::Label(_) => unreachable!("bang-bang decoder yields forces"),
        };
        state = cartpole_step(state, force, cfg);
        steps += 1;
        if cfg.failed(&state) {
            break;
        }
    }
    episode.time = if steps >= max_steps {
        cfg.max_time
    } else {
        steps as f64 * cfg.dt
    };
    Ok(episode)
}

/// Balance time in seconds of one episode starting from the seeded state.
pub fn run_pb_episode(
    network: &Network,
    enc: &RateEncoderConfig,
    dec: &DecoderConfig,
    cfg: &CartPoleConfig,
    seed: u64,
) -> Result<f64> {
    let start = initial_state(seed, INITIAL_SPREAD);
    Ok(simulate_episode(network, enc, dec, cfg, start, false)?.time)
}

pub const INITIAL_SPREAD: f64 = 0.05;

/// Pole balancing scored as the mean balance time over fixed episode seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleBalanceTask {
    pub physics: CartPoleConfig,
    pub encoder: RateEncoderConfig,
    pub decoder: DecoderConfig,
    pub episode_seeds: Vec<u64>,
}

impl PoleBalanceTask {
    pub fn new(physics: CartPoleConfig, charge_per_spike: f64, episode_seeds: Vec<u64>) -> Self {
        let decoder = DecoderConfig::bang_bang(physics.force_magnitude);
        Self {
            physics,
            encoder: default_encoder(charge_per_spike),
            decoder,
            episode_seeds,
        }
    }
}

impl Evaluator for PoleBalanceTask {
    fn evaluate(&self, network: &Network) -> Result<f64> {
        if self.episode_seeds.is_empty() {
            return Err(Error::InvalidArgument("no episode seeds".into()));
        }
        let mut total = 0.0;
        for &seed in &self.episode_seeds {
            total += run_pb_episode(network, &self.encoder, &self.decoder, &self.physics, seed)?;
        }
        Ok(total / self.episode_seeds.len() as f64)
    }

    /// Fire counts over the first seeded episode.
    fn probe(&self, network: &Network) -> Result<Probe> {
        let seed = *self
            .episode_seeds
            .first()
            .ok_or_else(|| Error::InvalidArgument("no episode seeds".into()))?;
        let start = initial_state(seed, INITIAL_SPREAD);
        let ep = simulate_episode(network, &self.encoder, &self.decoder, &self.physics, start, true)?;
        Ok(Probe {
            duration: ep.sim_steps,
            counts: network.neurons.iter().map(|n| n.id).zip(ep.counts).collect(),
        })
    }

    fn optimal_performance(&self) -> f64 {
        self.physics.max_time
    }

    fn input_count(&self) -> usize {
        8
    }

    fn output_count(&self) -> usize {
        2
    }
}
