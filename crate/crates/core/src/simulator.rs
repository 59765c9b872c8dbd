//! Discrete-time integrate-and-fire simulation.
//!
//! Each timestep first delivers every charge scheduled for it (synaptic
//! arrivals and input injections), then fires every non-refractory neuron
//! whose accumulator strictly exceeds its threshold. A fire resets the
//! accumulator, blocks the neuron for its refractory period and schedules one
//! arrival per outgoing synapse at `t + delay`. Charge reaching a refractory
//! neuron is dropped. Accumulators do not leak.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::network::{Network, NeuronId};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpikeEvent {
    pub target: NeuronId,
    pub arrival_time: u64,
    pub charge: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Injection {
    pub neuron: NeuronId,
    pub time: u32,
    pub charge: f64,
}

/// Charges injected into input neurons, with times relative to the start of
/// the simulated window.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InputSchedule {
    pub injections: Vec<Injection>,
}

impl InputSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, neuron: NeuronId, time: u32, charge: f64) {
        self.injections.push(Injection {
            neuron,
            time,
            charge,
        });
    }

    pub fn len(&self) -> usize {
        self.injections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.injections.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult {
    pub duration: u32,
    ids: Vec<NeuronId>,
    fire_counts: Vec<u32>,
    fire_times: Vec<Vec<u32>>,
}

impl SimulationResult {
    pub fn fire_count(&self, id: NeuronId) -> Option<u32> {
        self.position(id).map(|i| self.fire_counts[i])
    }

    pub fn fire_times(&self, id: NeuronId) -> Option<&[u32]> {
        self.position(id).map(|i| self.fire_times[i].as_slice())
    }

    /// Fires per timestep over the simulated window.
    pub fn spiking_frequency(&self, id: NeuronId) -> Result<f64> {
        let count = self.fire_count(id).ok_or(Error::UnknownNeuron(id))?;
        Ok(count as f64 / self.duration as f64)
    }

    pub fn neuron_ids(&self) -> &[NeuronId] {
        &self.ids
    }

    pub fn total_fires(&self) -> u64 {
        self.fire_counts.iter().map(|&c| c as u64).sum()
    }

    fn position(&self, id: NeuronId) -> Option<usize> {
        self.ids.iter().position(|&n| n == id)
    }
}

/// Free-function form of [`SimulationResult::spiking_frequency`].
pub fn spiking_frequency(result: &SimulationResult, id: NeuronId) -> Result<f64> {
    result.spiking_frequency(id)
}

/// Runs a fresh simulation of `network` for `duration` timesteps.
pub fn run(network: &Network, schedule: &InputSchedule, duration: u32) -> Result<SimulationResult> {
    if duration == 0 {
        return Err(Error::InvalidArgument("duration must be at least 1".into()));
    }
    let mut sim = Simulator::new(network)?;
    sim.run_window(schedule, duration)
}

#[derive(Clone, Copy, Debug)]
struct Edge {
    target: usize,
    weight: f64,
    delay: u32,
}

/// Stateful simulator. Charge, refractory state and in-flight spikes carry
/// over between consecutive windows until [`Simulator::reset`].
#[derive(Clone, Debug)]
pub struct Simulator {
    ids: Vec<NeuronId>,
    index: HashMap<NeuronId, usize>,
    is_input: Vec<bool>,
    threshold: Vec<f64>,
    refractory: Vec<u32>,
    edge_start: Vec<usize>,
    edges: Vec<Edge>,
    slots: usize,
    // state
    time: u64,
    charge: Vec<f64>,
    blocked_until: Vec<i64>,
    pending: Vec<f64>,
    trace: Option<Vec<(u64, NeuronId)>>,
    injections: Vec<(u32, usize, f64)>,
}

impl Simulator {
    pub fn new(network: &Network) -> Result<Self> {
        let violations = network.validate();
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        let n = network.neurons.len();
        let ids: Vec<NeuronId> = network.neurons.iter().map(|n| n.id).collect();
        let index: HashMap<NeuronId, usize> =
            ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut is_input = vec![false; n];
        for id in &network.inputs {
            is_input[index[id]] = true;
        }

        let mut outgoing: Vec<Vec<Edge>> = vec![Vec::new(); n];
        let mut max_delay = 1u32;
        for s in &network.synapses {
            max_delay = max_delay.max(s.delay);
            outgoing[index[&s.pre]].push(Edge {
                target: index[&s.post],
                weight: s.weight,
                delay: s.delay,
            });
        }
        let mut edge_start = Vec::with_capacity(n + 1);
        let mut edges = Vec::with_capacity(network.synapses.len());
        for out in outgoing {
            edge_start.push(edges.len());
            edges.extend(out);
        }
        edge_start.push(edges.len());

        let slots = max_delay as usize + 1;
        Ok(Self {
            ids,
            index,
            is_input,
            threshold: network.neurons.iter().map(|n| n.threshold).collect(),
            refractory: network.neurons.iter().map(|n| n.refractory).collect(),
            edge_start,
            edges,
            slots,
            time: 0,
            charge: vec![0.0; n],
            blocked_until: vec![-1; n],
            pending: vec![0.0; slots * n],
            trace: None,
            injections: Vec::new(),
        })
    }

    /// Records every fire as `(absolute timestep, neuron id)`.
    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn trace(&self) -> Option<&[(u64, NeuronId)]> {
        self.trace.as_deref()
    }

    /// Absolute timestep of the next step to simulate.
    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn reset(&mut self) {
        self.time = 0;
        self.charge.iter_mut().for_each(|c| *c = 0.0);
        self.blocked_until.iter_mut().for_each(|b| *b = -1);
        self.pending.iter_mut().for_each(|p| *p = 0.0);
        if let Some(t) = self.trace.as_mut() {
            t.clear();
        }
    }

    /// Simulates `duration` more timesteps. Injection times are relative to
    /// the window start and must fall inside the window.
    /// Position of `id` in the network's neuron order.
    pub fn index_of(&self, id: NeuronId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    fn load_injections(&mut self, schedule: &InputSchedule, duration: u32) -> Result<()> {
        self.injections.clear();
        for inj in &schedule.injections {
            let idx = match self.index.get(&inj.neuron) {
                Some(&i) if self.is_input[i] => i,
                _ => return Err(Error::NotAnInput(inj.neuron)),
            };
            if inj.time >= duration {
                return Err(Error::InvalidArgument(format!(
                    "injection at {} outside window of {duration} steps",
                    inj.time
                )));
            }
            self.injections.push((inj.time, idx, inj.charge));
        }
        self.injections.sort_by_key(|&(t, i, _)| (t, i));
        Ok(())
    }

    /// Advances `duration` steps, calling `on_fire(neuron_index, step)` for
    /// every fire in order.
    fn advance(&mut self, duration: u32, mut on_fire: impl FnMut(usize, u32)) {
        let n = self.ids.len();
        let mut next_injection = 0;
        for step in 0..duration {
            let now = self.time as i64;
            let slot = (self.time % self.slots as u64) as usize;
            let row = &mut self.pending[slot * n..(slot + 1) * n];
            for i in 0..n {
                let c = row[i];
                if c != 0.0 {
                    row[i] = 0.0;
                    if now > self.blocked_until[i] {
                        self.charge[i] += c;
                    }
                }
            }
            while next_injection < self.injections.len() && self.injections[next_injection].0 == step {
                let (_, i, c) = self.injections[next_injection];
                if now > self.blocked_until[i] {
                    self.charge[i] += c;
                }
                next_injection += 1;
            }

            for i in 0..n {
                if now > self.blocked_until[i] && self.charge[i] > self.threshold[i] {
                    self.charge[i] = 0.0;
                    self.blocked_until[i] = now + self.refractory[i] as i64;
                    on_fire(i, step);
                    if let Some(t) = self.trace.as_mut() {
                        t.push((self.time, self.ids[i]));
                    }
                    for e in &self.edges[self.edge_start[i]..self.edge_start[i + 1]] {
                        let s = ((self.time + e.delay as u64) % self.slots as u64) as usize;
                        self.pending[s * n + e.target] += e.weight;
                    }
                }
            }
            self.time += 1;
        }
    }

    /// Like [`Simulator::run_window`] but only writes per-neuron fire counts,
    /// in network neuron order, into `counts`.
    pub fn run_window_counts(
        &mut self,
        schedule: &InputSchedule,
        duration: u32,
        counts: &mut Vec<u32>,
    ) -> Result<()> {
        self.load_injections(schedule, duration)?;
        counts.clear();
        counts.resize(self.ids.len(), 0);
        self.advance(duration, |i, _| counts[i] += 1);
        Ok(())
    }

    pub fn run_window(&mut self, schedule: &InputSchedule, duration: u32) -> Result<SimulationResult> {
        self.load_injections(schedule, duration)?;
        let n = self.ids.len();
        let mut fire_counts = vec![0u32; n];
        let mut fire_times: Vec<Vec<u32>> = vec![Vec::new(); n];
        self.advance(duration, |i, step| {
            fire_counts[i] += 1;
            fire_times[i].push(step);
        });

        Ok(SimulationResult {
            duration,
            ids: self.ids.clone(),
            fire_counts,
            fire_times,
        })
    }
}

/// Writes a fire trace as CSV `timestep,neuron_id,event`.
pub fn write_trace_csv<W: Write>(trace: &[(u64, NeuronId)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["timestep", "neuron_id", "event"])?;
    for (t, id) in trace {
        w.write_record([t.to_string(), id.to_string(), "fire".to_string()])?;
    }
    w.flush()?;
    Ok(())
}
