//! Removal of hidden neurons that fire far less often than the outputs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::env::{Evaluator, Probe};
use crate::error::{Error, Result};
use crate::network::{Network, NeuronId, Role};

fn default_ratio() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruneConfig {
    #[serde(default = "default_ratio")]
    pub frequency_ratio: f64,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self {
            frequency_ratio: default_ratio(),
        }
    }
}

impl PruneConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_ratio > 0.0) {
            return Err(Error::InvalidArgument("frequency_ratio must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub hidden_count: usize,
    pub synapse_count: usize,
    pub avg_hidden_freq: f64,
    pub avg_input_freq: f64,
    pub avg_output_freq: f64,
    pub performance: f64,
}

fn role_average(net: &Network, probe: &Probe, role: Role) -> f64 {
    let freqs: Vec<f64> = net
        .neurons
        .iter()
        .filter(|n| n.role == role)
        .map(|n| probe.frequency(n.id).unwrap_or(0.0))
        .collect();
    if freqs.is_empty() {
        0.0
    } else {
        freqs.iter().sum::<f64>() / freqs.len() as f64
    }
}

fn check_arity<E: Evaluator + ?Sized>(net: &Network, evaluator: &E) -> Result<()> {
    if net.inputs.len() != evaluator.input_count() || net.outputs.len() != evaluator.output_count() {
        return Err(Error::Arity(format!(
            "network has {}/{} inputs/outputs, task needs {}/{}",
            net.inputs.len(),
            net.outputs.len(),
            evaluator.input_count(),
            evaluator.output_count()
        )));
    }
    Ok(())
}

pub fn stats_from_probe(net: &Network, probe: &Probe, performance: f64) -> NetworkStats {
    NetworkStats {
        hidden_count: net.hidden_count(),
        synapse_count: net.synapse_count(),
        avg_hidden_freq: role_average(net, probe, Role::Hidden),
        avg_input_freq: role_average(net, probe, Role::Input),
        avg_output_freq: role_average(net, probe, Role::Output),
        performance,
    }
}

/// Role-wise average spiking frequency on the task's probe workload, plus
/// task performance.
pub fn measure_stats<E: Evaluator + ?Sized>(net: &Network, evaluator: &E) -> Result<NetworkStats> {
    check_arity(net, evaluator)?;
    let probe = evaluator.probe(net)?;
    let performance = evaluator.evaluate(net)?;
    Ok(stats_from_probe(net, &probe, performance))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovedNeuron {
    pub neuron: NeuronId,
    /// `None` for neurons removed by dead-path cleanup.
    pub measured_freq: Option<f64>,
    pub threshold_freq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneRecord {
    pub removed: Vec<RemovedNeuron>,
    pub before: NetworkStats,
    pub after: NetworkStats,
}

/// Hidden neurons whose frequency lies strictly below `ratio` times the
/// mean output frequency, in id order.
pub fn select_low_frequency(net: &Network, probe: &Probe, ratio: f64) -> (Vec<(NeuronId, f64)>, f64) {
    let threshold = ratio * role_average(net, probe, Role::Output);
    let low = net
        .neurons
        .iter()
        .filter(|n| n.role == Role::Hidden)
        .map(|n| (n.id, probe.frequency(n.id).unwrap_or(0.0)))
        .filter(|&(_, f)| f < threshold)
        .collect();
    (low, threshold)
}

/// Repeatedly removes hidden neurons lacking an incoming or an outgoing
/// synapse to another neuron. Returns removed ids in removal order.
pub fn remove_dead_paths(net: &mut Network) -> Vec<NeuronId> {
    let mut removed = Vec::new();
    loop {
        let dead: Vec<NeuronId> = net
            .hidden_ids()
            .into_iter()
            .filter(|&h| {
                let incoming = net.synapses.iter().any(|s| s.post == h && s.pre != h);
                let outgoing = net.synapses.iter().any(|s| s.pre == h && s.post != h);
                !(incoming && outgoing)
            })
            .collect();
        if dead.is_empty() {
            return removed;
        }
        for id in dead {
            net.remove_neuron(id);
            removed.push(id);
        }
    }
}

pub fn prune<E: Evaluator + ?Sized>(
    net: &Network,
    evaluator: &E,
    cfg: &PruneConfig,
) -> Result<(Network, PruneRecord)> {
    cfg.validate()?;
    let violations = net.validate();
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    check_arity(net, evaluator)?;
    let probe = evaluator.probe(net)?;
    let before = stats_from_probe(net, &probe, evaluator.evaluate(net)?);

    let (low, threshold) = select_low_frequency(net, &probe, cfg.frequency_ratio);
    let mut pruned = net.clone();
    let mut removed = Vec::new();
    for (id, f) in low {
        pruned.remove_neuron(id);
        removed.push(RemovedNeuron {
            neuron: id,
            measured_freq: Some(f),
            threshold_freq: threshold,
        });
    }
    for id in remove_dead_paths(&mut pruned) {
        removed.push(RemovedNeuron {
            neuron: id,
            measured_freq: None,
            threshold_freq: threshold,
        });
    }

    let after = measure_stats(&pruned, evaluator)?;
    Ok((pruned, PruneRecord { removed, before, after }))
}

pub const PRUNE_CSV_HEADER: [&str; 4] = ["network_id", "removed_neuron_id", "measured_freq", "threshold_freq"];

/// Rows for every removed neuron; cleanup removals leave `measured_freq`
/// empty.
pub fn write_prune_csv<W: Write>(records: &[(String, &PruneRecord)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PRUNE_CSV_HEADER)?;
    for (name, record) in records {
        for r in &record.removed {
            w.write_record([
                name.clone(),
                r.neuron.to_string(),
                r.measured_freq.map(|f| f.to_string()).unwrap_or_default(),
                r.threshold_freq.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
