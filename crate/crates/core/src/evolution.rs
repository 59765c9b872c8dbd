//! Generational genetic algorithm over network parameters and structure.
//!
//! Offspring come from tournament selection followed by independent draws
//! for crossover, merge and mutation, applied in that order. The best
//! `elitism` individuals carry over unchanged with their fitness.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::Evaluator;
use crate::error::{Error, Result};
use crate::fitness::{multi_objective_fitness, FitnessConfig, FitnessDetail};
use crate::network::{random_position, ArchitectureProfile, Network, NeuronId, ProfileKind, Role};
use crate::rng::{self, tag};

fn default_crossover() -> f64 {
    0.5
}
fn default_mutation() -> f64 {
    0.9
}
fn default_merge() -> f64 {
    0.1
}
fn default_tournament() -> usize {
    4
}
fn default_elitism() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub population_size: usize,
    #[serde(default = "default_crossover")]
    pub crossover_rate: f64,
    #[serde(default = "default_mutation")]
    pub mutation_rate: f64,
    #[serde(default = "default_merge")]
    pub merge_rate: f64,
    #[serde(default = "default_tournament")]
    pub tournament_size: usize,
    #[serde(default = "default_elitism")]
    pub elitism: usize,
    /// Number of breeding rounds after the initial population.
    pub max_generations: usize,
    #[serde(default)]
    pub target_fitness: Option<f64>,
    #[serde(default)]
    pub master_seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            crossover_rate: default_crossover(),
            mutation_rate: default_mutation(),
            merge_rate: default_merge(),
            tournament_size: default_tournament(),
            elitism: default_elitism(),
            max_generations: 100,
            target_fitness: None,
            master_seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
            ("merge_rate", self.merge_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.population_size < 2 {
            return Err(Error::InvalidArgument("population_size must be at least 2".into()));
        }
        if self.elitism >= self.population_size {
            return Err(Error::InvalidArgument("elitism must be below population_size".into()));
        }
        if self.tournament_size == 0 {
            return Err(Error::InvalidArgument("tournament_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub network: Network,
    pub fitness: Option<f64>,
    pub detail: Option<FitnessDetail>,
}

impl Individual {
    pub fn new(network: Network) -> Self {
        Self {
            network,
            fitness: None,
            detail: None,
        }
    }

    fn score(&self) -> f64 {
        self.fitness.unwrap_or(f64::NEG_INFINITY)
    }
}

/// Largest change applied by parameter-perturbation mutations.
pub const DIGITAL_STEP: i64 = 64;
pub const ANALOG_STEP: f64 = 0.1;

fn random_weight<R: Rng + ?Sized>(p: &ArchitectureProfile, rng: &mut R) -> f64 {
    if p.weight_is_integer {
        rng.random_range(p.weight_min as i64..=p.weight_max as i64) as f64
    } else {
        rng.random_range(p.weight_min..=p.weight_max)
    }
}

fn random_threshold<R: Rng + ?Sized>(p: &ArchitectureProfile, rng: &mut R) -> f64 {
    if p.weight_is_integer {
        rng.random_range(p.threshold_min as i64..=p.threshold_max as i64) as f64
    } else {
        rng.random_range(p.threshold_min..=p.threshold_max)
    }
}

fn random_delay<R: Rng + ?Sized>(p: &ArchitectureProfile, rng: &mut R) -> u32 {
    rng.random_range(p.delay_min..=p.delay_max)
}

fn nudge<R: Rng + ?Sized>(value: f64, p: &ArchitectureProfile, rng: &mut R) -> f64 {
    match p.kind {
        ProfileKind::Digital => value + rng.random_range(-DIGITAL_STEP..=DIGITAL_STEP) as f64,
        ProfileKind::Analog => value + rng.random_range(-ANALOG_STEP..=ANALOG_STEP),
    }
}

fn non_inputs(net: &Network) -> Vec<NeuronId> {
    net.neurons
        .iter()
        .filter(|n| n.role != Role::Input)
        .map(|n| n.id)
        .collect()
}

/// Neurons with at least one incident synapse; only their parameters can
/// influence behaviour.
fn wired_neurons(net: &Network) -> Vec<NeuronId> {
    let ids: BTreeSet<NeuronId> = net.synapses.iter().flat_map(|s| [s.pre, s.post]).collect();
    ids.into_iter().collect()
}

fn free_edges(net: &Network) -> Vec<(NeuronId, NeuronId)> {
    let taken: BTreeSet<(NeuronId, NeuronId)> = net.synapses.iter().map(|s| (s.pre, s.post)).collect();
    let targets = non_inputs(net);
    net.neurons
        .iter()
        .flat_map(|a| targets.iter().map(move |&b| (a.id, b)))
        .filter(|e| !taken.contains(e))
        .collect()
}

/// Adds a hidden neuron fed by one random neuron and feeding one random
/// non-input neuron.
fn add_wired_hidden<R: Rng + ?Sized>(net: &mut Network, rng: &mut R) -> NeuronId {
    let sources: Vec<NeuronId> = net.neurons.iter().map(|n| n.id).collect();
    let targets = non_inputs(net);
    let threshold = random_threshold(&net.profile, rng);
    let position = net.profile.uses_positions().then(|| random_position(rng));
    let h = net.add_neuron(Role::Hidden, threshold, position);
    if let Some(&pre) = sources.choose(rng) {
        let (w, d) = (random_weight(&net.profile, rng), random_delay(&net.profile, rng));
        let _ = net.connect(pre, h, w, d);
    }
    if let Some(&post) = targets.choose(rng) {
        let (w, d) = (random_weight(&net.profile, rng), random_delay(&net.profile, rng));
        let _ = net.connect(h, post, w, d);
    }
    h
}

/// Initial population: each member is the template plus 0–3 wired hidden
/// neurons and, for every input, a forward synapse with probability 0.5.
pub fn init_population<R: Rng + ?Sized>(
    template: &Network,
    cfg: &EvolutionConfig,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    let violations = template.validate();
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    if template.hidden_count() > 0 || template.synapse_count() > 0 {
        return Err(Error::InvalidArgument(
            "template must contain only input and output neurons".into(),
        ));
    }
    let mut out = Vec::with_capacity(cfg.population_size);
    for _ in 0..cfg.population_size {
        let mut net = template.clone();
        for _ in 0..rng.random_range(0..=3) {
            add_wired_hidden(&mut net, rng);
        }
        for &input in &template.inputs {
            if rng.random_bool(0.5) {
                let targets: Vec<NeuronId> = non_inputs(&net)
                    .into_iter()
                    .filter(|&t| !net.has_edge(input, t))
                    .collect();
                if let Some(&post) = targets.choose(rng) {
                    let (w, d) = (random_weight(&net.profile, rng), random_delay(&net.profile, rng));
                    net.connect(input, post, w, d)?;
                }
            }
        }
        out.push(Individual::new(net));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MutationOp {
    PerturbWeight,
    PerturbThreshold,
    PerturbDelay,
    AddSynapse,
    DeleteSynapse,
    AddHiddenNeuron,
    DeleteHiddenNeuron,
}

impl MutationOp {
    pub const ALL: [MutationOp; 7] = [
        MutationOp::PerturbWeight,
        MutationOp::PerturbThreshold,
        MutationOp::PerturbDelay,
        MutationOp::AddSynapse,
        MutationOp::DeleteSynapse,
        MutationOp::AddHiddenNeuron,
        MutationOp::DeleteHiddenNeuron,
    ];

    pub fn applicable(self, net: &Network) -> bool {
        match self {
            MutationOp::PerturbWeight | MutationOp::DeleteSynapse | MutationOp::PerturbDelay => {
                !net.synapses.is_empty()
            }
            MutationOp::PerturbThreshold => !net.synapses.is_empty(),
            MutationOp::AddSynapse => !free_edges(net).is_empty(),
            MutationOp::AddHiddenNeuron => true,
            MutationOp::DeleteHiddenNeuron => net.hidden_count() > 0,
        }
    }

    fn apply<R: Rng + ?Sized>(self, net: &mut Network, rng: &mut R) {
        let profile = net.profile.clone();
        match self {
            MutationOp::PerturbWeight => {
                let i = rng.random_range(0..net.synapses.len());
                let w = nudge(net.synapses[i].weight, &profile, rng);
                net.synapses[i].weight = profile.quantize_weight(w);
            }
            MutationOp::PerturbThreshold => {
                let id = *wired_neurons(net).choose(rng).expect("applicable");
                let n = net.neuron_mut(id).expect("wired neuron exists");
                n.threshold = profile.quantize_threshold(nudge(n.threshold, &profile, rng));
            }
            MutationOp::PerturbDelay => {
                if profile.uses_positions() {
                    // delays follow positions, so move a wired neuron
                    let id = *wired_neurons(net).choose(rng).expect("applicable");
                    let old = net.neuron(id).and_then(|n| n.position).unwrap_or([0.5; 3]);
                    let moved = old.map(|c| (c + rng.random_range(-ANALOG_STEP..=ANALOG_STEP)).clamp(0.0, 1.0));
                    net.set_position(id, moved);
                } else {
                    let i = rng.random_range(0..net.synapses.len());
                    let step = *[-2i64, -1, 1, 2].choose(rng).unwrap();
                    net.synapses[i].delay = profile.clamp_delay(net.synapses[i].delay as i64 + step);
                }
            }
            MutationOp::AddSynapse => {
                let (pre, post) = *free_edges(net).choose(rng).expect("applicable");
                let (w, d) = (random_weight(&profile, rng), random_delay(&profile, rng));
                net.connect(pre, post, w, d).expect("free edge between existing neurons");
            }
            MutationOp::DeleteSynapse => {
                let i = rng.random_range(0..net.synapses.len());
                net.synapses.remove(i);
            }
            MutationOp::AddHiddenNeuron => {
                add_wired_hidden(net, rng);
            }
            MutationOp::DeleteHiddenNeuron => {
                let id = *net.hidden_ids().choose(rng).expect("applicable");
                net.remove_neuron(id);
            }
        }
    }
}

/// One operator drawn uniformly from those applicable to `network`, or
/// `None` with the network unchanged when nothing applies.
pub fn mutate_with_op<R: Rng + ?Sized>(network: &Network, rng: &mut R) -> (Network, Option<MutationOp>) {
    let ops: Vec<MutationOp> = MutationOp::ALL
        .iter()
        .copied()
        .filter(|op| op.applicable(network))
        .collect();
    let mut out = network.clone();
    match ops.choose(rng) {
        Some(&op) => {
            op.apply(&mut out, rng);
            (out, Some(op))
        }
        None => (out, None),
    }
}

pub fn mutate<R: Rng + ?Sized>(network: &Network, rng: &mut R) -> Network {
    mutate_with_op(network, rng).0
}

fn check_compatible(a: &Network, b: &Network) -> Result<()> {
    if a.profile != b.profile {
        return Err(Error::Profile("parents use different architecture profiles".into()));
    }
    if a.inputs != b.inputs || a.outputs != b.outputs {
        return Err(Error::Arity("parents do not share the same input/output scaffold".into()));
    }
    Ok(())
}

fn rebuild(
    profile: &ArchitectureProfile,
    inputs: &[NeuronId],
    outputs: &[NeuronId],
    neurons: Vec<crate::network::Neuron>,
    edges: BTreeMap<(NeuronId, NeuronId), (f64, u32)>,
) -> Network {
    let mut net = Network::empty(profile.clone());
    net.neurons = neurons;
    net.neurons.sort_by_key(|n| n.id);
    net.inputs = inputs.to_vec();
    net.outputs = outputs.to_vec();
    net.synapses = edges
        .into_iter()
        .enumerate()
        .map(|(i, ((pre, post), (weight, delay)))| crate::network::Synapse {
            id: i as u32,
            pre,
            post,
            weight,
            delay,
        })
        .collect();
    net.refresh_delays();
    net
}

/// Neurons are matched by id. Scaffold and shared hidden neurons are always
/// kept with parameters from a random parent; hidden neurons present in only
/// one parent survive with probability 0.5. Edges between surviving neurons
/// are kept, taking parameters from a random parent when both have them.
pub fn crossover<R: Rng + ?Sized>(a: &Network, b: &Network, rng: &mut R) -> Result<Network> {
    check_compatible(a, b)?;
    let ids: BTreeSet<NeuronId> = a.neurons.iter().chain(&b.neurons).map(|n| n.id).collect();
    let mut neurons = Vec::new();
    for id in ids {
        let picked = match (a.neuron(id), b.neuron(id)) {
            (Some(x), Some(y)) => Some(if rng.random_bool(0.5) { x } else { y }),
            (Some(x), None) | (None, Some(x)) => {
                if x.role != Role::Hidden || rng.random_bool(0.5) {
                    Some(x)
                } else {
                    None
                }
            }
            (None, None) => None,
        };
        if let Some(n) = picked {
            neurons.push(n.clone());
        }
    }
    let alive: BTreeSet<NeuronId> = neurons.iter().map(|n| n.id).collect();
    let ea = a.edge_map();
    let eb = b.edge_map();
    let keys: BTreeSet<(NeuronId, NeuronId)> = ea.keys().chain(eb.keys()).copied().collect();
    let mut edges = BTreeMap::new();
    for key in keys {
        if !alive.contains(&key.0) || !alive.contains(&key.1) {
            continue;
        }
        let params = match (ea.get(&key), eb.get(&key)) {
            (Some(&x), Some(&y)) => {
                if rng.random_bool(0.5) {
                    x
                } else {
                    y
                }
            }
            (Some(&x), None) | (None, Some(&x)) => x,
            (None, None) => continue,
        };
        edges.insert(key, params);
    }
    Ok(rebuild(&a.profile, &a.inputs, &a.outputs, neurons, edges))
}

/// Union of both parents: `a`'s scaffold and hidden neurons, then `b`'s
/// hidden neurons under fresh ids. Scaffold-to-scaffold edges present in both
/// take parameters from a random parent.
pub fn merge<R: Rng + ?Sized>(a: &Network, b: &Network, rng: &mut R) -> Result<Network> {
    check_compatible(a, b)?;
    let mut relabel: BTreeMap<NeuronId, NeuronId> = BTreeMap::new();
    let mut next = a.next_neuron_id().max(b.next_neuron_id());
    let mut neurons = a.neurons.clone();
    for n in &b.neurons {
        if n.role == Role::Hidden {
            relabel.insert(n.id, next);
            let mut copy = n.clone();
            copy.id = next;
            neurons.push(copy);
            next += 1;
        } else {
            relabel.insert(n.id, n.id);
        }
    }
    let mut edges = a.edge_map();
    for ((pre, post), params) in b.edge_map() {
        let key = (relabel[&pre], relabel[&post]);
        match edges.get_mut(&key) {
            Some(existing) => {
                if rng.random_bool(0.5) {
                    *existing = params;
                }
            }
            None => {
                edges.insert(key, params);
            }
        }
    }
    Ok(rebuild(&a.profile, &a.inputs, &a.outputs, neurons, edges))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub population_size: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub mean_hidden: f64,
    pub mean_synapses: f64,
    pub best_performance: f64,
    pub best_mean_variation_performance: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorCounts {
    pub offspring: u64,
    pub crossover: u64,
    pub merge: u64,
    pub mutation: u64,
}

#[derive(Clone, Debug)]
pub struct EvolutionOutcome {
    pub best: Individual,
    pub stats: Vec<GenerationStats>,
    pub operators: OperatorCounts,
    /// Final population, evaluated.
    pub population: Vec<Individual>,
}

/// Index of the fittest individual; the lowest index wins ties.
fn best_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate() {
        if ind.score() > pop[best].score() {
            best = i;
        }
    }
    best
}

fn tournament<R: Rng + ?Sized>(pop: &[Individual], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..size {
        let c = rng.random_range(0..pop.len());
        if pop[c].score() > pop[best].score() || (pop[c].score() == pop[best].score() && c < best) {
            best = c;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AppliedOps {
    pub crossover: bool,
    pub merge: bool,
    pub mutation: bool,
}

/// One offspring: tournament parent, then crossover, merge and mutation
/// each with its own independent draw.
pub fn make_offspring<R: Rng + ?Sized>(
    pop: &[Individual],
    cfg: &EvolutionConfig,
    rng: &mut R,
) -> Result<(Network, AppliedOps)> {
    let do_crossover = rng.random_bool(cfg.crossover_rate);
    let do_merge = rng.random_bool(cfg.merge_rate);
    let do_mutation = rng.random_bool(cfg.mutation_rate);
    let mut child = pop[tournament(pop, cfg.tournament_size, rng)].network.clone();
    if do_crossover {
        let other = &pop[tournament(pop, cfg.tournament_size, rng)].network;
        child = crossover(&child, other, rng)?;
    }
    if do_merge {
        let other = &pop[tournament(pop, cfg.tournament_size, rng)].network;
        child = merge(&child, other, rng)?;
    }
    if do_mutation {
        child = mutate(&child, rng);
    }
    Ok((
        child,
        AppliedOps {
            crossover: do_crossover,
            merge: do_merge,
            mutation: do_mutation,
        },
    ))
}

fn evaluate_population<E: Evaluator + ?Sized>(
    pop: &mut [Individual],
    evaluator: &E,
    fitness: &FitnessConfig,
    seed: u64,
    generation: usize,
) {
    pop.par_iter_mut()
        .enumerate()
        .filter(|(_, ind)| ind.fitness.is_none())
        .for_each(|(i, ind)| {
            let mut r = rng::stream(seed, &[tag::EVALUATE, generation as u64, i as u64]);
            match multi_objective_fitness(&ind.network, evaluator, fitness, &mut r) {
                Ok((f, detail)) => {
                    ind.fitness = Some(f);
                    ind.detail = Some(detail);
                }
                Err(e) => {
                    log::warn!("generation {generation}, individual {i}: evaluation failed: {e}");
                    ind.fitness = Some(f64::NEG_INFINITY);
                    ind.detail = None;
                }
            }
        });
}

fn generation_stats(pop: &[Individual], generation: usize) -> GenerationStats {
    let n = pop.len() as f64;
    let finite: Vec<f64> = pop.iter().map(|i| i.score()).filter(|f| f.is_finite()).collect();
    let best = &pop[best_index(pop)];
    GenerationStats {
        generation,
        population_size: pop.len(),
        best_fitness: best.score(),
        mean_fitness: if finite.is_empty() {
            f64::NEG_INFINITY
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        },
        mean_hidden: pop.iter().map(|i| i.network.hidden_count() as f64).sum::<f64>() / n,
        mean_synapses: pop.iter().map(|i| i.network.synapse_count() as f64).sum::<f64>() / n,
        best_performance: best.detail.as_ref().map_or(f64::NAN, |d| d.performance),
        best_mean_variation_performance: best
            .detail
            .as_ref()
            .and_then(|d| d.mean_variation_performance),
    }
}

/// Runs the genetic algorithm until `max_generations` breeding rounds have
/// happened or the best fitness reaches `target_fitness`.
pub fn evolve<E: Evaluator + ?Sized>(
    evaluator: &E,
    template: &Network,
    fitness: &FitnessConfig,
    cfg: &EvolutionConfig,
) -> Result<EvolutionOutcome> {
    cfg.validate()?;
    fitness.validate()?;
    fitness.variation_spec.check(&template.profile)?;
    if template.inputs.len() != evaluator.input_count()
        || template.outputs.len() != evaluator.output_count()
    {
        return Err(Error::Arity(format!(
            "template has {}/{} inputs/outputs, task needs {}/{}",
            template.inputs.len(),
            template.outputs.len(),
            evaluator.input_count(),
            evaluator.output_count()
        )));
    }

    let seed = cfg.master_seed;
    let mut pop = init_population(template, cfg, &mut rng::stream(seed, &[tag::INIT]))?;
    let mut stats = Vec::new();
    let mut operators = OperatorCounts::default();
    let mut generation = 0;
    loop {
        evaluate_population(&mut pop, evaluator, fitness, seed, generation);
        let s = generation_stats(&pop, generation);
        log::info!(
            "generation {generation}: best {:.4}, mean {:.4}, hidden {:.2}, synapses {:.2}",
            s.best_fitness,
            s.mean_fitness,
            s.mean_hidden,
            s.mean_synapses
        );
        let reached = cfg.target_fitness.is_some_and(|t| s.best_fitness >= t);
        stats.push(s);
        if reached || generation >= cfg.max_generations {
            break;
        }

        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&x, &y| pop[y].score().total_cmp(&pop[x].score()).then(x.cmp(&y)));
        let mut next: Vec<Individual> = order[..cfg.elitism].iter().map(|&i| pop[i].clone()).collect();
        let mut r = rng::stream(seed, &[tag::BREED, generation as u64]);
        while next.len() < cfg.population_size {
            let (child, ops) = make_offspring(&pop, cfg, &mut r)?;
            operators.offspring += 1;
            operators.crossover += ops.crossover as u64;
            operators.merge += ops.merge as u64;
            operators.mutation += ops.mutation as u64;
            next.push(Individual::new(child));
        }
        pop = next;
        generation += 1;
    }

    let best = pop[best_index(&pop)].clone();
    Ok(EvolutionOutcome {
        best,
        stats,
        operators,
        population: pop,
    })
}

pub const STATS_CSV_HEADER: [&str; 8] = [
    "generation",
    "population_size",
    "best_fitness",
    "mean_fitness",
    "mean_hidden",
    "mean_synapses",
    "best_performance",
    "best_mean_variation_performance",
];

pub fn write_stats_csv<W: Write>(stats: &[GenerationStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STATS_CSV_HEADER)?;
    for s in stats {
        w.write_record([
            s.generation.to_string(),
            s.population_size.to_string(),
            s.best_fitness.to_string(),
            s.mean_fitness.to_string(),
            s.mean_hidden.to_string(),
            s.mean_synapses.to_string(),
            s.best_performance.to_string(),
            s.best_mean_variation_performance
                .map(|v| v.to_string())
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
