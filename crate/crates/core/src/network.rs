//! Network graph, architecture profiles, validation and the JSON file format.
//!
//! A [`Network`] is a directed graph of integrate-and-fire neurons joined by
//! weighted, delayed synapses. Its [`ArchitectureProfile`] fixes the parameter
//! domains: the digital profile uses integer weights in `[-1024, 1024]`,
//! integer thresholds in `[0, 1023]` and explicit 4-bit delays; the analog
//! profile uses real weights in `[-1, 1]` and derives each synapse delay from
//! the distance between neuron positions in the unit cube.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NeuronId = u32;
pub type SynapseId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Digital,
    Analog,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelaySource {
    Explicit,
    Distance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureProfile {
    pub kind: ProfileKind,
    pub weight_min: f64,
    pub weight_max: f64,
    pub weight_is_integer: bool,
    pub threshold_min: f64,
    pub threshold_max: f64,
    pub delay_min: u32,
    pub delay_max: u32,
    pub delay_source: DelaySource,
    /// Timesteps per unit of Euclidean distance. Only meaningful for
    /// distance-derived delays.
    pub distance_to_delay_scale: f64,
}

impl ArchitectureProfile {
    pub fn digital() -> Self {
        Self {
            kind: ProfileKind::Digital,
            weight_min: -1024.0,
            weight_max: 1024.0,
            weight_is_integer: true,
            threshold_min: 0.0,
            threshold_max: 1023.0,
            delay_min: 1,
            delay_max: 15,
            delay_source: DelaySource::Explicit,
            distance_to_delay_scale: 0.0,
        }
    }

    pub fn analog() -> Self {
        Self::analog_with_scale(1.0)
    }

    /// Analog profile whose delays are `ceil(distance * scale)`, at least one
    /// timestep. Positions live in the unit cube so the largest delay is
    /// `ceil(sqrt(3) * scale)`.
    pub fn analog_with_scale(scale: f64) -> Self {
        let delay_max = ((3f64.sqrt() * scale).ceil() as u32).max(1);
        Self {
            kind: ProfileKind::Analog,
            weight_min: -1.0,
            weight_max: 1.0,
            weight_is_integer: false,
            threshold_min: 0.0,
            threshold_max: 1.0,
            delay_min: 1,
            delay_max,
            delay_source: DelaySource::Distance,
            distance_to_delay_scale: scale,
        }
    }

    pub fn for_kind(kind: ProfileKind) -> Self {
        match kind {
            ProfileKind::Digital => Self::digital(),
            ProfileKind::Analog => Self::analog(),
        }
    }

    /// Integer profiles round half away from zero, then every profile clamps
    /// to the weight bounds.
    pub fn quantize_weight(&self, w: f64) -> f64 {
        quantize(w, self.weight_is_integer, self.weight_min, self.weight_max)
    }

    pub fn quantize_threshold(&self, t: f64) -> f64 {
        quantize(
            t,
            self.weight_is_integer,
            self.threshold_min,
            self.threshold_max,
        )
    }

    pub fn clamp_delay(&self, delay: i64) -> u32 {
        delay.clamp(self.delay_min as i64, self.delay_max as i64) as u32
    }

    pub fn delay_for_distance(&self, distance: f64) -> u32 {
        let raw = (distance * self.distance_to_delay_scale).ceil();
        let raw = if raw.is_finite() { raw as i64 } else { 1 };
        self.clamp_delay(raw.max(1))
    }

    pub fn uses_positions(&self) -> bool {
        self.delay_source == DelaySource::Distance
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.weight_min < self.weight_max) {
            out.push("weight_min must be below weight_max".to_string());
        }
        if !(self.threshold_min <= self.threshold_max) {
            out.push("threshold_min must not exceed threshold_max".to_string());
        }
        if self.delay_min < 1 {
            out.push("delay_min must be at least 1".to_string());
        }
        if self.delay_min > self.delay_max {
            out.push("delay_min must not exceed delay_max".to_string());
        }
        if self.uses_positions() && !(self.distance_to_delay_scale > 0.0) {
            out.push("distance_to_delay_scale must be positive".to_string());
        }
        out
    }
}

/// Free-function form of [`ArchitectureProfile::quantize_weight`].
pub fn quantize_weight(w: f64, profile: &ArchitectureProfile) -> f64 {
    profile.quantize_weight(w)
}

fn quantize(v: f64, integer: bool, lo: f64, hi: f64) -> f64 {
    if v.is_nan() {
        return 0f64.clamp(lo, hi);
    }
    let v = if integer { v.round() } else { v };
    v.clamp(lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Input,
    Hidden,
    Output,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Neuron {
    pub id: NeuronId,
    pub role: Role,
    pub threshold: f64,
    pub refractory: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Synapse {
    pub id: SynapseId,
    pub pre: NeuronId,
    pub post: NeuronId,
    pub weight: f64,
    pub delay: u32,
}

pub const DEFAULT_REFRACTORY: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub profile: ArchitectureProfile,
    pub neurons: Vec<Neuron>,
    pub synapses: Vec<Synapse>,
    pub inputs: Vec<NeuronId>,
    pub outputs: Vec<NeuronId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Element {
    Network,
    Neuron(NeuronId),
    Synapse(SynapseId),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Network => write!(f, "network"),
            Element::Neuron(id) => write!(f, "neuron {id}"),
            Element::Synapse(id) => write!(f, "synapse {id}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ViolationKind {
    BadProfile(String),
    NoInputs,
    NoOutputs,
    DuplicateNeuronId,
    DuplicateSynapseId,
    DuplicateIo,
    UnknownIo,
    RoleMismatch,
    UndeclaredIo,
    DanglingSynapse,
    DuplicateEdge,
    NonFinite,
    WeightOutOfRange,
    WeightNotInteger,
    ThresholdOutOfRange,
    ThresholdNotInteger,
    DelayOutOfRange,
    DelayMismatch { expected: u32 },
    MissingPosition,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::BadProfile(msg) => write!(f, "bad profile: {msg}"),
            ViolationKind::NoInputs => write!(f, "no input neurons"),
            ViolationKind::NoOutputs => write!(f, "no output neurons"),
            ViolationKind::DuplicateNeuronId => write!(f, "duplicate neuron id"),
            ViolationKind::DuplicateSynapseId => write!(f, "duplicate synapse id"),
            ViolationKind::DuplicateIo => write!(f, "listed more than once as input/output"),
            ViolationKind::UnknownIo => write!(f, "input/output id does not exist"),
            ViolationKind::RoleMismatch => write!(f, "role does not match input/output list"),
            ViolationKind::UndeclaredIo => write!(f, "input/output neuron missing from its list"),
            ViolationKind::DanglingSynapse => write!(f, "dangling synapse"),
            ViolationKind::DuplicateEdge => write!(f, "duplicate (pre, post) edge"),
            ViolationKind::NonFinite => write!(f, "non-finite parameter"),
            ViolationKind::WeightOutOfRange => write!(f, "weight out of range"),
            ViolationKind::WeightNotInteger => write!(f, "weight not an integer"),
            ViolationKind::ThresholdOutOfRange => write!(f, "threshold out of range"),
            ViolationKind::ThresholdNotInteger => write!(f, "threshold not an integer"),
            ViolationKind::DelayOutOfRange => write!(f, "delay out of range"),
            ViolationKind::DelayMismatch { expected } => {
                write!(f, "delay does not match neuron distance (expected {expected})")
            }
            ViolationKind::MissingPosition => write!(f, "missing position"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub element: Element,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.kind)
    }
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn random_position<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    [rng.random(), rng.random(), rng.random()]
}

impl Network {
    pub fn empty(profile: ArchitectureProfile) -> Self {
        Self {
            profile,
            neurons: Vec::new(),
            synapses: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Input/output scaffold with no hidden neurons and no synapses. Inputs
    /// get the lowest threshold so any injected charge makes them fire;
    /// outputs sit at the middle of the threshold range.
    pub fn scaffold<R: Rng + ?Sized>(
        profile: ArchitectureProfile,
        num_inputs: usize,
        num_outputs: usize,
        rng: &mut R,
    ) -> Self {
        let mut net = Self::empty(profile);
        let input_threshold = net.profile.threshold_min;
        let output_threshold = net
            .profile
            .quantize_threshold((net.profile.threshold_min + net.profile.threshold_max) / 2.0);
        for _ in 0..num_inputs {
            let pos = net.profile.uses_positions().then(|| random_position(rng));
            net.add_neuron(Role::Input, input_threshold, pos);
        }
        for _ in 0..num_outputs {
            let pos = net.profile.uses_positions().then(|| random_position(rng));
            net.add_neuron(Role::Output, output_threshold, pos);
        }
        net
    }

    pub fn neuron(&self, id: NeuronId) -> Option<&Neuron> {
        self.neurons.iter().find(|n| n.id == id)
    }

    pub fn neuron_mut(&mut self, id: NeuronId) -> Option<&mut Neuron> {
        self.neurons.iter_mut().find(|n| n.id == id)
    }

    pub fn synapse(&self, id: SynapseId) -> Option<&Synapse> {
        self.synapses.iter().find(|s| s.id == id)
    }

    pub fn synapse_mut(&mut self, id: SynapseId) -> Option<&mut Synapse> {
        self.synapses.iter_mut().find(|s| s.id == id)
    }

    pub fn hidden_ids(&self) -> Vec<NeuronId> {
        self.neurons
            .iter()
            .filter(|n| n.role == Role::Hidden)
            .map(|n| n.id)
            .collect()
    }

    pub fn hidden_count(&self) -> usize {
        self.neurons.iter().filter(|n| n.role == Role::Hidden).count()
    }

    pub fn neuron_count(&self) -> usize {
        self.neurons.len()
    }

    pub fn synapse_count(&self) -> usize {
        self.synapses.len()
    }

    pub fn next_neuron_id(&self) -> NeuronId {
        self.neurons.iter().map(|n| n.id + 1).max().unwrap_or(0)
    }

    pub fn next_synapse_id(&self) -> SynapseId {
        self.synapses.iter().map(|s| s.id + 1).max().unwrap_or(0)
    }

    pub fn has_edge(&self, pre: NeuronId, post: NeuronId) -> bool {
        self.synapses.iter().any(|s| s.pre == pre && s.post == post)
    }

    /// Adds a neuron and returns its id. Input and output neurons are
    /// appended to the matching id list.
    pub fn add_neuron(
        &mut self,
        role: Role,
        threshold: f64,
        position: Option<[f64; 3]>,
    ) -> NeuronId {
        let id = self.next_neuron_id();
        let threshold = self.profile.quantize_threshold(threshold);
        self.neurons.push(Neuron {
            id,
            role,
            threshold,
            refractory: DEFAULT_REFRACTORY,
            position,
        });
        match role {
            Role::Input => self.inputs.push(id),
            Role::Output => self.outputs.push(id),
            Role::Hidden => {}
        }
        id
    }

    /// Delay a synapse between `pre` and `post` must have under a
    /// distance-derived profile.
    pub fn derived_delay(&self, pre: NeuronId, post: NeuronId) -> Option<u32> {
        let a = self.neuron(pre)?.position?;
        let b = self.neuron(post)?.position?;
        Some(self.profile.delay_for_distance(distance(a, b)))
    }

    /// Adds a synapse with a quantized weight. Under distance-derived delays
    /// the `delay` argument is ignored and recomputed from the positions.
    pub fn connect(
        &mut self,
        pre: NeuronId,
        post: NeuronId,
        weight: f64,
        delay: u32,
    ) -> Result<SynapseId> {
        if self.neuron(pre).is_none() || self.neuron(post).is_none() {
            return Err(Error::InvalidArgument(format!(
                "cannot connect {pre} -> {post}: missing endpoint"
            )));
        }
        if self.has_edge(pre, post) {
            return Err(Error::InvalidArgument(format!(
                "edge {pre} -> {post} already exists"
            )));
        }
        let delay = if self.profile.uses_positions() {
            self.derived_delay(pre, post).ok_or_else(|| {
                Error::InvalidArgument(format!("edge {pre} -> {post}: endpoint has no position"))
            })?
        } else {
            self.profile.clamp_delay(delay as i64)
        };
        let id = self.next_synapse_id();
        let weight = self.profile.quantize_weight(weight);
        self.synapses.push(Synapse {
            id,
            pre,
            post,
            weight,
            delay,
        });
        Ok(id)
    }

    pub fn remove_synapse(&mut self, id: SynapseId) -> bool {
        let before = self.synapses.len();
        self.synapses.retain(|s| s.id != id);
        before != self.synapses.len()
    }

    /// Removes a neuron with all of its incident synapses.
    pub fn remove_neuron(&mut self, id: NeuronId) -> bool {
        let before = self.neurons.len();
        self.neurons.retain(|n| n.id != id);
        if before == self.neurons.len() {
            return false;
        }
        self.synapses.retain(|s| s.pre != id && s.post != id);
        self.inputs.retain(|&i| i != id);
        self.outputs.retain(|&o| o != id);
        true
    }

    /// Moves a neuron and refreshes the delays of its incident synapses.
    pub fn set_position(&mut self, id: NeuronId, position: [f64; 3]) {
        if let Some(n) = self.neuron_mut(id) {
            n.position = Some(position);
        }
        self.refresh_delays();
    }

    pub fn refresh_delays(&mut self) {
        if !self.profile.uses_positions() {
            return;
        }
        let delays: Vec<Option<u32>> = self
            .synapses
            .iter()
            .map(|s| self.derived_delay(s.pre, s.post))
            .collect();
        for (s, d) in self.synapses.iter_mut().zip(delays) {
            if let Some(d) = d {
                s.delay = d;
            }
        }
    }

    /// `(pre, post) -> (weight, delay)` view, independent of synapse ids.
    pub fn edge_map(&self) -> BTreeMap<(NeuronId, NeuronId), (f64, u32)> {
        self.synapses
            .iter()
            .map(|s| ((s.pre, s.post), (s.weight, s.delay)))
            .collect()
    }

    /// Same profile, neurons and edges, ignoring synapse ids and ordering.
    pub fn structurally_eq(&self, other: &Network) -> bool {
        let mut a = self.neurons.clone();
        let mut b = other.neurons.clone();
        a.sort_by_key(|n| n.id);
        b.sort_by_key(|n| n.id);
        self.profile == other.profile
            && a == b
            && self.inputs == other.inputs
            && self.outputs == other.outputs
            && self.edge_map() == other.edge_map()
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Every invariant violation, each tagged with the offending element.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |element, kind| out.push(Violation { element, kind });
        let p = &self.profile;

        for msg in p.problems() {
            push(Element::Network, ViolationKind::BadProfile(msg));
        }
        if self.inputs.is_empty() {
            push(Element::Network, ViolationKind::NoInputs);
        }
        if self.outputs.is_empty() {
            push(Element::Network, ViolationKind::NoOutputs);
        }

        let mut seen = HashSet::new();
        for n in &self.neurons {
            if !seen.insert(n.id) {
                push(Element::Neuron(n.id), ViolationKind::DuplicateNeuronId);
            }
            if !n.threshold.is_finite() {
                push(Element::Neuron(n.id), ViolationKind::NonFinite);
                continue;
            }
            if n.threshold < p.threshold_min || n.threshold > p.threshold_max {
                push(Element::Neuron(n.id), ViolationKind::ThresholdOutOfRange);
            }
            if p.weight_is_integer && n.threshold.fract() != 0.0 {
                push(Element::Neuron(n.id), ViolationKind::ThresholdNotInteger);
            }
            if p.uses_positions() {
                match n.position {
                    None => push(Element::Neuron(n.id), ViolationKind::MissingPosition),
                    Some(pos) if pos.iter().any(|c| !c.is_finite()) => {
                        push(Element::Neuron(n.id), ViolationKind::NonFinite)
                    }
                    _ => {}
                }
            }
        }

        let mut io_seen = HashSet::new();
        for (list, role) in [(&self.inputs, Role::Input), (&self.outputs, Role::Output)] {
            for &id in list.iter() {
                if !io_seen.insert(id) {
                    push(Element::Neuron(id), ViolationKind::DuplicateIo);
                }
                match self.neuron(id) {
                    None => push(Element::Neuron(id), ViolationKind::UnknownIo),
                    Some(n) if n.role != role => {
                        push(Element::Neuron(id), ViolationKind::RoleMismatch)
                    }
                    _ => {}
                }
            }
        }
        for n in &self.neurons {
            let listed = match n.role {
                Role::Input => self.inputs.contains(&n.id),
                Role::Output => self.outputs.contains(&n.id),
                Role::Hidden => true,
            };
            if !listed {
                push(Element::Neuron(n.id), ViolationKind::UndeclaredIo);
            }
        }

        let mut syn_seen = HashSet::new();
        let mut edges = HashSet::new();
        for s in &self.synapses {
            let el = Element::Synapse(s.id);
            if !syn_seen.insert(s.id) {
                push(el, ViolationKind::DuplicateSynapseId);
            }
            if self.neuron(s.pre).is_none() || self.neuron(s.post).is_none() {
                push(el, ViolationKind::DanglingSynapse);
            }
            if !edges.insert((s.pre, s.post)) {
                push(el, ViolationKind::DuplicateEdge);
            }
            if !s.weight.is_finite() {
                push(el, ViolationKind::NonFinite);
            } else {
                if s.weight < p.weight_min || s.weight > p.weight_max {
                    push(el, ViolationKind::WeightOutOfRange);
                }
                if p.weight_is_integer && s.weight.fract() != 0.0 {
                    push(el, ViolationKind::WeightNotInteger);
                }
            }
            if s.delay < p.delay_min || s.delay > p.delay_max {
                push(el, ViolationKind::DelayOutOfRange);
            }
            if p.uses_positions() {
                if let Some(expected) = self.derived_delay(s.pre, s.post) {
                    if expected != s.delay {
                        push(el, ViolationKind::DelayMismatch { expected });
                    }
                }
            }
        }
        out
    }

    /// Pretty-printed JSON document. Refuses to write invalid networks.
    pub fn to_json(&self) -> Result<String> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates a network document.
    pub fn from_json(text: &str) -> Result<Network> {
        let mut de = serde_json::Deserializer::from_str(text);
        let net: Network = match serde_path_to_error::deserialize(&mut de) {
            Ok(net) => net,
            Err(err) => {
                let path = err.path().to_string();
                let inner = err.into_inner();
                let message = if inner.is_eof() {
                    truncation_message(text)
                } else if path.is_empty() || path == "." {
                    inner.to_string()
                } else {
                    format!("at `{path}`: {inner}")
                };
                return Err(Error::Parse {
                    line: inner.line(),
                    column: inner.column(),
                    message,
                });
            }
        };
        de.end().map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let violations = net.validate();
        if !violations.is_empty() {
            return Err(Error::Invalid(violations));
        }
        Ok(net)
    }
}

const SECTIONS: [&str; 5] = ["profile", "neurons", "synapses", "inputs", "outputs"];

/// Describes where a truncated document stopped: the top-level section that
/// was being read and the sections that never started.
fn truncation_message(text: &str) -> String {
    let keys = top_level_keys(text);
    let missing: Vec<&str> = SECTIONS
        .iter()
        .copied()
        .filter(|s| !keys.iter().any(|k| k == s))
        .collect();
    let mut msg = String::from("unexpected end of input");
    if let Some(last) = keys.last() {
        msg.push_str(&format!(" inside section `{last}`"));
    }
    if !missing.is_empty() {
        msg.push_str(&format!("; missing sections: {}", missing.join(", ")));
    }
    msg
}

fn top_level_keys(text: &str) -> Vec<String> {
    let mut keys = Vec::new();
    let mut depth = 0usize;
    let mut expect_key = false;
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '{' | '[' => {
                depth += 1;
                expect_key = depth == 1 && c == '{';
            }
            '}' | ']' => depth = depth.saturating_sub(1),
            ',' if depth == 1 => expect_key = true,
            '"' => {
                let mut s = String::new();
                let mut escaped = false;
                for c in chars.by_ref() {
                    if escaped {
                        escaped = false;
                    } else if c == '\\' {
                        escaped = true;
                    } else if c == '"' {
                        break;
                    }
                    s.push(c);
                }
                if depth == 1 && expect_key {
                    keys.push(s);
                    expect_key = false;
                }
            }
            _ => {}
        }
    }
    keys
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn minimal(profile: ArchitectureProfile) -> Network {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        Network::scaffold(profile, 1, 1, &mut rng)
    }

    #[test]
    fn minimal_network_is_valid() {
        assert!(minimal(ArchitectureProfile::digital()).validate().is_empty());
        assert!(minimal(ArchitectureProfile::analog()).validate().is_empty());
    }

    #[test]
    fn dangling_synapse_reported() {
        let mut net = minimal(ArchitectureProfile::digital());
        net.synapses.push(Synapse {
            id: 7,
            pre: 0,
            post: 99,
            weight: 1.0,
            delay: 1,
        });
        let v = net.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].element, Element::Synapse(7));
        assert_eq!(v[0].kind, ViolationKind::DanglingSynapse);
        assert!(v[0].to_string().contains("dangling synapse"));
    }

    #[test]
    fn digital_weight_out_of_range() {
        let mut net = minimal(ArchitectureProfile::digital());
        net.synapses.push(Synapse {
            id: 0,
            pre: 0,
            post: 1,
            weight: 2000.0,
            delay: 1,
        });
        let v = net.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::WeightOutOfRange);
    }

    #[test]
    fn io_role_checks() {
        let mut net = minimal(ArchitectureProfile::digital());
        net.outputs.push(0);
        let kinds: Vec<_> = net.validate().into_iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::DuplicateIo));
        assert!(kinds.contains(&ViolationKind::RoleMismatch));

        let mut net = minimal(ArchitectureProfile::digital());
        net.outputs.clear();
        let kinds: Vec<_> = net.validate().into_iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::NoOutputs));
        assert!(kinds.contains(&ViolationKind::UndeclaredIo));
    }

    #[test]
    fn quantize_examples() {
        let d = ArchitectureProfile::digital();
        let a = ArchitectureProfile::analog();
        assert_eq!(d.quantize_weight(0.0), 0.0);
        assert_eq!(d.quantize_weight(1500.0), 1024.0);
        assert_eq!(d.quantize_weight(-0.5), -1.0);
        assert_eq!(d.quantize_weight(0.5), 1.0);
        assert_eq!(d.quantize_weight(-2000.0), -1024.0);
        assert_eq!(a.quantize_weight(1.3), 1.0);
        assert_eq!(a.quantize_weight(-0.25), -0.25);
        assert_eq!(quantize_weight(2.4, &d), 2.0);
    }

    #[test]
    fn analog_delays_follow_distance() {
        let mut net = Network::empty(ArchitectureProfile::analog_with_scale(4.0));
        let a = net.add_neuron(Role::Input, 0.0, Some([0.0, 0.0, 0.0]));
        let b = net.add_neuron(Role::Output, 0.5, Some([1.0, 0.0, 0.0]));
        let c = net.add_neuron(Role::Hidden, 0.5, Some([0.1, 0.0, 0.0]));
        let ab = net.connect(a, b, 0.5, 99).unwrap();
        let ac = net.connect(a, c, 0.5, 99).unwrap();
        assert_eq!(net.synapse(ab).unwrap().delay, 4);
        assert_eq!(net.synapse(ac).unwrap().delay, 1);
        net.set_position(c, [0.6, 0.0, 0.0]);
        assert_eq!(net.synapse(ac).unwrap().delay, 3);
        assert!(net.is_valid());

        net.synapse_mut(ab).unwrap().delay = 2;
        let v = net.validate();
        assert_eq!(v[0].kind, ViolationKind::DelayMismatch { expected: 4 });
    }

    #[test]
    fn connect_rejects_duplicate_edge() {
        let mut net = minimal(ArchitectureProfile::digital());
        net.connect(0, 1, 10.0, 1).unwrap();
        assert!(net.connect(0, 1, 20.0, 1).is_err());
        net.connect(1, 1, 5.0, 3).unwrap();
        assert!(net.is_valid());
    }

    #[test]
    fn remove_neuron_drops_incident_synapses() {
        let mut net = minimal(ArchitectureProfile::digital());
        let h = net.add_neuron(Role::Hidden, 10.0, None);
        net.connect(0, h, 100.0, 2).unwrap();
        net.connect(h, 1, 100.0, 2).unwrap();
        net.connect(0, 1, 100.0, 2).unwrap();
        assert!(net.remove_neuron(h));
        assert_eq!(net.synapse_count(), 1);
        assert!(net.is_valid());
    }

    #[test]
    fn json_round_trip_minimal() {
        let mut net = minimal(ArchitectureProfile::digital());
        net.connect(0, 1, -300.0, 4).unwrap();
        let text = net.to_json().unwrap();
        let back = Network::from_json(&text).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn truncated_document_names_missing_section() {
        let mut net = minimal(ArchitectureProfile::digital());
        net.connect(0, 1, -300.0, 4).unwrap();
        let text = net.to_json().unwrap();
        let cut = text.find("\"synapses\"").unwrap() + 20;
        let err = Network::from_json(&text[..cut]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("synapses"), "{msg}");
        assert!(msg.contains("missing sections: inputs, outputs"), "{msg}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let net = minimal(ArchitectureProfile::digital());
        let mut value: serde_json::Value = serde_json::from_str(&net.to_json().unwrap()).unwrap();
        value["extra"] = serde_json::json!(1);
        let err = Network::from_json(&value.to_string()).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");

        value.as_object_mut().unwrap().remove("extra");
        value["neurons"][0]["colour"] = serde_json::json!("red");
        let err = Network::from_json(&value.to_string()).unwrap_err();
        assert!(err.to_string().contains("neurons[0]"), "{err}");
    }

    #[test]
    fn post_parse_validation_reports_violations() {
        let net = minimal(ArchitectureProfile::digital());
        let mut value: serde_json::Value = serde_json::from_str(&net.to_json().unwrap()).unwrap();
        value["synapses"] = serde_json::json!([
            {"id": 0, "pre": 0, "post": 99, "weight": 1.0, "delay": 1}
        ]);
        match Network::from_json(&value.to_string()) {
            Err(Error::Invalid(v)) => assert_eq!(v[0].kind, ViolationKind::DanglingSynapse),
            other => panic!("expected violations, got {other:?}"),
        }
    }
}
