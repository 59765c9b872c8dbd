use thiserror::Error;

use crate::network::{NeuronId, SynapseId, Violation};

#[derive(Debug, Error)]
pub enum Error {
    #[error("network is invalid: {}", format_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("neuron {0} is not a declared input")]
    NotAnInput(NeuronId),

    #[error("neuron {0} was not recorded")]
    UnknownNeuron(NeuronId),

    #[error("unknown synapse {0}")]
    UnknownSynapse(SynapseId),

    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("profile mismatch: {0}")]
    Profile(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty split")]
    EmptySplit,

    #[error("network has {have} synapses but the sweep samples up to {need}")]
    TooFewSynapses { have: usize, need: usize },

    #[error("evaluation of variation {index} failed: {source}")]
    Variation {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
