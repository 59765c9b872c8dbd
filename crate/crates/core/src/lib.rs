//! Spiking neural network neuroevolution with size and resilience
//! objectives, fault injection and frequency-based pruning.

pub mod encoding;
pub mod env;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod fitness;
pub mod network;
pub mod perturbation;
pub mod pruning;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
pub use network::{ArchitectureProfile, Network, NeuronId, ProfileKind, Role, SynapseId};
