//! Benchmark tasks: cart-pole balancing and synthetic signal classification.

pub mod cartpole;
pub mod signals;

use crate::error::Result;
use crate::network::{Network, NeuronId};

pub use cartpole::{
    cartpole_step, run_pb_episode, CartPoleConfig, CartPoleState, PoleBalanceTask,
};
pub use signals::{
    generate_signal_dataset, run_classification, ClassificationDataset, ClassificationTask,
    SignalConfig, Split,
};

/// Fire counts gathered while running a task's probe workload.
#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub duration: u64,
    pub counts: Vec<(NeuronId, u64)>,
}

impl Probe {
    pub fn frequency(&self, id: NeuronId) -> Option<f64> {
        let (_, c) = self.counts.iter().find(|(n, _)| *n == id)?;
        Some(if self.duration == 0 {
            0.0
        } else {
            *c as f64 / self.duration as f64
        })
    }
}

/// Scores a network on a task. Implementations are deterministic.
pub trait Evaluator: Send + Sync {
    fn evaluate(&self, network: &Network) -> Result<f64>;

    fn probe(&self, network: &Network) -> Result<Probe>;

    /// Best achievable score, used by the degradation metric.
    fn optimal_performance(&self) -> f64;

    fn input_count(&self) -> usize;

    fn output_count(&self) -> usize;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, network: &Network) -> Result<f64> {
        (**self).evaluate(network)
    }

    fn probe(&self, network: &Network) -> Result<Probe> {
        (**self).probe(network)
    }

    fn optimal_performance(&self) -> f64 {
        (**self).optimal_performance()
    }

    fn input_count(&self) -> usize {
        (**self).input_count()
    }

    fn output_count(&self) -> usize {
        (**self).output_count()
    }
}
