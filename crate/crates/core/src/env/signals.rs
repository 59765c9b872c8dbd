use std::io::{Read, Write};
use std::sync::Arc;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::encoding::{decide, rate_encode, Decision, DecoderConfig, FeatureRange, RateEncoderConfig};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::rng;
use crate::simulator::Simulator;

use super::{Evaluator, Probe};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalConfig {
    pub num_samples: usize,
    pub num_classes: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub feature_len: usize,
    /// Cycles per sample window of class 0.
    pub base_cycles: f64,
    /// Extra cycles per window for each successive class.
    pub cycle_spacing: f64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            num_samples: 500,
            num_classes: 2,
            noise_sigma: 0.5,
            seed: 0,
            feature_len: 64,
            base_cycles: 1.0,
            cycle_spacing: 0.1,
        }
    }
}

impl SignalConfig {
    pub fn class_cycles(&self, class: usize) -> f64 {
        self.base_cycles + class as f64 * self.cycle_spacing
    }

    /// Noise-free signal of a class.
    pub fn template(&self, class: usize) -> Vec<f64> {
        let f = self.class_cycles(class);
        (0..self.feature_len)
            .map(|i| (std::f64::consts::TAU * f * i as f64 / self.feature_len as f64).sin())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationDataset {
    pub samples: Vec<Sample>,
    pub num_classes: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl ClassificationDataset {
    /// Sample `i` goes to the test split when `(i / num_classes) % 5 == 4`,
    /// which keeps both splits class-balanced for cyclic labels.
    pub fn from_samples(samples: Vec<Sample>, num_classes: usize) -> Self {
        let k = num_classes.max(1);
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..samples.len()).partition(|i| (i / k) % 5 == 4);
        Self {
            samples,
            num_classes,
            train,
            test,
        }
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        match split {
            Split::Train => self.train.clone(),
            Split::Test => self.test.clone(),
            Split::All => (0..self.samples.len()).collect(),
        }
    }

    pub fn feature_len(&self) -> usize {
        self.samples.first().map_or(0, |s| s.features.len())
    }

    /// CSV with columns `f0..f{n-1},label`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.feature_len()).map(|i| format!("f{i}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.features.iter().map(|v| v.to_string()).collect();
            row.push(s.label.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.iter().last() != Some("label") {
            return Err(Error::InvalidArgument("last CSV column must be `label`".into()));
        }
        let mut samples = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse_err = |col: usize, e: &dyn std::fmt::Display| Error::Parse {
                line: row + 2,
                column: col + 1,
                message: e.to_string(),
            };
            let n = rec.len();
            let features = rec
                .iter()
                .take(n - 1)
                .enumerate()
                .map(|(c, v)| v.parse::<f64>().map_err(|e| parse_err(c, &e)))
                .collect::<Result<Vec<f64>>>()?;
            let label = rec[n - 1].parse::<usize>().map_err(|e| parse_err(n - 1, &e))?;
            samples.push(Sample { features, label });
        }
        let num_classes = samples.iter().map(|s| s.label + 1).max().unwrap_or(0);
        Ok(Self::from_samples(samples, num_classes))
    }
}

/// Class `k` is a sine of `base + k * spacing` cycles per window plus white
/// Gaussian noise. Labels cycle through the classes.
pub fn generate_signal_dataset(
    num_samples: usize,
    num_classes: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<ClassificationDataset> {
    generate_signals(&SignalConfig {
        num_samples,
        num_classes,
        noise_sigma,
        seed,
        ..Default::default()
    })
}

pub fn generate_signals(cfg: &SignalConfig) -> Result<ClassificationDataset> {
    if cfg.num_classes < 2 {
        return Err(Error::InvalidArgument("need at least 2 classes".into()));
    }
    let noise = Normal::new(0.0, cfg.noise_sigma)
        .map_err(|e| Error::InvalidArgument(format!("noise_sigma: {e}")))?;
    let templates: Vec<Vec<f64>> = (0..cfg.num_classes).map(|k| cfg.template(k)).collect();
    let mut r = rng::stream(cfg.seed, &[]);
    let samples = (0..cfg.num_samples)
        .map(|i| {
            let label = i % cfg.num_classes;
            let features = templates[label]
                .iter()
                .map(|&v| v + noise.sample(&mut r))
                .collect();
            Sample { features, label }
        })
        .collect();
    Ok(ClassificationDataset::from_samples(samples, cfg.num_classes))
}

struct Outcome {
    correct: usize,
    total: usize,
    counts: Vec<u64>,
    sim_steps: u64,
}

fn classify(
    network: &Network,
    enc: &RateEncoderConfig,
    dec: &DecoderConfig,
    dataset: &ClassificationDataset,
    split: Split,
    keep_counts: bool,
) -> Result<Outcome> {
    if enc.features.len() != dataset.feature_len() {
        return Err(Error::Arity(format!(
            "encoder has {} features, samples have {}",
            enc.features.len(),
            dataset.feature_len()
        )));
    }
    if network.outputs.len() != dataset.num_classes {
        return Err(Error::Arity(format!(
            "network has {} outputs for {} classes",
            network.outputs.len(),
            dataset.num_classes
        )));
    }
    dec.check_outputs(&network.outputs)?;
    let indices = dataset.indices(split);
    if indices.is_empty() {
        return Err(Error::EmptySplit);
    }
    let mut sim = Simulator::new(network)?;
    let mut out = Outcome {
        correct: 0,
        total: indices.len(),
        counts: if keep_counts { vec![0; network.neurons.len()] } else { Vec::new() },
        sim_steps: 0,
    };
    let out_idx: Vec<usize> = network
        .outputs
        .iter()
        .map(|&id| sim.index_of(id).expect("validated output"))
        .collect();
    let mut counts = Vec::new();
    let mut out_counts = vec![0u32; out_idx.len()];
    for i in indices {
        let sample = &dataset.samples[i];
        sim.reset();
        let schedule = rate_encode(&sample.features, enc, &network.inputs)?;
        sim.run_window_counts(&schedule, enc.window, &mut counts)?;
        out.sim_steps += enc.window as u64;
        if keep_counts {
            for (total, &c) in out.counts.iter_mut().zip(&counts) {
                *total += c as u64;
            }
        }
        for (o, &j) in out_counts.iter_mut().zip(&out_idx) {
            *o = counts[j];
        }
        if let Decision::Label(label) = decide(&out_counts, dec) {
            if label == sample.label {
                out.correct += 1;
            }
        }
    }
    Ok(out)
}

/// Fraction of the split classified correctly, each sample simulated from
/// a reset network.
pub fn run_classification(
    network: &Network,
    enc: &RateEncoderConfig,
    dec: &DecoderConfig,
    dataset: &ClassificationDataset,
    split: Split,
) -> Result<f64> {
    let o = classify(network, enc, dec, dataset, split, false)?;
    Ok(o.correct as f64 / o.total as f64)
}

pub fn default_encoder(feature_len: usize, amplitude: f64, charge_per_spike: f64) -> RateEncoderConfig {
    RateEncoderConfig {
        features: vec![FeatureRange::new(-amplitude, amplitude); feature_len],
        window: 10,
        max_rate: 10,
        charge_per_spike,
    }
}

#[derive(Clone, Debug)]
pub struct ClassificationTask {
    pub encoder: RateEncoderConfig,
    pub decoder: DecoderConfig,
    pub dataset: Arc<ClassificationDataset>,
    pub split: Split,
}

impl Evaluator for ClassificationTask {
    fn evaluate(&self, network: &Network) -> Result<f64> {
        run_classification(network, &self.encoder, &self.decoder, &self.dataset, self.split)
    }

    /// Fire counts accumulated over the task's split.
    fn probe(&self, network: &Network) -> Result<Probe> {
        let o = classify(network, &self.encoder, &self.decoder, &self.dataset, self.split, true)?;
        Ok(Probe {
            duration: o.sim_steps,
            counts: network.neurons.iter().map(|n| n.id).zip(o.counts).collect(),
        })
    }

    fn optimal_performance(&self) -> f64 {
        1.0
    }

    fn input_count(&self) -> usize {
        self.encoder.features.len()
    }

    fn output_count(&self) -> usize {
        self.dataset.num_classes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ArchitectureProfile;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Nearest-template classifier by squared distance.
    fn oracle_accuracy(ds: &ClassificationDataset, cfg: &SignalConfig) -> f64 {
        let templates: Vec<Vec<f64>> = (0..ds.num_classes).map(|k| cfg.template(k)).collect();
        let correct = ds
            .samples
            .iter()
            .filter(|s| {
                let dist = |t: &Vec<f64>| -> f64 {
                    t.iter().zip(&s.features).map(|(a, b)| (a - b) * (a - b)).sum()
                };
                let best = (0..templates.len())
                    .min_by(|&a, &b| dist(&templates[a]).total_cmp(&dist(&templates[b])))
                    .unwrap();
                best == s.label
            })
            .count();
        correct as f64 / ds.samples.len() as f64
    }

    /// Classifies by the frequency whose sine correlates best with the sample.
    fn nearest_frequency_accuracy(ds: &ClassificationDataset, cfg: &SignalConfig) -> f64 {
        let correct = ds
            .samples
            .iter()
            .filter(|s| {
                let corr = |k: usize| -> f64 {
                    let t = cfg.template(k);
                    let dot: f64 = t.iter().zip(&s.features).map(|(a, b)| a * b).sum();
                    dot / t.iter().map(|v| v * v).sum::<f64>().sqrt()
                };
                let best = (0..ds.num_classes)
                    .max_by(|&a, &b| corr(a).total_cmp(&corr(b)))
                    .unwrap();
                best == s.label
            })
            .count();
        correct as f64 / ds.samples.len() as f64
    }

    #[test]
    fn noiseless_dataset_is_separable() {
        let ds = generate_signal_dataset(200, 3, 0.0, 9).unwrap();
        let cfg = SignalConfig {
            num_classes: 3,
            ..Default::default()
        };
        assert_eq!(nearest_frequency_accuracy(&ds, &cfg), 1.0);
        assert_eq!(oracle_accuracy(&ds, &cfg), 1.0);
    }

    #[test]
    fn noisy_dataset_is_imperfect_but_learnable() {
        let ds = generate_signal_dataset(500, 2, 0.5, 1).unwrap();
        let acc = oracle_accuracy(&ds, &SignalConfig::default());
        assert!(acc > 0.5 && acc < 1.0, "{acc}");
    }

    #[test]
    fn generation_is_deterministic_and_split_is_balanced() {
        let a = generate_signal_dataset(100, 2, 0.3, 5).unwrap();
        let b = generate_signal_dataset(100, 2, 0.3, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_signal_dataset(100, 2, 0.3, 6).unwrap());
        assert_eq!(a.train.len() + a.test.len(), 100);
        let zeros = a.test.iter().filter(|&&i| a.samples[i].label == 0).count();
        assert_eq!(zeros * 2, a.test.len());
        assert!(generate_signal_dataset(10, 1, 0.3, 5).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let a = generate_signal_dataset(20, 2, 0.3, 5).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("f0,f1,"));
        assert!(text.lines().next().unwrap().ends_with(",label"));
        let b = ClassificationDataset::read_csv(buf.as_slice()).unwrap();
        assert_eq!(a, b);
    }

    fn task(ds: ClassificationDataset, split: Split) -> ClassificationTask {
        ClassificationTask {
            encoder: default_encoder(ds.feature_len(), 1.5, 1024.0),
            decoder: DecoderConfig::argmax(),
            dataset: Arc::new(ds),
            split,
        }
    }

    #[test]
    fn silent_network_scores_label_zero_fraction() {
        let ds = generate_signal_dataset(100, 2, 0.3, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Network::scaffold(ArchitectureProfile::digital(), 64, 2, &mut rng);
        for split in [Split::Train, Split::Test] {
            let t = task(ds.clone(), split);
            let idx = ds.indices(split);
            let zeros = idx.iter().filter(|&&i| ds.samples[i].label == 0).count();
            let acc = t.evaluate(&net).unwrap();
            assert_eq!(acc, zeros as f64 / idx.len() as f64);
            assert_eq!(acc, 0.5);
            assert_eq!(acc, t.evaluate(&net).unwrap());
        }
    }

    #[test]
    fn empty_split_is_an_error() {
        let ds = generate_signal_dataset(4, 2, 0.3, 5).unwrap();
        assert!(ds.test.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Network::scaffold(ArchitectureProfile::digital(), 64, 2, &mut rng);
        let err = task(ds, Split::Test).evaluate(&net).unwrap_err();
        assert!(matches!(err, Error::EmptySplit));
        assert_eq!(err.to_string(), "empty split");
    }

    #[test]
    fn arity_mismatch() {
        let ds = generate_signal_dataset(20, 2, 0.3, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = Network::scaffold(ArchitectureProfile::digital(), 64, 3, &mut rng);
        assert!(matches!(task(ds, Split::Train).evaluate(&net), Err(Error::Arity(_))));
    }
}
