//! Experiment configs and the commands behind the `snnres` binary.
//!
//! A run is fully determined by its JSON config and seed. Every command
//! reads its inputs first, so a bad config or missing file is reported as a
//! usage error before any work starts.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoding::{DecoderConfig, RateEncoderConfig};
use crate::env::signals::{self, generate_signals};
use crate::env::{CartPoleConfig, ClassificationTask, Evaluator, PoleBalanceTask, Probe, SignalConfig, Split};
use crate::error::{Error, Result};
use crate::evolution::{evolve, write_stats_csv, EvolutionConfig, EvolutionOutcome};
use crate::fitness::{fit_normal, FitnessConfig};
use crate::network::{ArchitectureProfile, Network, ProfileKind};
use crate::perturbation::{
    performance_histogram, read_sweep_csv, sweep, write_sweep_csv, HistogramBin, SweepConfig, SweepReport,
    SweepSummary, VariationSpec,
};
use crate::pruning::{measure_stats, prune, write_prune_csv, NetworkStats, PruneConfig, PruneRecord};
use crate::rng::{self, tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Pb,
    Classify,
}

fn one() -> f64 {
    1.0
}

fn default_episode_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PbSettings {
    #[serde(default)]
    pub physics: CartPoleConfig,
    #[serde(default = "default_episode_seeds")]
    pub episode_seeds: Vec<u64>,
    #[serde(default = "one")]
    pub charge_per_spike: f64,
    /// Replaces the default 8-feature signed encoder.
    #[serde(default)]
    pub encoder: Option<RateEncoderConfig>,
}

impl Default for PbSettings {
    fn default() -> Self {
        Self {
            physics: CartPoleConfig::default(),
            episode_seeds: default_episode_seeds(),
            charge_per_spike: 1.0,
            encoder: None,
        }
    }
}

fn default_amplitude() -> f64 {
    2.0
}

fn train_split() -> Split {
    Split::Train
}

fn test_split() -> Split {
    Split::Test
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySettings {
    #[serde(default)]
    pub data: SignalConfig,
    /// Features are rate coded over `[-amplitude, amplitude]`.
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub charge_per_spike: f64,
    #[serde(default = "train_split")]
    pub train_split: Split,
    /// Split used by prune, sweep and stats.
    #[serde(default = "test_split")]
    pub eval_split: Split,
}

impl Default for ClassifySettings {
    fn default() -> Self {
        Self {
            data: SignalConfig::default(),
            amplitude: default_amplitude(),
            charge_per_spike: 1.0,
            train_split: Split::Train,
            eval_split: Split::Test,
        }
    }
}

fn default_delta() -> f64 {
    0.001
}

fn default_variations() -> usize {
    5
}

fn half() -> f64 {
    0.5
}

/// Fitness settings; the optimal performance comes from the task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitnessSection {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_variations")]
    pub n_variations: usize,
    #[serde(default = "half")]
    pub w1: f64,
    #[serde(default = "half")]
    pub w2: f64,
    pub variation_spec: VariationSpec,
}

impl FitnessSection {
    pub fn resolve(&self, optimal_performance: f64) -> FitnessConfig {
        FitnessConfig {
            delta: self.delta,
            n_variations: self.n_variations,
            w1: self.w1,
            w2: self.w2,
            variation_spec: self.variation_spec.clone(),
            optimal_performance,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub task: TaskKind,
    pub profile: ProfileKind,
    /// Analog only: delay per unit of distance.
    #[serde(default)]
    pub distance_to_delay_scale: Option<f64>,
    #[serde(default)]
    pub pb: PbSettings,
    #[serde(default)]
    pub classify: ClassifySettings,
    pub evolution: EvolutionConfig,
    pub fitness: FitnessSection,
    #[serde(default)]
    pub prune: Option<PruneConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Overrides `evolution.master_seed` when present.
    #[serde(default)]
    pub master_seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config {
                path: if path == "." { "<root>".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })?;
        if let Some(seed) = cfg.master_seed {
            cfg.evolution.master_seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok((Self::from_json(&text)?, text))
    }

    pub fn seed(&self) -> u64 {
        self.evolution.master_seed
    }

    /// `--seed` replaces the master seed and the sweep seed.
    pub fn override_seed(&mut self, seed: u64) {
        self.master_seed = Some(seed);
        self.evolution.master_seed = seed;
        if let Some(s) = self.sweep.as_mut() {
            s.seed = seed;
        }
    }

    pub fn architecture(&self) -> ArchitectureProfile {
        match (self.profile, self.distance_to_delay_scale) {
            (ProfileKind::Analog, Some(scale)) => ArchitectureProfile::analog_with_scale(scale),
            (kind, _) => ArchitectureProfile::for_kind(kind),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let field = |path: &str, e: Error| Error::Config {
            path: path.into(),
            message: e.to_string(),
        };
        self.evolution.validate().map_err(|e| field("evolution", e))?;
        let profile = self.architecture();
        self.fitness
            .resolve(1.0)
            .validate()
            .map_err(|e| field("fitness", e))?;
        self.fitness
            .variation_spec
            .check(&profile)
            .map_err(|e| field("fitness.variation_spec", e))?;
        if let Some(p) = &self.prune {
            p.validate().map_err(|e| field("prune", e))?;
        }
        if let Some(s) = &self.sweep {
            s.model.check(&profile).map_err(|e| field("sweep.model", e))?;
        }
        if self.distance_to_delay_scale.is_some() && self.profile != ProfileKind::Analog {
            return Err(field(
                "distance_to_delay_scale",
                Error::InvalidArgument("only meaningful for the analog profile".into()),
            ));
        }
        if let Some(s) = self.distance_to_delay_scale {
            if !(s > 0.0) {
                return Err(field(
                    "distance_to_delay_scale",
                    Error::InvalidArgument("must be positive".into()),
                ));
            }
        }
        match self.task {
            TaskKind::Pb => {
                if self.pb.episode_seeds.is_empty() {
                    return Err(field("pb.episode_seeds", Error::InvalidArgument("must not be empty".into())));
                }
                if let Some(enc) = &self.pb.encoder {
                    enc.validate().map_err(|e| field("pb.encoder", e))?;
                }
            }
            TaskKind::Classify => {
                if self.classify.data.num_classes < 2 {
                    return Err(field(
                        "classify.data.num_classes",
                        Error::InvalidArgument("need at least 2 classes".into()),
                    ));
                }
                if !(self.classify.amplitude > 0.0) {
                    return Err(field("classify.amplitude", Error::InvalidArgument("must be positive".into())));
                }
            }
        }
        Ok(())
    }

    /// Sweep settings, falling back to the training fault model.
    pub fn sweep_config(&self) -> SweepConfig {
        self.sweep
            .clone()
            .unwrap_or_else(|| SweepConfig::new(self.fitness.variation_spec.model.clone(), self.seed()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Train,
    Evaluate,
}

/// A configured task, usable wherever an [`Evaluator`] is expected.
#[derive(Clone, Debug)]
pub enum Task {
    Pb(PoleBalanceTask),
    Classify(ClassificationTask),
}

impl Task {
    pub fn build(cfg: &ExperimentConfig, phase: Phase) -> Result<Self> {
        Ok(match cfg.task {
            TaskKind::Pb => {
                let s = &cfg.pb;
                let mut task = PoleBalanceTask::new(s.physics.clone(), s.charge_per_spike, s.episode_seeds.clone());
                if let Some(enc) = &s.encoder {
                    task.encoder = enc.clone();
                }
                Task::Pb(task)
            }
            TaskKind::Classify => {
                let s = &cfg.classify;
                let dataset = generate_signals(&s.data)?;
                Task::Classify(ClassificationTask {
                    encoder: signals::default_encoder(dataset.feature_len(), s.amplitude, s.charge_per_spike),
                    decoder: DecoderConfig::argmax(),
                    dataset: Arc::new(dataset),
                    split: match phase {
                        Phase::Train => s.train_split,
                        Phase::Evaluate => s.eval_split,
                    },
                })
            }
        })
    }

    fn inner(&self) -> &dyn Evaluator {
        match self {
            Task::Pb(t) => t,
            Task::Classify(t) => t,
        }
    }
}

impl Evaluator for Task {
    fn evaluate(&self, network: &Network) -> Result<f64> {
        self.inner().evaluate(network)
    }

    fn probe(&self, network: &Network) -> Result<Probe> {
        self.inner().probe(network)
    }

    fn optimal_performance(&self) -> f64 {
        self.inner().optimal_performance()
    }

    fn input_count(&self) -> usize {
        self.inner().input_count()
    }

    fn output_count(&self) -> usize {
        self.inner().output_count()
    }
}

/// Input/output scaffold for the task; positions (analog) come from the
/// seed's template stream.
pub fn template(cfg: &ExperimentConfig, task: &Task) -> Network {
    let mut r = rng::stream(cfg.seed(), &[tag::TEMPLATE]);
    Network::scaffold(cfg.architecture(), task.input_count(), task.output_count(), &mut r)
}

/// Evolves one network as configured.
pub fn train(cfg: &ExperimentConfig) -> Result<EvolutionOutcome> {
    let task = Task::build(cfg, Phase::Train)?;
    let fitness = cfg.fitness.resolve(task.optimal_performance());
    evolve(&task, &template(cfg, &task), &fitness, &cfg.evolution)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub generations: usize,
    pub best_fitness: f64,
    pub config: ExperimentConfig,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// Bad arguments, config or input files.
    Usage,
    Runtime,
}

#[derive(Debug)]
pub struct CommandError {
    pub kind: FailureKind,
    pub error: Error,
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Usage => 1,
            FailureKind::Runtime => 2,
        }
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.error)
    }
}

impl std::error::Error for CommandError {}

trait Classify<T> {
    fn usage(self) -> std::result::Result<T, CommandError>;
    fn runtime(self) -> std::result::Result<T, CommandError>;
}

impl<T> Classify<T> for Result<T> {
    fn usage(self) -> std::result::Result<T, CommandError> {
        self.map_err(|error| CommandError {
            kind: FailureKind::Usage,
            error,
        })
    }

    fn runtime(self) -> std::result::Result<T, CommandError> {
        self.map_err(|error| CommandError {
            kind: FailureKind::Runtime,
            error,
        })
    }
}

pub type CommandResult = std::result::Result<(), CommandError>;

/// Overrides shared by every command.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

fn load_with_overrides(path: &Path, o: &Overrides) -> Result<(ExperimentConfig, String, PathBuf)> {
    let (mut cfg, text) = ExperimentConfig::load(path)?;
    if let Some(seed) = o.seed {
        cfg.override_seed(seed);
    }
    let out = o.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, text, out))
}

fn read_network(path: &Path) -> Result<Network> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Network::from_json(&text)
}

fn network_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn cmd_train(config: &Path, o: &Overrides) -> CommandResult {
    let (cfg, text, out) = load_with_overrides(config, o).usage()?;
    let started = Instant::now();
    let outcome = train(&cfg).runtime()?;
    let wall = started.elapsed().as_secs_f64();

    let best_json = outcome.best.network.to_json().runtime()?;
    let mut stats_csv = Vec::new();
    write_stats_csv(&outcome.stats, &mut stats_csv).runtime()?;
    let manifest = Manifest {
        command: "train".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: sha256_hex(text.as_bytes()),
        seed: cfg.seed(),
        wall_time_seconds: wall,
        generations: outcome.stats.len().saturating_sub(1),
        best_fitness: outcome.best.fitness.unwrap_or(f64::NEG_INFINITY),
        config: cfg,
    };

    fs::create_dir_all(&out).map_err(Error::from).runtime()?;
    fs::write(out.join("best_network.json"), best_json).map_err(Error::from).runtime()?;
    fs::write(out.join("generations.csv"), stats_csv).map_err(Error::from).runtime()?;
    write_json(&out.join("manifest.json"), &manifest).runtime()?;
    log::info!(
        "best fitness {:.4} after {} generations, written to {}",
        manifest.best_fitness,
        manifest.generations,
        out.display()
    );
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PruneStatsEntry {
    pub network_id: String,
    pub before: NetworkStats,
    pub after: NetworkStats,
}

pub fn cmd_prune(config: &Path, networks: &[PathBuf], o: &Overrides) -> CommandResult {
    let (cfg, _, out) = load_with_overrides(config, o).usage()?;
    let inputs: Vec<(String, Network)> = networks
        .iter()
        .map(|p| Ok((network_id(p), read_network(p)?)))
        .collect::<Result<_>>()
        .usage()?;
    let task = Task::build(&cfg, Phase::Evaluate).runtime()?;
    let prune_cfg = cfg.prune.clone().unwrap_or_default();

    let mut results: Vec<(String, Network, PruneRecord)> = Vec::new();
    for (id, net) in inputs {
        let (pruned, record) = prune(&net, &task, &prune_cfg).runtime()?;
        log::info!(
            "{id}: hidden {} -> {}, performance {:.4} -> {:.4}",
            record.before.hidden_count,
            record.after.hidden_count,
            record.before.performance,
            record.after.performance
        );
        results.push((id, pruned, record));
    }

    fs::create_dir_all(&out).map_err(Error::from).runtime()?;
    for (id, pruned, _) in &results {
        let text = pruned.to_json().runtime()?;
        fs::write(out.join(format!("{id}.pruned.json")), text).map_err(Error::from).runtime()?;
    }
    let rows: Vec<(String, &PruneRecord)> = results.iter().map(|(id, _, r)| (id.clone(), r)).collect();
    let file = fs::File::create(out.join("prune.csv")).map_err(Error::from).runtime()?;
    write_prune_csv(&rows, file).runtime()?;
    let stats: Vec<PruneStatsEntry> = results
        .iter()
        .map(|(id, _, r)| PruneStatsEntry {
            network_id: id.clone(),
            before: r.before.clone(),
            after: r.after.clone(),
        })
        .collect();
    write_json(&out.join("prune_stats.json"), &stats).runtime()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSummaryFile {
    pub sweep: SweepConfig,
    pub networks: Vec<NetworkSweepSummary>,
    /// Over every record of every network.
    pub overall: SweepSummary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkSweepSummary {
    pub network_id: String,
    pub base_performance: f64,
    pub summary: SweepSummary,
}

pub fn sweep_networks<E: Evaluator + ?Sized>(
    networks: &[(String, Network)],
    evaluator: &E,
    cfg: &SweepConfig,
) -> Result<Vec<(String, SweepReport)>> {
    networks
        .iter()
        .map(|(id, net)| Ok((id.clone(), sweep(net, evaluator, cfg)?)))
        .collect()
}

pub fn cmd_sweep(config: &Path, networks: &[PathBuf], o: &Overrides) -> CommandResult {
    let (cfg, _, out) = load_with_overrides(config, o).usage()?;
    let inputs: Vec<(String, Network)> = networks
        .iter()
        .map(|p| Ok((network_id(p), read_network(p)?)))
        .collect::<Result<_>>()
        .usage()?;
    let sweep_cfg = cfg.sweep_config();
    let task = Task::build(&cfg, Phase::Evaluate).runtime()?;
    let reports = sweep_networks(&inputs, &task, &sweep_cfg).runtime()?;

    let all: Vec<_> = reports.iter().flat_map(|(_, r)| r.records.clone()).collect();
    let summary = SweepSummaryFile {
        networks: reports
            .iter()
            .map(|(id, r)| NetworkSweepSummary {
                network_id: id.clone(),
                base_performance: r.base_performance,
                summary: r.summary.clone(),
            })
            .collect(),
        overall: crate::perturbation::summarize(
            &all,
            task.optimal_performance(),
            sweep_cfg.histogram_bins,
            sweep_cfg.failure_threshold,
        ),
        sweep: sweep_cfg,
    };

    fs::create_dir_all(&out).map_err(Error::from).runtime()?;
    let rows: Vec<(String, &SweepReport)> = reports.iter().map(|(id, r)| (id.clone(), r)).collect();
    let file = fs::File::create(out.join("sweep.csv")).map_err(Error::from).runtime()?;
    write_sweep_csv(&rows, file).runtime()?;
    write_json(&out.join("sweep_summary.json"), &summary).runtime()?;
    Ok(())
}

/// One-sided Mann-Whitney U test of "x tends to be smaller than y".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U statistic of `x`: pairs with x below y count 1, ties 0.5.
    pub u: f64,
    pub p_value: f64,
    pub exact: bool,
}

/// Exact null distribution when there are no ties and both samples are
/// small; otherwise the tie-corrected normal approximation with continuity
/// correction.
pub fn mann_whitney_less(x: &[f64], y: &[f64]) -> Result<MannWhitney> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidArgument("both samples must be non-empty".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    let (n1, n2) = (x.len(), y.len());
    // U counts pairs where x exceeds y, so small U supports the alternative.
    let mut u = 0.0;
    for a in x {
        for b in y {
            if a > b {
                u += 1.0;
            } else if a == b {
                u += 0.5;
            }
        }
    }
    let mut pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let mut tie_sum = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1] == pooled[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_sum += t * t * t - t;
        i = j + 1;
    }

    if tie_sum == 0.0 && n1 <= 50 && n2 <= 50 {
        let dist = u_distribution(n1, n2);
        let total: f64 = dist.iter().sum();
        let p = dist[..=(u as usize)].iter().sum::<f64>() / total;
        return Ok(MannWhitney {
            u,
            p_value: p.min(1.0),
            exact: true,
        });
    }

    let (f1, f2) = (n1 as f64, n2 as f64);
    let n = f1 + f2;
    let mean = f1 * f2 / 2.0;
    let var = f1 * f2 / 12.0 * ((n + 1.0) - tie_sum / (n * (n - 1.0)));
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = (u - mean + 0.5) / var.sqrt();
        use statrs::distribution::{ContinuousCDF, Normal};
        Normal::new(0.0, 1.0).expect("unit normal").cdf(z)
    };
    Ok(MannWhitney {
        u,
        p_value: p,
        exact: false,
    })
}

/// Number of arrangements giving each U value, for samples of size m and n
/// without ties.
fn u_distribution(m: usize, n: usize) -> Vec<f64> {
    // f[i][j][u]: arrangements of i x's and j y's with statistic u
    let max = m * n;
    let mut prev: Vec<Vec<f64>> = vec![vec![0.0; max + 1]; n + 1];
    for j in 0..=n {
        prev[j][0] = 1.0;
    }
    for i in 1..=m {
        let mut cur: Vec<Vec<f64>> = vec![vec![0.0; max + 1]; n + 1];
        cur[0][0] = 1.0;
        for j in 1..=n {
            for u in 0..=i * j {
                // largest element is an x (exceeds all j y's) or a y
                let from_x = if u >= j { prev[j][u - j] } else { 0.0 };
                cur[j][u] = from_x + cur[j - 1][u];
            }
        }
        prev = cur;
    }
    prev[n].clone()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArmSummary {
    pub run_dir: PathBuf,
    pub networks: usize,
    pub records: usize,
    pub degradation_mean: f64,
    pub degradation_stddev: f64,
    pub per_network_mean_degradation: Vec<(String, f64)>,
    pub histogram: Vec<HistogramBin>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Comparison {
    pub arm_a: ArmSummary,
    pub arm_b: ArmSummary,
    /// Mean degradation of arm b minus that of arm a.
    pub difference_of_means: f64,
    /// Tests whether arm b's per-network mean degradation is lower.
    pub mann_whitney_b_less: Option<MannWhitney>,
}

pub const DEGRADATION_BINS: usize = 10;

pub fn summarize_arm(run_dir: &Path, rows: &[(String, f64)]) -> Result<ArmSummary> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument(format!("{} has no sweep rows", run_dir.display())));
    }
    let degr: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (mean, sd) = fit_normal(&degr).unwrap_or((degr[0], 0.0));
    let mut per_network: Vec<(String, f64, usize)> = Vec::new();
    for (id, d) in rows {
        match per_network.iter_mut().find(|(n, _, _)| n == id) {
            Some(e) => {
                e.1 += d;
                e.2 += 1;
            }
            None => per_network.push((id.clone(), *d, 1)),
        }
    }
    Ok(ArmSummary {
        run_dir: run_dir.to_path_buf(),
        networks: per_network.len(),
        records: rows.len(),
        degradation_mean: mean,
        degradation_stddev: sd,
        per_network_mean_degradation: per_network.into_iter().map(|(n, s, c)| (n, s / c as f64)).collect(),
        histogram: performance_histogram(&degr, 1.0, DEGRADATION_BINS),
    })
}

pub fn compare_arms(a: ArmSummary, b: ArmSummary) -> Comparison {
    let means = |s: &ArmSummary| s.per_network_mean_degradation.iter().map(|p| p.1).collect::<Vec<_>>();
    Comparison {
        difference_of_means: b.degradation_mean - a.degradation_mean,
        mann_whitney_b_less: mann_whitney_less(&means(&b), &means(&a)).ok(),
        arm_a: a,
        arm_b: b,
    }
}

fn read_sweep_dir(dir: &Path) -> Result<Vec<(String, f64)>> {
    let path = dir.join("sweep.csv");
    let file = fs::File::open(&path).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(read_sweep_csv(file)?
        .into_iter()
        .map(|(id, r)| (id, r.degradation))
        .collect())
}

pub fn cmd_compare(a: &Path, b: &Path, o: &Overrides) -> CommandResult {
    let rows_a = read_sweep_dir(a).usage()?;
    let rows_b = read_sweep_dir(b).usage()?;
    let cmp = compare_arms(summarize_arm(a, &rows_a).usage()?, summarize_arm(b, &rows_b).usage()?);
    let text = serde_json::to_string_pretty(&cmp).map_err(Error::from).runtime()?;
    match &o.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(Error::from).runtime()?;
            fs::write(dir.join("comparison.json"), text + "\n").map_err(Error::from).runtime()?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StatsEntry {
    pub network_id: String,
    #[serde(flatten)]
    pub stats: NetworkStats,
}

pub fn cmd_stats(config: &Path, networks: &[PathBuf], o: &Overrides) -> CommandResult {
    let (cfg, _, _) = load_with_overrides(config, o).usage()?;
    let inputs: Vec<(String, Network)> = networks
        .iter()
        .map(|p| Ok((network_id(p), read_network(p)?)))
        .collect::<Result<_>>()
        .usage()?;
    let task = Task::build(&cfg, Phase::Evaluate).runtime()?;
    let entries: Vec<StatsEntry> = inputs
        .iter()
        .map(|(id, net)| {
            Ok(StatsEntry {
                network_id: id.clone(),
                stats: measure_stats(net, &task)?,
            })
        })
        .collect::<Result<_>>()
        .runtime()?;
    let text = serde_json::to_string_pretty(&entries).map_err(Error::from).runtime()?;
    match &o.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(Error::from).runtime()?;
            fs::write(dir.join("stats.json"), text + "\n").map_err(Error::from).runtime()?;
        }
        None => println!("{text}"),
    }
    Ok(())
}
