//! The autonomous curriculum loop.
//!
//! One run: partition a dataset into a candidate pool and a held-out test
//! set, then repeat for a fixed number of steps — sieve a batch from the
//! pool without replacement, measure each candidate's signals from stochastic
//! rollouts, score them with the configured strategy, run a training burst
//! on the winner, and evaluate periodically at temperature 0. Every step is
//! appended to an event log before the loop moves on, so a crashed run
//! leaves a usable prefix, and the whole trajectory is a pure function of
//! the seeds.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{evaluate_policy, generate_rollouts, stream, BackendError, PolicyBackend};
use crate::grpo::{micro_burst, BurstConfig, BurstError, BurstReport, LossPattern};
use crate::problem::Problem;
use crate::rng::{fnv1a64, shuffle, stable_hash, SplitMix};
use crate::selector::{select_candidate, SelectorModel};
use crate::signals::{collect_signals, SignalVector};

#[derive(Debug, Error)]
pub enum CurriculumError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("dataset has {got} problems, need at least {needed}")]
    InsufficientDataset { needed: usize, got: usize },
    #[error("duplicate problem id: {0}")]
    DuplicateId(String),
    #[error("pool exhausted: {remaining} problems remain, step needs {needed}")]
    PoolExhausted { remaining: usize, needed: usize },
    #[error("backend failure: {0}")]
    Backend(#[from] BackendError),
    #[error("burst failure: {0}")]
    Burst(#[from] BurstError),
    #[error("signal computation: {0}")]
    Signal(#[from] crate::signals::SignalError),
    #[error("event log: {0}")]
    Io(#[from] std::io::Error),
}

/// How the loop scores a sieved batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum SelectionStrategy {
    /// Score with a linear selector model (the default uses the deployment
    /// coefficients).
    Selector { model: SelectorModel },
    /// Pick the candidate with the highest answer disagreement.
    MaxDisagreement,
    /// Pick the candidate with the highest reward variance.
    MaxVariance,
    /// Pick the candidate with the highest difficulty level.
    MaxLevel,
    /// Pick uniformly at random (seeded).
    Random,
}

impl Default for SelectionStrategy {
    fn default() -> Self {
        SelectionStrategy::Selector {
            model: SelectorModel::deployment(),
        }
    }
}

impl SelectionStrategy {
    /// Scores for the batch plus the selected index. Ties break to the
    /// lowest index for every strategy except `Random`, which draws from
    /// the given seed and records zero scores.
    pub fn choose(&self, batch: &[SignalVector], select_seed: u64) -> (Vec<f64>, usize) {
        assert!(!batch.is_empty(), "cannot select from an empty batch");
        match self {
            SelectionStrategy::Selector { model } => {
                let scores: Vec<f64> = batch.iter().map(|s| model.predict(s)).collect();
                let idx = select_candidate(batch, model).expect("non-empty batch");
                (scores, idx)
            }
            SelectionStrategy::MaxDisagreement => {
                let scores: Vec<f64> = batch.iter().map(|s| s.disagreement).collect();
                (scores.clone(), argmax_lowest(&scores))
            }
            SelectionStrategy::MaxVariance => {
                let scores: Vec<f64> = batch.iter().map(|s| s.var_r).collect();
                (scores.clone(), argmax_lowest(&scores))
            }
            SelectionStrategy::MaxLevel => {
                let scores: Vec<f64> = batch.iter().map(|s| f64::from(s.level)).collect();
                (scores.clone(), argmax_lowest(&scores))
            }
            SelectionStrategy::Random => {
                let idx = SplitMix::new(select_seed).next_index(batch.len());
                (vec![0.0; batch.len()], idx)
            }
        }
    }
}

fn argmax_lowest(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Resolved configuration of one curriculum run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumConfig {
    pub pool_size: usize,
    /// Seed of the dataset shuffle that defines the pool/test partition.
    pub shuffle_seed: u64,
    /// Candidates sieved per step (B).
    pub batch_size: usize,
    /// Rollouts per candidate during signal measurement (K).
    pub rollouts_per_candidate: usize,
    /// Curriculum steps (T).
    pub total_steps: usize,
    pub eval_every: usize,
    pub testset_size: usize,
    /// Seed for every stochastic stream of the run itself.
    pub master_seed: u64,
    pub burst: BurstConfig,
    pub scoring: SelectionStrategy,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        CurriculumConfig {
            pool_size: 1000,
            shuffle_seed: 42,
            batch_size: 4,
            rollouts_per_candidate: 4,
            total_steps: 20,
            eval_every: 5,
            testset_size: 50,
            master_seed: 42,
            burst: BurstConfig::default(),
            scoring: SelectionStrategy::default(),
        }
    }
}

impl CurriculumConfig {
    pub fn validate(&self) -> Result<(), CurriculumError> {
        if self.pool_size == 0 {
            return Err(CurriculumError::InvalidConfig("pool_size must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(CurriculumError::InvalidConfig("batch_size must be positive".into()));
        }
        if self.batch_size > self.pool_size {
            return Err(CurriculumError::InvalidConfig(format!(
                "batch_size {} exceeds pool_size {}",
                self.batch_size, self.pool_size
            )));
        }
        if self.rollouts_per_candidate == 0 {
            return Err(CurriculumError::InvalidConfig(
                "rollouts_per_candidate must be positive".into(),
            ));
        }
        if self.eval_every == 0 {
            return Err(CurriculumError::InvalidConfig("eval_every must be positive".into()));
        }
        if self.testset_size == 0 {
            return Err(CurriculumError::InvalidConfig("testset_size must be positive".into()));
        }
        self.burst
            .validate()
            .map_err(|e| CurriculumError::InvalidConfig(e.to_string()))?;
        if let SelectionStrategy::Selector { model } = &self.scoring {
            model.validate().map_err(CurriculumError::InvalidConfig)?;
        }
        Ok(())
    }

    /// Stable hex hash of the resolved configuration.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:016x}", fnv1a64(json.as_bytes()))
    }
}

/// One scored candidate within a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub problem_id: String,
    pub signals: SignalVector,
    pub score: f64,
}

/// Everything one curriculum step produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub batch: Vec<BatchEntry>,
    pub selected: String,
    pub burst: BurstReport,
    /// Present exactly when `step % eval_every == 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_accuracy: Option<f64>,
}

/// One line of the run's event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RunEvent {
    /// Temperature-0 accuracy of the untouched policy, labeled step 0.
    BaselineEval { accuracy: f64 },
    /// Detail of one burst update step.
    BurstStep {
        step: usize,
        burst_step: usize,
        rewards: Vec<f64>,
        advantages: Vec<f64>,
        losses_so_far: Vec<f64>,
    },
    Step(StepRecord),
    /// A step that died partway; its sieved batch stays consumed.
    StepAborted {
        step: usize,
        phase: String,
        error: String,
        partial_losses: Vec<f64>,
    },
}

/// Receives events as they happen. File-backed sinks persist each event
/// before the loop continues.
pub trait EventSink {
    fn emit(&mut self, event: &RunEvent) -> std::io::Result<()>;
}

/// Collects events in memory (tests, summaries).
#[derive(Debug, Default)]
pub struct MemorySink {
    pub events: Vec<RunEvent>,
}

impl EventSink for MemorySink {
    fn emit(&mut self, event: &RunEvent) -> std::io::Result<()> {
        self.events.push(event.clone());
        Ok(())
    }
}

/// Discards events.
pub struct NullSink;

impl EventSink for NullSink {
    fn emit(&mut self, _event: &RunEvent) -> std::io::Result<()> {
        Ok(())
    }
}

/// Writes one JSON object per line, flushing after each event.
pub struct JsonlSink<W: Write> {
    writer: W,
}

impl<W: Write> JsonlSink<W> {
    pub fn new(writer: W) -> Self {
        JsonlSink { writer }
    }
}

impl<W: Write> EventSink for JsonlSink<W> {
    fn emit(&mut self, event: &RunEvent) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.writer, event)?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()
    }
}

/// Forwards events to two sinks.
pub struct TeeSink<'a, A: EventSink + ?Sized, B: EventSink + ?Sized> {
    pub first: &'a mut A,
    pub second: &'a mut B,
}

impl<A: EventSink + ?Sized, B: EventSink + ?Sized> EventSink for TeeSink<'_, A, B> {
    fn emit(&mut self, event: &RunEvent) -> std::io::Result<()> {
        self.first.emit(event)?;
        self.second.emit(event)
    }
}

/// Mutable state of a run between steps.
#[derive(Debug, Clone)]
pub struct CurriculumState {
    pub pool: Vec<Problem>,
    pub testset: Vec<Problem>,
    /// 1-based index of the next step to run.
    pub next_step: usize,
}

/// Shuffle the dataset with the documented SplitMix64 Fisher-Yates and cut
/// the pool and test partitions off the front. The two are disjoint by
/// construction; ids must be unique for the no-replacement bookkeeping to
/// mean anything.
pub fn init_pool(
    dataset: &[Problem],
    config: &CurriculumConfig,
) -> Result<CurriculumState, CurriculumError> {
    config.validate()?;
    let needed = config.pool_size + config.testset_size;
    if dataset.len() < needed {
        return Err(CurriculumError::InsufficientDataset {
            needed,
            got: dataset.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for problem in dataset {
        problem
            .validate()
            .map_err(CurriculumError::InvalidConfig)?;
        if !seen.insert(problem.id.as_str()) {
            return Err(CurriculumError::DuplicateId(problem.id.clone()));
        }
    }
    let mut shuffled = dataset.to_vec();
    shuffle(&mut shuffled, config.shuffle_seed);
    for (i, problem) in shuffled.iter_mut().enumerate() {
        problem.pool_index = i;
    }
    let testset = shuffled.split_off(config.pool_size);
    let testset = testset[..config.testset_size].to_vec();
    Ok(CurriculumState {
        pool: shuffled,
        testset,
        next_step: 1,
    })
}

/// Draw `batch_size` problems uniformly without replacement; drawn problems
/// are permanently removed from the pool.
pub fn sieve_batch(
    pool: &mut Vec<Problem>,
    batch_size: usize,
    seed: u64,
) -> Result<Vec<Problem>, CurriculumError> {
    if pool.len() < batch_size {
        return Err(CurriculumError::PoolExhausted {
            remaining: pool.len(),
            needed: batch_size,
        });
    }
    let mut rng = SplitMix::new(seed);
    let mut batch = Vec::with_capacity(batch_size);
    for _ in 0..batch_size {
        let idx = rng.next_index(pool.len());
        batch.push(pool.swap_remove(idx));
    }
    Ok(batch)
}

/// Run one full step: sieve, measure signals, select, burst, maybe evaluate.
/// The step record is emitted to the sink before returning. On failure the
/// sieved batch stays consumed and an abort event is logged.
pub fn curriculum_step(
    state: &mut CurriculumState,
    backend: &mut dyn PolicyBackend,
    config: &CurriculumConfig,
    sink: &mut dyn EventSink,
) -> Result<StepRecord, CurriculumError> {
    let step = state.next_step;
    let master = config.master_seed;
    let sieve_seed = stable_hash(&[master, stream::SIEVE, step as u64]);
    let batch = sieve_batch(&mut state.pool, config.batch_size, sieve_seed)?;
    state.next_step += 1;

    let abort = |phase: &str, error: String, losses: Vec<f64>, sink: &mut dyn EventSink| {
        let _ = sink.emit(&RunEvent::StepAborted {
            step,
            phase: phase.to_string(),
            error,
            partial_losses: losses,
        });
    };

    // Signal measurement per candidate. Kept in batch order so a concurrent
    // implementation could not change downstream selection.
    let mut signals = Vec::with_capacity(batch.len());
    for (candidate_index, problem) in batch.iter().enumerate() {
        let rollout_seed = stable_hash(&[
            master,
            stream::ROLLOUT,
            step as u64,
            candidate_index as u64,
        ]);
        let rollouts = match generate_rollouts(
            backend,
            problem,
            config.rollouts_per_candidate,
            config.burst.temperature,
            config.burst.max_new_tokens,
            rollout_seed,
        ) {
            Ok(r) => r,
            Err(e) => {
                abort("signals", e.to_string(), Vec::new(), sink);
                return Err(e.into());
            }
        };
        signals.push(collect_signals(problem, &rollouts)?);
    }

    let select_seed = stable_hash(&[master, stream::SELECT, step as u64]);
    let (scores, selected_index) = config.scoring.choose(&signals, select_seed);
    let selected = &batch[selected_index];

    let burst_seed = stable_hash(&[master, stream::BURST, step as u64]);
    let report = match micro_burst(backend, selected, &config.burst, burst_seed) {
        Ok(r) => r,
        Err(e) => {
            let losses = match &e {
                BurstError::Aborted(a) => a.partial.step_losses.clone(),
                BurstError::Grpo(_) => Vec::new(),
            };
            abort("burst", e.to_string(), losses, sink);
            return Err(e.into());
        }
    };
    for (burst_step, detail) in report.steps.iter().enumerate() {
        sink.emit(&RunEvent::BurstStep {
            step,
            burst_step,
            rewards: detail.rewards.clone(),
            advantages: detail.advantages.clone(),
            losses_so_far: report.step_losses[..=burst_step].to_vec(),
        })?;
    }

    let eval_accuracy = if step.is_multiple_of(config.eval_every) {
        match evaluate_policy(backend, &state.testset) {
            Ok(report) => Some(report.accuracy),
            Err(e) => {
                abort("eval", e.to_string(), report.step_losses.clone(), sink);
                return Err(e.into());
            }
        }
    } else {
        None
    };

    let record = StepRecord {
        step,
        batch: batch
            .iter()
            .zip(&signals)
            .zip(&scores)
            .map(|((problem, signals), &score)| BatchEntry {
                problem_id: problem.id.clone(),
                signals: *signals,
                score,
            })
            .collect(),
        selected: selected.id.clone(),
        burst: report,
        eval_accuracy,
    };
    sink.emit(&RunEvent::Step(record.clone()))?;
    Ok(record)
}

/// Accuracy trajectory entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub accuracy: f64,
}

/// Selected-level shares across a run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LevelShares {
    pub level5: f64,
    pub level4: f64,
    pub level3_or_less: f64,
}

/// Selected success-probability bands: zero, (0, 0.5], (0.5, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SuccessShares {
    pub zero: f64,
    pub low: f64,
    pub high: f64,
}

/// Selected disagreement bands: >= 0.75, [0.5, 0.75), < 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DisagreementShares {
    pub high: f64,
    pub mid: f64,
    pub low: f64,
}

/// Loss-pattern frequencies across bursts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PatternShares {
    pub active: f64,
    pub zero: f64,
    pub transition: f64,
}

/// Bookkeeping rollup of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub total_steps: usize,
    pub problems_consumed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trajectory: Vec<TrajectoryPoint>,
    pub level_distribution: LevelShares,
    pub success_bands: SuccessShares,
    pub disagreement_bands: DisagreementShares,
    pub loss_patterns: PatternShares,
}

impl RunSummary {
    /// Canonical builder: replaying a persisted event log through this
    /// reproduces the run's summary byte for byte.
    pub fn from_events(events: &[RunEvent]) -> RunSummary {
        let baseline = events.iter().find_map(|e| match e {
            RunEvent::BaselineEval { accuracy } => Some(*accuracy),
            _ => None,
        });
        let records: Vec<&StepRecord> = events
            .iter()
            .filter_map(|e| match e {
                RunEvent::Step(record) => Some(record),
                _ => None,
            })
            .collect();
        build_summary(&records, baseline)
    }
}

/// Distribution rollup over step records alone (no baseline entry).
pub fn summarize_run(records: &[StepRecord]) -> RunSummary {
    let refs: Vec<&StepRecord> = records.iter().collect();
    build_summary(&refs, None)
}

fn build_summary(records: &[&StepRecord], baseline: Option<f64>) -> RunSummary {
    let mut trajectory = Vec::new();
    if let Some(accuracy) = baseline {
        trajectory.push(TrajectoryPoint { step: 0, accuracy });
    }
    for record in records {
        if let Some(accuracy) = record.eval_accuracy {
            trajectory.push(TrajectoryPoint {
                step: record.step,
                accuracy,
            });
        }
    }
    let n = records.len();
    let share = |count: usize| {
        if n == 0 {
            0.0
        } else {
            count as f64 / n as f64
        }
    };
    let selected_signals: Vec<SignalVector> = records
        .iter()
        .filter_map(|r| {
            r.batch
                .iter()
                .find(|e| e.problem_id == r.selected)
                .map(|e| e.signals)
        })
        .collect();
    let level_distribution = LevelShares {
        level5: share(selected_signals.iter().filter(|s| s.level == 5).count()),
        level4: share(selected_signals.iter().filter(|s| s.level == 4).count()),
        level3_or_less: share(selected_signals.iter().filter(|s| s.level <= 3).count()),
    };
    let success_bands = SuccessShares {
        zero: share(selected_signals.iter().filter(|s| s.p_s == 0.0).count()),
        low: share(
            selected_signals
                .iter()
                .filter(|s| s.p_s > 0.0 && s.p_s <= 0.5)
                .count(),
        ),
        high: share(selected_signals.iter().filter(|s| s.p_s > 0.5).count()),
    };
    let disagreement_bands = DisagreementShares {
        high: share(
            selected_signals
                .iter()
                .filter(|s| s.disagreement >= 0.75)
                .count(),
        ),
        mid: share(
            selected_signals
                .iter()
                .filter(|s| s.disagreement >= 0.5 && s.disagreement < 0.75)
                .count(),
        ),
        low: share(
            selected_signals
                .iter()
                .filter(|s| s.disagreement < 0.5)
                .count(),
        ),
    };
    let loss_patterns = PatternShares {
        active: share(
            records
                .iter()
                .filter(|r| r.burst.pattern == LossPattern::Active)
                .count(),
        ),
        zero: share(
            records
                .iter()
                .filter(|r| r.burst.pattern == LossPattern::Zero)
                .count(),
        ),
        transition: share(
            records
                .iter()
                .filter(|r| r.burst.pattern == LossPattern::Transition)
                .count(),
        ),
    };
    RunSummary {
        total_steps: n,
        problems_consumed: records.iter().map(|r| r.batch.len()).sum(),
        final_accuracy: trajectory.last().map(|p| p.accuracy),
        trajectory,
        level_distribution,
        success_bands,
        disagreement_bands,
        loss_patterns,
    }
}

/// Execute a full run: baseline evaluation, `total_steps` curriculum steps,
/// and a summary built from the emitted events.
pub fn run_curriculum(
    dataset: &[Problem],
    backend: &mut dyn PolicyBackend,
    config: &CurriculumConfig,
    sink: &mut dyn EventSink,
) -> Result<RunSummary, CurriculumError> {
    let mut state = init_pool(dataset, config)?;
    let mut memory = MemorySink::default();
    let mut tee = TeeSink {
        first: &mut memory,
        second: sink,
    };
    let baseline = evaluate_policy(backend, &state.testset)?;
    tee.emit(&RunEvent::BaselineEval {
        accuracy: baseline.accuracy,
    })?;
    for _ in 0..config.total_steps {
        curriculum_step(&mut state, backend, config, &mut tee)?;
    }
    Ok(RunSummary::from_events(&memory.events))
}

/// On-disk layout of one run: `config.json`, `events.jsonl`,
/// `trajectory.csv`, `summary.json`, `manifest.json`.
pub struct RunDir {
    root: PathBuf,
}

/// Provenance envelope for a run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    /// Unix seconds at manifest write time.
    pub created_at: u64,
    pub config_hash: String,
    pub artifact_paths: std::collections::BTreeMap<String, String>,
}

impl RunDir {
    pub fn create(root: impl AsRef<Path>) -> std::io::Result<RunDir> {
        std::fs::create_dir_all(root.as_ref())?;
        Ok(RunDir {
            root: root.as_ref().to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn events_path(&self) -> PathBuf {
        self.root.join("events.jsonl")
    }

    pub fn write_config(&self, config: &CurriculumConfig) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(config).expect("config serializes");
        std::fs::write(self.root.join("config.json"), json + "\n")
    }

    pub fn events_sink(&self) -> std::io::Result<JsonlSink<std::io::BufWriter<std::fs::File>>> {
        let file = std::fs::File::create(self.events_path())?;
        Ok(JsonlSink::new(std::io::BufWriter::new(file)))
    }

    pub fn read_events(&self) -> std::io::Result<Vec<RunEvent>> {
        let text = std::fs::read_to_string(self.events_path())?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                serde_json::from_str(line).map_err(|e| {
                    std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{e}"))
                })
            })
            .collect()
    }

    pub fn write_summary(&self, summary: &RunSummary) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(summary).expect("summary serializes");
        std::fs::write(self.root.join("summary.json"), json + "\n")
    }

    pub fn write_trajectory(&self, summary: &RunSummary) -> std::io::Result<()> {
        let mut csv = String::from("step,accuracy\n");
        for point in &summary.trajectory {
            csv.push_str(&format!("{},{}\n", point.step, point.accuracy));
        }
        std::fs::write(self.root.join("trajectory.csv"), csv)
    }

    pub fn write_manifest(&self, config: &CurriculumConfig) -> std::io::Result<RunManifest> {
        let config_hash = config.config_hash();
        // SOURCE_DATE_EPOCH makes reruns byte-stable; wall clock otherwise.
        let created_at = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(|| {
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
        let mut artifact_paths = std::collections::BTreeMap::new();
        for name in ["config.json", "events.jsonl", "trajectory.csv", "summary.json"] {
            artifact_paths.insert(name.to_string(), name.to_string());
        }
        let manifest = RunManifest {
            run_id: format!("run-{config_hash}"),
            created_at,
            config_hash,
            artifact_paths,
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(self.root.join("manifest.json"), json + "\n")?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::sim::{SimBackend, SimConfig};
    use crate::problem::synthetic_dataset;

    fn small_config() -> CurriculumConfig {
        CurriculumConfig {
            pool_size: 40,
            testset_size: 10,
            total_steps: 3,
            eval_every: 2,
            ..CurriculumConfig::default()
        }
    }

    #[test]
    fn partition_shapes_and_disjointness() {
        let dataset = synthetic_dataset(1050, 7);
        let config = CurriculumConfig::default();
        let state = init_pool(&dataset, &config).unwrap();
        assert_eq!(state.pool.len(), 1000);
        assert_eq!(state.testset.len(), 50);
        let pool_ids: BTreeSet<&String> = state.pool.iter().map(|p| &p.id).collect();
        assert!(state.testset.iter().all(|p| !pool_ids.contains(&p.id)));
    }

    #[test]
    fn partition_is_seed_deterministic() {
        let dataset = synthetic_dataset(60, 7);
        let config = small_config();
        let a = init_pool(&dataset, &config).unwrap();
        let b = init_pool(&dataset, &config).unwrap();
        assert_eq!(a.pool, b.pool);
        assert_eq!(a.testset, b.testset);
        let other = CurriculumConfig {
            shuffle_seed: 43,
            ..small_config()
        };
        let c = init_pool(&dataset, &other).unwrap();
        assert_ne!(a.pool, c.pool);
    }

    #[test]
    fn insufficient_dataset_rejected() {
        let dataset = synthetic_dataset(30, 7);
        assert!(matches!(
            init_pool(&dataset, &small_config()),
            Err(CurriculumError::InsufficientDataset { needed: 50, got: 30 })
        ));
    }

    #[test]
    fn zero_pool_rejected() {
        let config = CurriculumConfig {
            pool_size: 0,
            ..small_config()
        };
        assert!(matches!(
            init_pool(&synthetic_dataset(60, 7), &config),
            Err(CurriculumError::InvalidConfig(_))
        ));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let mut dataset = synthetic_dataset(60, 7);
        dataset[1].id = dataset[0].id.clone();
        assert!(matches!(
            init_pool(&dataset, &small_config()),
            Err(CurriculumError::DuplicateId(_))
        ));
    }

    #[test]
    fn sieve_removes_from_pool_without_replacement() {
        let mut pool = synthetic_dataset(20, 7);
        let batch = sieve_batch(&mut pool, 4, 9).unwrap();
        assert_eq!(batch.len(), 4);
        assert_eq!(pool.len(), 16);
        let drawn: BTreeSet<&String> = batch.iter().map(|p| &p.id).collect();
        assert!(pool.iter().all(|p| !drawn.contains(&p.id)));
    }

    #[test]
    fn sieve_can_empty_the_pool_exactly() {
        let mut pool = synthetic_dataset(4, 7);
        let batch = sieve_batch(&mut pool, 4, 9).unwrap();
        assert_eq!(batch.len(), 4);
        assert!(pool.is_empty());
        assert!(matches!(
            sieve_batch(&mut pool, 1, 10),
            Err(CurriculumError::PoolExhausted { remaining: 0, needed: 1 })
        ));
    }

    #[test]
    fn sieve_is_seed_deterministic() {
        let mut a = synthetic_dataset(20, 7);
        let mut b = synthetic_dataset(20, 7);
        assert_eq!(sieve_batch(&mut a, 4, 9).unwrap(), sieve_batch(&mut b, 4, 9).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn step_consumes_batch_and_logs_before_returning() {
        let dataset = synthetic_dataset(60, 7);
        let config = small_config();
        let mut state = init_pool(&dataset, &config).unwrap();
        let mut backend = SimBackend::new(SimConfig::default());
        let mut sink = MemorySink::default();
        let record = curriculum_step(&mut state, &mut backend, &config, &mut sink).unwrap();
        assert_eq!(record.step, 1);
        assert_eq!(record.batch.len(), 4);
        assert_eq!(state.pool.len(), 36);
        assert!(record.batch.iter().any(|e| e.problem_id == record.selected));
        assert_eq!(record.eval_accuracy, None, "step 1 of eval_every=2");
        // Burst events precede the step record.
        assert!(matches!(sink.events.last(), Some(RunEvent::Step(_))));
        let burst_events = sink
            .events
            .iter()
            .filter(|e| matches!(e, RunEvent::BurstStep { .. }))
            .count();
        assert_eq!(burst_events, config.burst.max_steps);
    }

    #[test]
    fn eval_lands_on_schedule() {
        let dataset = synthetic_dataset(60, 7);
        let config = small_config();
        let mut state = init_pool(&dataset, &config).unwrap();
        let mut backend = SimBackend::new(SimConfig::default());
        let mut sink = NullSink;
        let r1 = curriculum_step(&mut state, &mut backend, &config, &mut sink).unwrap();
        let r2 = curriculum_step(&mut state, &mut backend, &config, &mut sink).unwrap();
        assert!(r1.eval_accuracy.is_none());
        assert!(r2.eval_accuracy.is_some());
    }

    #[test]
    fn full_run_consumes_distinct_problems_and_replays() {
        let dataset = synthetic_dataset(60, 7);
        let config = small_config();
        let run = || {
            let mut backend = SimBackend::new(SimConfig::default());
            let mut sink = MemorySink::default();
            let summary =
                run_curriculum(&dataset, &mut backend, &config, &mut sink).unwrap();
            (summary, sink.events)
        };
        let (summary_a, events_a) = run();
        let (summary_b, events_b) = run();
        assert_eq!(events_a, events_b, "same seeds must replay identically");
        assert_eq!(summary_a, summary_b);
        assert_eq!(summary_a.total_steps, 3);
        assert_eq!(summary_a.problems_consumed, 12);

        let mut seen = BTreeSet::new();
        for event in &events_a {
            if let RunEvent::Step(record) = event {
                for entry in &record.batch {
                    assert!(seen.insert(entry.problem_id.clone()), "resampled id");
                }
            }
        }
        assert_eq!(seen.len(), 12);
        // Trajectory: baseline plus eval steps 2 of 3.
        let steps: Vec<usize> = summary_a.trajectory.iter().map(|p| p.step).collect();
        assert_eq!(steps, vec![0, 2]);
    }

    #[test]
    fn zero_steps_is_baseline_only() {
        let dataset = synthetic_dataset(60, 7);
        let config = CurriculumConfig {
            total_steps: 0,
            ..small_config()
        };
        let mut backend = SimBackend::new(SimConfig::default());
        let mut sink = MemorySink::default();
        let summary = run_curriculum(&dataset, &mut backend, &config, &mut sink).unwrap();
        assert_eq!(summary.total_steps, 0);
        assert_eq!(summary.trajectory.len(), 1);
        assert_eq!(summary.trajectory[0].step, 0);
        assert_eq!(summary.final_accuracy, Some(summary.trajectory[0].accuracy));
        assert_eq!(summary.level_distribution, LevelShares::default());
    }

    #[test]
    fn summary_pattern_shares() {
        // Synthesize records with patterns 8 active, 8 zero, 4 transition.
        let mut records = Vec::new();
        for i in 0..20usize {
            let (pattern, losses) = match i % 5 {
                0 | 1 => (LossPattern::Active, vec![0.1; 5]),
                2 | 3 => (LossPattern::Zero, vec![0.0; 5]),
                _ => (LossPattern::Transition, vec![0.0, 0.1, 0.0, 0.1, 0.0]),
            };
            records.push(StepRecord {
                step: i + 1,
                batch: vec![BatchEntry {
                    problem_id: format!("p{i}"),
                    signals: SignalVector {
                        p_s: 0.0,
                        var_r: 0.1,
                        disagreement: 1.0,
                        level: 5,
                    },
                    score: 1.0,
                }],
                selected: format!("p{i}"),
                burst: BurstReport {
                    problem_id: format!("p{i}"),
                    step_losses: losses,
                    pattern,
                    rollout_counts: vec![4; 5],
                    steps: Vec::new(),
                },
                eval_accuracy: None,
            });
        }
        let summary = summarize_run(&records);
        assert!((summary.loss_patterns.active - 0.4).abs() < 1e-12);
        assert!((summary.loss_patterns.zero - 0.4).abs() < 1e-12);
        assert!((summary.loss_patterns.transition - 0.2).abs() < 1e-12);
        assert_eq!(summary.level_distribution.level5, 1.0);
        assert_eq!(summary.success_bands.zero, 1.0);
        assert_eq!(summary.disagreement_bands.high, 1.0);
        assert!(summary.trajectory.is_empty());
        assert_eq!(summary.final_accuracy, None);
    }

    #[test]
    fn strategy_tie_breaks_and_random_determinism() {
        let s = SignalVector {
            p_s: 0.5,
            var_r: 0.1,
            disagreement: 0.5,
            level: 3,
        };
        let batch = vec![s, s, s];
        for strategy in [
            SelectionStrategy::default(),
            SelectionStrategy::MaxDisagreement,
            SelectionStrategy::MaxVariance,
            SelectionStrategy::MaxLevel,
        ] {
            let (_, idx) = strategy.choose(&batch, 7);
            assert_eq!(idx, 0, "{strategy:?} must tie-break to lowest index");
        }
        let (scores, idx_a) = SelectionStrategy::Random.choose(&batch, 7);
        let (_, idx_b) = SelectionStrategy::Random.choose(&batch, 7);
        assert_eq!(idx_a, idx_b);
        assert_eq!(scores, vec![0.0; 3]);
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = CurriculumConfig::default();
        let mut b = CurriculumConfig::default();
        assert_eq!(a.config_hash(), b.config_hash());
        b.total_steps = 21;
        assert_ne!(a.config_hash(), b.config_hash());
    }
}
