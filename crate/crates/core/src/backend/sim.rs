//! The deterministic simulated learner.
//!
//! A stand-in policy whose competence on a problem is a logistic function of
//! a per-concept skill: `p = sigmoid(skill - (level - 3))`, so a fresh policy
//! solves level-3 problems half the time, easier levels reliably, and harder
//! levels rarely. Wrong answers are drawn from a per-problem confusion set of
//! size `2^level`, which couples difficulty to answer disagreement. Updates
//! move skill by a surrogate of the group-relative objective, and a
//! cross-concept transfer matrix spreads part of each gain, so held-out
//! accuracy responds to training the way the full pipeline expects.
//!
//! Everything is a pure function of `(state, seed)`: two runs with the same
//! master seed produce bit-identical rollout streams.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, Capabilities, PolicyBackend};
use crate::problem::{Problem, SUBJECTS};
use crate::rng::{fnv1a64, stable_hash, SplitMix};
use crate::signals::RolloutRecord;

/// Simulated view of one problem: the concept it trains, its difficulty,
/// the expected answer, and how many plausible wrong answers exist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimProblem {
    pub concept: String,
    pub level: u8,
    pub truth: String,
    pub confusion_set_size: usize,
}

impl SimProblem {
    /// Map a benchmark problem into the simulator: the subject is the
    /// concept and the confusion set doubles per level.
    pub fn from_problem(problem: &Problem) -> SimProblem {
        SimProblem {
            concept: problem.subject.clone(),
            level: problem.level,
            truth: problem.ground_truth.clone(),
            confusion_set_size: 1usize << problem.level.clamp(1, 5),
        }
    }
}

/// Cross-concept transfer coefficients in [0, 1] with a unit diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    concepts: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl TransferMatrix {
    /// Identity on the diagonal, one shared coupling everywhere else.
    pub fn uniform(concepts: &[&str], coupling: f64) -> TransferMatrix {
        assert!(
            (0.0..=1.0).contains(&coupling),
            "transfer coupling must be in [0, 1]"
        );
        let n = concepts.len();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 1.0 } else { coupling })
                    .collect()
            })
            .collect();
        TransferMatrix {
            concepts: concepts.iter().map(|c| c.to_string()).collect(),
            rows,
        }
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    /// Transfer from training `source` into `target`. Unknown concepts
    /// transfer only to themselves.
    pub fn get(&self, target: &str, source: &str) -> f64 {
        if target == source {
            return 1.0;
        }
        match (
            self.concepts.iter().position(|c| c == target),
            self.concepts.iter().position(|c| c == source),
        ) {
            (Some(t), Some(s)) => self.rows[t][s],
            _ => 0.0,
        }
    }
}

/// Full state of the simulated policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPolicyState {
    /// Per-concept competence in logits; absent concepts read as 0.
    pub skill: BTreeMap<String, f64>,
    /// Probability that a rollout wraps its answer in `\boxed{}`.
    pub format_rate: f64,
    pub transfer: TransferMatrix,
    pub rng_master_seed: u64,
}

/// Tunables for constructing a simulated backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub initial_skill: f64,
    pub format_rate: f64,
    /// Off-diagonal transfer coupling between subjects.
    pub transfer_coupling: f64,
    /// The backend-facing learning rate is multiplied by this to get a skill
    /// step in logits (the forwarded rate is scaled for an LLM trainer).
    pub lr_scale: f64,
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            initial_skill: 0.0,
            format_rate: 0.85,
            transfer_coupling: 0.25,
            lr_scale: 2_500.0,
            master_seed: 42,
        }
    }
}

/// Difficulty threshold in logits: level 3 sits at a fresh policy's skill.
fn theta(level: u8) -> f64 {
    f64::from(level) - 3.0
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// The simulated policy's chance of producing a correct answer.
pub fn sim_success_prob(state: &SimPolicyState, problem: &SimProblem) -> f64 {
    let skill = state.skill.get(&problem.concept).copied().unwrap_or(0.0);
    sigmoid(skill - theta(problem.level))
}

/// Deterministic confusion set: `confusion_set_size` distinct wrong answers
/// derived from the problem identity, never colliding with the truth.
fn wrong_answer(problem: &SimProblem, index: usize) -> String {
    let base = 100 + (fnv1a64(problem.truth.as_bytes()) ^ fnv1a64(problem.concept.as_bytes())) % 400;
    let mut produced = 0;
    let mut offset = 0u64;
    loop {
        let candidate = (base + offset).to_string();
        offset += 1;
        if candidate == problem.truth {
            continue;
        }
        if produced == index {
            return candidate;
        }
        produced += 1;
    }
}

/// One simulated response. Temperature 0 is fully greedy: correct iff
/// `p >= 0.5`, boxed iff `format_rate >= 0.5`, fixed wrong answer otherwise,
/// independent of the seed. Positive temperature draws correctness, wrong
/// answer, and formatting from the seeded stream.
pub fn sim_generate(
    state: &SimPolicyState,
    problem: &SimProblem,
    temperature: f64,
    seed: u64,
) -> String {
    let p = sim_success_prob(state, problem);
    let (correct, boxed, wrong_idx) = if temperature <= 0.0 {
        (p >= 0.5, state.format_rate >= 0.5, 0)
    } else {
        let mut rng = SplitMix::new(stable_hash(&[state.rng_master_seed, seed]));
        (
            rng.next_bool(p),
            rng.next_bool(state.format_rate),
            rng.next_index(problem.confusion_set_size.max(1)),
        )
    };
    let answer = if correct {
        problem.truth.clone()
    } else {
        wrong_answer(problem, wrong_idx)
    };
    if boxed {
        format!(
            "Working through the {} problem step by step, the final answer is \\boxed{{{answer}}}.",
            problem.concept
        )
    } else {
        format!(
            "Working through the {} problem step by step, the final answer is {answer}.",
            problem.concept
        )
    }
}

/// Surrogate group-relative update. The loss is
/// `-(1/G) * sum(advantage_i * y_i)` with `y_i = +1` for a correct rollout
/// and `-1` otherwise; skill moves by `lr * transfer * (-loss)` for every
/// concept. All-zero advantages short-circuit: zero loss, state untouched.
pub fn sim_apply_update(
    state: &mut SimPolicyState,
    problem: &SimProblem,
    rollouts: &[RolloutRecord],
    advantages: &[f64],
    learning_rate_sim: f64,
) -> Result<f64, BackendError> {
    if rollouts.len() != advantages.len() {
        return Err(BackendError::Contract(format!(
            "{} rollouts but {} advantages",
            rollouts.len(),
            advantages.len()
        )));
    }
    if rollouts.is_empty() {
        return Err(BackendError::Contract("empty update group".to_string()));
    }
    if advantages.iter().all(|&a| a == 0.0) {
        return Ok(0.0);
    }
    let g = rollouts.len() as f64;
    let signed: f64 = rollouts
        .iter()
        .zip(advantages)
        .map(|(r, &a)| if r.verify.correct { a } else { -a })
        .sum();
    let mut loss = -signed / g;
    if loss == 0.0 {
        loss = 0.0; // normalize -0.0 for clean serialization
    }
    let gain = -loss;
    let mut concepts: Vec<String> = state.transfer.concepts().to_vec();
    if !concepts.iter().any(|c| c == &problem.concept) {
        concepts.push(problem.concept.clone());
    }
    for concept in concepts {
        let coupling = state.transfer.get(&concept, &problem.concept);
        if coupling == 0.0 {
            continue;
        }
        let delta = learning_rate_sim * coupling * gain;
        *state.skill.entry(concept).or_insert(0.0) += delta;
    }
    Ok(loss)
}

/// A [`PolicyBackend`] wrapping the simulated policy state.
#[derive(Debug, Clone)]
pub struct SimBackend {
    state: SimPolicyState,
    lr_scale: f64,
}

impl SimBackend {
    pub fn new(config: SimConfig) -> SimBackend {
        let skill = SUBJECTS
            .iter()
            .map(|s| (s.to_string(), config.initial_skill))
            .collect();
        SimBackend {
            state: SimPolicyState {
                skill,
                format_rate: config.format_rate,
                transfer: TransferMatrix::uniform(&SUBJECTS, config.transfer_coupling),
                rng_master_seed: config.master_seed,
            },
            lr_scale: config.lr_scale,
        }
    }

    pub fn state(&self) -> &SimPolicyState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut SimPolicyState {
        &mut self.state
    }

    /// Bit-level snapshot of the skill table, for no-op update checks.
    pub fn skill_bits(&self) -> Vec<(String, u64)> {
        self.state
            .skill
            .iter()
            .map(|(k, v)| (k.clone(), v.to_bits()))
            .collect()
    }
}

impl PolicyBackend for SimBackend {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            supports_update: true,
            deterministic_eval: true,
        }
    }

    fn generate(
        &self,
        problem: &Problem,
        temperature: f64,
        _max_new_tokens: usize,
        seeds: &[u64],
    ) -> Result<Vec<String>, BackendError> {
        let sim_problem = SimProblem::from_problem(problem);
        Ok(seeds
            .iter()
            .map(|&seed| sim_generate(&self.state, &sim_problem, temperature, seed))
            .collect())
    }

    fn apply_update(
        &mut self,
        problem: &Problem,
        rollouts: &[RolloutRecord],
        advantages: &[f64],
        learning_rate: f64,
    ) -> Result<f64, BackendError> {
        let sim_problem = SimProblem::from_problem(problem);
        // Harder problems shift the policy more per update: the effective
        // rate grows with difficulty, peaking at 5/3 of the base for level 5.
        let difficulty_factor = f64::from(problem.level) / 3.0;
        sim_apply_update(
            &mut self.state,
            &sim_problem,
            rollouts,
            advantages,
            learning_rate * self.lr_scale * difficulty_factor,
        )
    }
}
