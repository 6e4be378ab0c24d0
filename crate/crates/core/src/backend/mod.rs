//! The policy abstraction consumed by signal collection, training bursts,
//! and evaluation.
//!
//! A backend generates responses (one per seed, pure given its state) and
//! applies one group-relative update at a time. Two implementations ship:
//! the deterministic simulated learner in [`sim`] and an HTTP client for a
//! remote model server in [`remote`]. Everything above the trait is backend
//! agnostic.

pub mod remote;
pub mod sim;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::Problem;
use crate::rng::stable_hash;
use crate::signals::RolloutRecord;

/// Seed-stream discriminants. Every consumer of randomness hashes its own
/// stream tag so no two phases ever share a seed.
pub mod stream {
    pub const SIEVE: u64 = 1;
    pub const ROLLOUT: u64 = 2;
    pub const BURST: u64 = 3;
    pub const EVAL: u64 = 4;
    pub const SELECT: u64 = 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    pub supports_update: bool,
    /// Temperature-0 generation is a pure function of the inputs.
    pub deterministic_eval: bool,
}

#[derive(Debug, Error)]
pub enum BackendError {
    /// Transient transport failure; the operation may be retried.
    #[error("backend transport failure: {0}")]
    Transport(String),
    /// The backend violated its contract (wrong arity, malformed payload).
    #[error("backend contract violation: {0}")]
    Contract(String),
    #[error("backend does not support updates")]
    UpdateUnsupported,
}

pub trait PolicyBackend {
    fn capabilities(&self) -> Capabilities;

    /// Generate one response per seed for the given problem. Implementations
    /// must be deterministic in `(state, seeds)` and, at temperature 0,
    /// independent of the seeds entirely.
    fn generate(
        &self,
        problem: &Problem,
        temperature: f64,
        max_new_tokens: usize,
        seeds: &[u64],
    ) -> Result<Vec<String>, BackendError>;

    /// Apply one group-relative update and return the reported loss.
    fn apply_update(
        &mut self,
        problem: &Problem,
        rollouts: &[RolloutRecord],
        advantages: &[f64],
        learning_rate: f64,
    ) -> Result<f64, BackendError>;

    /// Optional batched greedy evaluation (one response per problem).
    /// Backends with a cheaper bulk path override this; the default makes
    /// the caller fall back to per-problem `generate`.
    fn eval_batch(
        &self,
        _problems: &[Problem],
        _max_new_tokens: usize,
    ) -> Option<Result<Vec<String>, BackendError>> {
        None
    }
}

/// Generate and score `k` rollouts. Per-rollout seeds are derived from the
/// base seed by a stable hash of `(seed, rollout_index)`, so the full stream
/// is reproducible and any component change reshuffles it.
pub fn generate_rollouts(
    backend: &dyn PolicyBackend,
    problem: &Problem,
    k: usize,
    temperature: f64,
    max_new_tokens: usize,
    seed: u64,
) -> Result<Vec<RolloutRecord>, BackendError> {
    if k == 0 {
        return Err(BackendError::Contract(
            "rollout count must be at least 1".to_string(),
        ));
    }
    let seeds: Vec<u64> = (0..k as u64).map(|i| stable_hash(&[seed, i])).collect();
    let responses = backend.generate(problem, temperature, max_new_tokens, &seeds)?;
    if responses.len() != k {
        return Err(BackendError::Contract(format!(
            "requested {k} responses, backend returned {}",
            responses.len()
        )));
    }
    Ok(responses
        .into_iter()
        .zip(&seeds)
        .enumerate()
        .map(|(i, (response, &s))| RolloutRecord::score(i, response, &problem.ground_truth, s))
        .collect())
}

/// Result of a greedy evaluation pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// Problems whose generation failed; each counts as incorrect.
    pub backend_failures: usize,
}

/// Greedy (temperature 0) evaluation over a test set. Per-problem backend
/// failures count as incorrect rather than aborting the pass.
pub fn evaluate_policy(
    backend: &dyn PolicyBackend,
    testset: &[Problem],
) -> Result<EvalReport, BackendError> {
    if testset.is_empty() {
        return Err(BackendError::Contract("empty testset".to_string()));
    }
    let mut responses: Vec<Option<String>> = Vec::with_capacity(testset.len());
    match backend.eval_batch(testset, 1024) {
        Some(Ok(batch)) if batch.len() == testset.len() => {
            responses.extend(batch.into_iter().map(Some));
        }
        Some(Ok(batch)) => {
            return Err(BackendError::Contract(format!(
                "eval batch returned {} responses for {} problems",
                batch.len(),
                testset.len()
            )));
        }
        Some(Err(err)) => return Err(err),
        None => {
            for (i, problem) in testset.iter().enumerate() {
                let seed = stable_hash(&[stream::EVAL, i as u64]);
                match backend.generate(problem, 0.0, 1024, &[seed]) {
                    Ok(mut r) if !r.is_empty() => responses.push(Some(r.swap_remove(0))),
                    _ => responses.push(None),
                }
            }
        }
    }
    let mut correct = 0;
    let mut failures = 0;
    for (problem, response) in testset.iter().zip(&responses) {
        match response {
            Some(text) => {
                if crate::verify::verify_response(text, &problem.ground_truth).correct {
                    correct += 1;
                }
            }
            None => failures += 1,
        }
    }
    Ok(EvalReport {
        accuracy: correct as f64 / testset.len() as f64,
        correct,
        total: testset.len(),
        backend_failures: failures,
    })
}
