//! Per-rollout rewards and per-candidate uncertainty signals.
//!
//! A rollout's total reward is correctness (0 or 1) plus format compliance
//! (0 or 0.5). From a group of rollouts for one candidate we compute the
//! four selector inputs: success probability, population reward variance,
//! answer disagreement, and the problem's difficulty level. The variance
//! additionally decomposes into math, format, and covariance components,
//! which is what separates genuine mathematical uncertainty from
//! formatting noise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::Problem;
use crate::verify::{analyze_response, ExtractMethod, ExtractedAnswer, VerifyResult};

pub const FORMAT_REWARD: f64 = 0.5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignalError {
    #[error("signal computation requires at least one rollout")]
    EmptyRollouts,
}

/// Composite reward for one rollout: `r_total = r_correct + r_format`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_correct: f64,
    pub r_format: f64,
    pub r_total: f64,
}

impl RewardBreakdown {
    pub fn from_verify(verify: &VerifyResult) -> RewardBreakdown {
        let r_correct = if verify.correct { 1.0 } else { 0.0 };
        let r_format = if verify.format_ok { FORMAT_REWARD } else { 0.0 };
        RewardBreakdown {
            r_correct,
            r_format,
            r_total: r_correct + r_format,
        }
    }
}

/// One stochastic completion with its extracted answer and scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutRecord {
    pub rollout_index: usize,
    pub response: String,
    pub answer: ExtractedAnswer,
    pub verify: VerifyResult,
    pub reward: RewardBreakdown,
    pub seed: u64,
}

impl RolloutRecord {
    /// Score a raw response against ground truth and build the full record.
    pub fn score(rollout_index: usize, response: String, ground_truth: &str, seed: u64) -> Self {
        let (answer, verify) = analyze_response(&response, ground_truth);
        let reward = RewardBreakdown::from_verify(&verify);
        RolloutRecord {
            rollout_index,
            response,
            answer,
            verify,
            reward,
            seed,
        }
    }
}

/// The four selector inputs for one candidate problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalVector {
    /// Fraction of rollouts whose answer matched ground truth.
    pub p_s: f64,
    /// Population variance of total rewards.
    pub var_r: f64,
    /// Unique extracted answers divided by rollout count.
    pub disagreement: f64,
    /// Difficulty level of the problem, 1..=5.
    pub level: u8,
}

/// Reward-variance split into math, format, and cross terms. The identity
/// `var_math + var_format + 2*covariance = var_r` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceDecomposition {
    pub var_math: f64,
    pub var_format: f64,
    pub covariance: f64,
}

/// Composite reward from scratch; convenience over the verify pipeline.
pub fn score_rollout(response: &str, ground_truth: &str) -> RewardBreakdown {
    let (_, verify) = analyze_response(response, ground_truth);
    RewardBreakdown::from_verify(&verify)
}

/// Fraction of rollouts with a correct answer.
pub fn success_probability(rollouts: &[RolloutRecord]) -> Result<f64, SignalError> {
    if rollouts.is_empty() {
        return Err(SignalError::EmptyRollouts);
    }
    let correct = rollouts.iter().filter(|r| r.verify.correct).count();
    Ok(correct as f64 / rollouts.len() as f64)
}

/// Population variance with sorted accumulation, so the result is
/// bit-identical under any permutation of the inputs.
fn population_variance(values: impl Iterator<Item = f64>) -> f64 {
    let mut sorted: Vec<f64> = values.collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Population variance (divide by K, not K-1) of total rewards.
pub fn reward_variance(rollouts: &[RolloutRecord]) -> Result<f64, SignalError> {
    if rollouts.is_empty() {
        return Err(SignalError::EmptyRollouts);
    }
    Ok(population_variance(
        rollouts.iter().map(|r| r.reward.r_total),
    ))
}

/// Unique normalized answers over rollout count. Rollouts with no
/// extractable answer are maximal uncertainty: each counts as unique.
pub fn disagreement(rollouts: &[RolloutRecord]) -> Result<f64, SignalError> {
    if rollouts.is_empty() {
        return Err(SignalError::EmptyRollouts);
    }
    let mut extracted: Vec<&str> = rollouts
        .iter()
        .filter(|r| r.answer.method != ExtractMethod::None)
        .map(|r| r.answer.normalized.as_str())
        .collect();
    extracted.sort_unstable();
    extracted.dedup();
    let unextractable = rollouts
        .iter()
        .filter(|r| r.answer.method == ExtractMethod::None)
        .count();
    Ok((extracted.len() + unextractable) as f64 / rollouts.len() as f64)
}

/// Split reward variance into correctness variance, format variance, and
/// their population covariance.
pub fn variance_decomposition(
    rollouts: &[RolloutRecord],
) -> Result<VarianceDecomposition, SignalError> {
    if rollouts.is_empty() {
        return Err(SignalError::EmptyRollouts);
    }
    // Sorted pairs keep the whole decomposition permutation-invariant at
    // the bit level, matching the variance helper.
    let mut pairs: Vec<(f64, f64)> = rollouts
        .iter()
        .map(|r| (r.reward.r_correct, r.reward.r_format))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = pairs.len() as f64;
    let mean_math = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_format = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let var_math = population_variance(pairs.iter().map(|p| p.0));
    let var_format = population_variance(pairs.iter().map(|p| p.1));
    let covariance = pairs
        .iter()
        .map(|p| (p.0 - mean_math) * (p.1 - mean_format))
        .sum::<f64>()
        / n;
    Ok(VarianceDecomposition {
        var_math,
        var_format,
        covariance,
    })
}

/// Bundle the per-candidate signals with the problem's difficulty level.
pub fn collect_signals(
    problem: &Problem,
    rollouts: &[RolloutRecord],
) -> Result<SignalVector, SignalError> {
    Ok(SignalVector {
        p_s: success_probability(rollouts)?,
        var_r: reward_variance(rollouts)?,
        disagreement: disagreement(rollouts)?,
        level: problem.level,
    })
}

/// Write signal rows as CSV: `candidate_id,p_s,var_r,disagreement,level`.
pub fn signals_to_csv(rows: &[(String, SignalVector)]) -> String {
    let mut out = String::from("candidate_id,p_s,var_r,disagreement,level\n");
    for (id, s) in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            id, s.p_s, s.var_r, s.disagreement, s.level
        ));
    }
    out
}
