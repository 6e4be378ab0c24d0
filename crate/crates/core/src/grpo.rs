//! Group-relative advantages and the single-problem training micro-burst.
//!
//! Each completion's reward is standardized against its generation group:
//! `advantage_i = (reward_i - mean) / (std + epsilon)` with population std.
//! A micro-burst runs a short fixed number of such update steps on one
//! selected problem, records the per-step losses the backend reports, and
//! classifies the loss pattern: every step zero (degenerate groups), every
//! step non-zero (active learning), or a mix.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{generate_rollouts, BackendError, PolicyBackend};
use crate::problem::Problem;
use crate::rng::stable_hash;

#[derive(Debug, Error)]
pub enum GrpoError {
    #[error("advantage group needs at least 2 rewards, got {0}")]
    GroupTooSmall(usize),
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("invalid burst config: {0}")]
    InvalidConfig(String),
}

/// Backend failure partway through a burst; completed steps are attached.
#[derive(Debug, Error)]
#[error("burst aborted at step {failed_step}: {source}")]
pub struct BurstAborted {
    pub failed_step: usize,
    pub source: BackendError,
    pub partial: BurstReport,
}

#[derive(Debug, Error)]
pub enum BurstError {
    #[error(transparent)]
    Grpo(#[from] GrpoError),
    #[error(transparent)]
    Aborted(#[from] Box<BurstAborted>),
}

/// A reward group standardized into advantages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageGroup {
    pub rewards: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of the rewards.
    pub std: f64,
    pub epsilon: f64,
    pub advantages: Vec<f64>,
}

/// Standardize one reward group: `(r_i - mean) / (std + epsilon)`.
pub fn group_advantages(rewards: &[f64], epsilon: f64) -> Result<AdvantageGroup, GrpoError> {
    if rewards.len() < 2 {
        return Err(GrpoError::GroupTooSmall(rewards.len()));
    }
    if epsilon <= 0.0 {
        return Err(GrpoError::NonPositiveEpsilon(epsilon));
    }
    let g = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / g;
    let variance = rewards.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / g;
    let std = variance.sqrt();
    let advantages = rewards.iter().map(|r| (r - mean) / (std + epsilon)).collect();
    Ok(AdvantageGroup {
        rewards: rewards.to_vec(),
        mean,
        std,
        epsilon,
        advantages,
    })
}

/// The three observed per-burst loss shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossPattern {
    /// Every step's loss is non-zero: gradients flowed throughout.
    Active,
    /// Every step reported exactly zero: each group had identical rewards.
    Zero,
    /// A mix of zero and non-zero steps.
    Transition,
}

/// Classify a burst's loss sequence. Zero means every loss is exactly 0.
pub fn classify_loss_pattern(losses: &[f64]) -> LossPattern {
    assert!(!losses.is_empty(), "loss pattern needs at least one step");
    let zeros = losses.iter().filter(|&&l| l == 0.0).count();
    if zeros == losses.len() {
        LossPattern::Zero
    } else if zeros == 0 {
        LossPattern::Active
    } else {
        LossPattern::Transition
    }
}

/// Hyperparameters of one training burst.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstConfig {
    /// Rollouts per update group (G).
    pub group_size: usize,
    /// Update steps per burst.
    pub max_steps: usize,
    /// Forwarded to the backend's trainer.
    pub learning_rate: f64,
    pub temperature: f64,
    pub max_new_tokens: usize,
    /// Stabilizer added to the group std.
    pub epsilon: f64,
}

impl Default for BurstConfig {
    fn default() -> Self {
        BurstConfig {
            group_size: 4,
            max_steps: 5,
            learning_rate: 2e-5,
            temperature: 1.0,
            max_new_tokens: 1024,
            epsilon: 1e-4,
        }
    }
}

impl BurstConfig {
    pub fn validate(&self) -> Result<(), GrpoError> {
        if self.group_size < 2 {
            return Err(GrpoError::InvalidConfig(format!(
                "group_size must be at least 2, got {}",
                self.group_size
            )));
        }
        if self.max_steps == 0 {
            return Err(GrpoError::InvalidConfig("max_steps must be positive".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(GrpoError::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.temperature <= 0.0 {
            return Err(GrpoError::InvalidConfig("temperature must be positive".into()));
        }
        if self.max_new_tokens == 0 {
            return Err(GrpoError::InvalidConfig("max_new_tokens must be positive".into()));
        }
        if self.epsilon <= 0.0 {
            return Err(GrpoError::InvalidConfig("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Rewards, advantages and reported loss of one burst step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstStepDetail {
    pub rewards: Vec<f64>,
    pub advantages: Vec<f64>,
    pub loss: f64,
}

/// Everything a completed (or aborted) burst produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstReport {
    pub problem_id: String,
    pub step_losses: Vec<f64>,
    pub pattern: LossPattern,
    pub rollout_counts: Vec<usize>,
    pub steps: Vec<BurstStepDetail>,
}

/// Run one GRPO micro-burst on a single problem.
///
/// Per step: generate `group_size` rollouts at the burst temperature, score
/// them, standardize rewards into advantages, and hand the group to the
/// backend's update. Backend state persists across bursts; nothing is reset
/// here. The caller owns exclusive backend access for the duration. Step
/// seeds derive from `burst_seed` and the step index.
pub fn micro_burst(
    backend: &mut dyn PolicyBackend,
    problem: &Problem,
    config: &BurstConfig,
    burst_seed: u64,
) -> Result<BurstReport, BurstError> {
    config.validate()?;
    let mut report = BurstReport {
        problem_id: problem.id.clone(),
        step_losses: Vec::with_capacity(config.max_steps),
        pattern: LossPattern::Zero,
        rollout_counts: Vec::with_capacity(config.max_steps),
        steps: Vec::with_capacity(config.max_steps),
    };
    for step in 0..config.max_steps {
        let step_seed = stable_hash(&[burst_seed, step as u64]);
        let abort = |source: BackendError, mut partial: BurstReport| {
            if !partial.step_losses.is_empty() {
                partial.pattern = classify_loss_pattern(&partial.step_losses);
            }
            BurstError::Aborted(Box::new(BurstAborted {
                failed_step: step,
                source,
                partial,
            }))
        };
        let rollouts = match generate_rollouts(
            backend,
            problem,
            config.group_size,
            config.temperature,
            config.max_new_tokens,
            step_seed,
        ) {
            Ok(r) => r,
            Err(e) => return Err(abort(e, report)),
        };
        let rewards: Vec<f64> = rollouts.iter().map(|r| r.reward.r_total).collect();
        let group = group_advantages(&rewards, config.epsilon)?;
        let loss =
            match backend.apply_update(problem, &rollouts, &group.advantages, config.learning_rate)
            {
                Ok(l) => l,
                Err(e) => return Err(abort(e, report)),
            };
        report.rollout_counts.push(rollouts.len());
        report.step_losses.push(loss);
        report.steps.push(BurstStepDetail {
            rewards,
            advantages: group.advantages,
            loss,
        });
    }
    report.pattern = classify_loss_pattern(&report.step_losses);
    Ok(report)
}
