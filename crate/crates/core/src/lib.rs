//! Desk-scale autonomous curriculum machinery for one-shot RL from
//! verifiable rewards: answer verification, rollout uncertainty signals, a
//! linear example selector, group-relative advantages, a deterministic
//! simulated learner, and the sieve/select/burst/evaluate loop.

pub mod backend;
pub mod curriculum;
pub mod dataset;
pub mod grpo;
pub mod linalg;
pub mod problem;
pub mod rng;
pub mod selector;
pub mod signals;
pub mod verify;
