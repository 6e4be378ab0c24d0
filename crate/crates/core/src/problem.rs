//! Benchmark problem records and the synthetic desk-scale dataset.

use serde::{Deserialize, Serialize};

use crate::rng::stable_hash;

/// One benchmark question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    /// Stable identifier, unique within a dataset.
    pub id: String,
    pub statement: String,
    pub ground_truth: String,
    /// Difficulty score, 1 (easiest) to 5 (hardest).
    pub level: u8,
    pub subject: String,
    /// Position in the shuffled dataset order; assigned by pool init.
    #[serde(default)]
    pub pool_index: usize,
}

impl Problem {
    pub fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("problem id is empty".to_string());
        }
        if self.ground_truth.is_empty() {
            return Err(format!("problem {}: ground_truth is empty", self.id));
        }
        if !(1..=5).contains(&self.level) {
            return Err(format!(
                "problem {}: level {} outside 1..=5",
                self.id, self.level
            ));
        }
        Ok(())
    }
}

pub const SUBJECTS: [&str; 7] = [
    "prealgebra",
    "algebra",
    "number_theory",
    "counting_probability",
    "geometry",
    "intermediate_algebra",
    "precalculus",
];

/// Deterministic synthetic dataset for simulated runs and tests.
///
/// Levels and subjects are spread by a stable hash of the index so any
/// contiguous slice is level- and subject-mixed. Ground truths are small
/// integers except for an occasional exact fraction on the harder levels,
/// which exercises the LaTeX path of the verifier end to end.
pub fn synthetic_dataset(n: usize, seed: u64) -> Vec<Problem> {
    // Harder levels dominate, like a competition benchmark's tail.
    const LEVEL_MIX: [u8; 10] = [1, 2, 3, 3, 4, 4, 4, 5, 5, 5];
    (0..n)
        .map(|i| {
            let h = stable_hash(&[seed, i as u64]);
            let level = LEVEL_MIX[(h % 10) as usize];
            let subject = SUBJECTS[(h >> 8) as usize % SUBJECTS.len()];
            let value = (h >> 16) % 97;
            let ground_truth = if level >= 4 && h.is_multiple_of(7) {
                format!("\\frac{{{}}}{{{}}}", value, value + 1)
            } else {
                value.to_string()
            };
            Problem {
                id: format!("syn-{i:05}"),
                statement: format!(
                    "Problem {i}: evaluate the {subject} expression E_{i} and give the result."
                ),
                ground_truth,
                level,
                subject: subject.to_string(),
                pool_index: i,
            }
        })
        .collect()
}
