//! Shared fixtures: the four-candidate discovery set.
//!
//! Each candidate is a concrete 8-rollout transcript whose derived signals
//! reproduce the reference signal table. Correct answers share one value;
//! wrong answers are distinct except where a duplicate is needed to hit the
//! printed disagreement. Mixed boxed/unboxed formats reconstruct the printed
//! variance where an all-boxed multiset cannot.

use autocur_core::problem::Problem;
use autocur_core::selector::TransferRecord;
use autocur_core::signals::{collect_signals, RolloutRecord, SignalVector};

pub struct Candidate {
    pub problem: Problem,
    pub responses: Vec<String>,
    /// Printed reference row: (p_s, var_r, disagreement, level).
    pub printed: (f64, f64, f64, u8),
    /// Exact population variance of the reconstructed reward multiset.
    pub exact_var: f64,
    /// Measured downstream transfer accuracy.
    pub a_down: f64,
}

fn problem(id: &str, truth: &str, level: u8) -> Problem {
    Problem {
        id: id.to_string(),
        statement: format!("discovery candidate {id}"),
        ground_truth: truth.to_string(),
        level,
        subject: "algebra".to_string(),
        pool_index: 0,
    }
}

fn boxed(answer: &str) -> String {
    format!("Step by step, the final answer is \\boxed{{{answer}}}.")
}

fn unboxed(answer: &str) -> String {
    format!("Step by step, the final answer is {answer}.")
}

/// The four discovery candidates with reconstructed transcripts.
pub fn discovery_candidates() -> Vec<Candidate> {
    vec![
        // #0: 3/8 correct, rewards {1.5 x2, 1.0, 0.5 x4, 0.0}, answers
        // {t,t,t,b,c,d,e,e} -> 5 unique, level 5.
        Candidate {
            problem: problem("cand-0", "7", 5),
            responses: vec![
                boxed("7"),
                boxed("7"),
                unboxed("7"),
                boxed("12"),
                boxed("15"),
                boxed("21"),
                boxed("33"),
                unboxed("33"),
            ],
            printed: (0.375, 0.250, 0.625, 5),
            exact_var: 0.250,
            a_down: 0.40,
        },
        // #1: 7/8 correct, all boxed, two unique answers, level 2.
        Candidate {
            problem: problem("cand-1", "12", 2),
            responses: vec![
                boxed("12"),
                boxed("12"),
                boxed("12"),
                boxed("12"),
                boxed("12"),
                boxed("12"),
                boxed("12"),
                boxed("8"),
            ],
            printed: (0.875, 0.109, 0.250, 2),
            exact_var: 0.109375,
            a_down: 0.40,
        },
        // #2: 1/8 correct, one unboxed wrong, all 8 answers distinct,
        // level 5.
        Candidate {
            problem: problem("cand-2", "3", 5),
            responses: vec![
                boxed("3"),
                boxed("14"),
                boxed("25"),
                boxed("36"),
                boxed("47"),
                boxed("58"),
                boxed("69"),
                unboxed("71"),
            ],
            printed: (0.125, 0.152, 1.000, 5),
            exact_var: 0.15234375,
            a_down: 0.50,
        },
        // #3: 2/8 correct, all boxed, one duplicated wrong answer ->
        // 6 unique, level 4.
        Candidate {
            problem: problem("cand-3", "9", 4),
            responses: vec![
                boxed("9"),
                boxed("9"),
                boxed("11"),
                boxed("13"),
                boxed("17"),
                boxed("19"),
                boxed("23"),
                boxed("23"),
            ],
            printed: (0.250, 0.188, 0.750, 4),
            exact_var: 0.1875,
            a_down: 0.50,
        },
    ]
}

impl Candidate {
    pub fn rollouts(&self) -> Vec<RolloutRecord> {
        self.responses
            .iter()
            .enumerate()
            .map(|(i, r)| {
                RolloutRecord::score(i, r.clone(), &self.problem.ground_truth, i as u64)
            })
            .collect()
    }

    pub fn signals(&self) -> SignalVector {
        collect_signals(&self.problem, &self.rollouts()).expect("non-empty rollouts")
    }

    /// Signals as printed in the reference table (3-decimal variance).
    pub fn printed_signals(&self) -> SignalVector {
        SignalVector {
            p_s: self.printed.0,
            var_r: self.printed.1,
            disagreement: self.printed.2,
            level: self.printed.3,
        }
    }

    pub fn transfer_record(&self) -> TransferRecord {
        TransferRecord {
            signals: self.signals(),
            a_down: self.a_down,
        }
    }
}
