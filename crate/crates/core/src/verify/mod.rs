//! Answer verification for math responses.
//!
//! Free-form model output is reduced to a checkable answer in stages: take
//! the last balanced `\boxed{...}` span, otherwise the last numeric literal;
//! normalize both sides textually; then compare by exact string match, exact
//! (or tolerance) numeric evaluation, and finally symbolic canonical forms.
//! The earliest succeeding stage is reported. Every function here is total:
//! malformed input is a non-match, never an error or a panic.

mod extract;
mod normalize;
mod numeric;
mod rational;
mod symbolic;

use serde::{Deserialize, Serialize};

pub use extract::{extract_boxed, extract_last_number};
pub use normalize::normalize_answer;
pub use numeric::REL_TOLERANCE;

/// How an answer was obtained from the response text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtractMethod {
    Boxed,
    LastNumber,
    None,
}

/// An answer span pulled out of a response, plus its canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedAnswer {
    pub raw_text: String,
    pub normalized: String,
    pub method: ExtractMethod,
}

impl ExtractedAnswer {
    pub fn none() -> ExtractedAnswer {
        ExtractedAnswer {
            raw_text: String::new(),
            normalized: String::new(),
            method: ExtractMethod::None,
        }
    }

    pub fn is_none(&self) -> bool {
        self.method == ExtractMethod::None
    }
}

/// Which comparison decided the match. Stages are ordered by reliability:
/// an exact string match outranks numeric equality, which outranks symbolic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchStage {
    ExactString,
    NumericEqual,
    SymbolicEqual,
    NoMatch,
}

/// Outcome of verifying one response against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub correct: bool,
    pub match_stage: MatchStage,
    /// A balanced `\boxed{}` span was present, independent of correctness.
    pub format_ok: bool,
}

/// Compare two normalized answers, reporting the first succeeding stage.
pub fn check_equivalence(a: &str, b: &str) -> (bool, MatchStage) {
    if a.is_empty() || b.is_empty() {
        return (false, MatchStage::NoMatch);
    }
    if a == b {
        return (true, MatchStage::ExactString);
    }
    if let (Some(x), Some(y)) = (numeric::parse_numeric(a), numeric::parse_numeric(b)) {
        if numeric::numeric_values_equal(x, y) {
            return (true, MatchStage::NumericEqual);
        }
    }
    if symbolic::symbolic_equal(a, b) == Some(true) {
        return (true, MatchStage::SymbolicEqual);
    }
    (false, MatchStage::NoMatch)
}

/// Extract the answer from a response: last balanced boxed span first, last
/// numeric literal otherwise. An empty boxed span falls back to the numeric
/// scan so that an extracted answer is never the empty string.
pub fn extract_answer(response: &str) -> ExtractedAnswer {
    if let Some(span) = extract_boxed(response) {
        let normalized = normalize_answer(span);
        if !span.is_empty() && !normalized.is_empty() {
            return ExtractedAnswer {
                raw_text: span.to_string(),
                normalized,
                method: ExtractMethod::Boxed,
            };
        }
    }
    if let Some(span) = extract_last_number(response) {
        return ExtractedAnswer {
            raw_text: span.to_string(),
            normalized: normalize_answer(span),
            method: ExtractMethod::LastNumber,
        };
    }
    ExtractedAnswer::none()
}

/// Full verification: extraction, normalization of both sides, staged
/// equivalence. `format_ok` tracks only the presence of a balanced boxed
/// span; a wrong boxed answer still keeps it set.
pub fn verify_response(response: &str, ground_truth: &str) -> VerifyResult {
    analyze_response(response, ground_truth).1
}

/// Like [`verify_response`], but also returns the extracted answer for
/// callers that record per-rollout detail.
pub fn analyze_response(response: &str, ground_truth: &str) -> (ExtractedAnswer, VerifyResult) {
    let format_ok = extract_boxed(response).is_some();
    let answer = extract_answer(response);
    if answer.is_none() {
        return (
            answer,
            VerifyResult {
                correct: false,
                match_stage: MatchStage::NoMatch,
                format_ok,
            },
        );
    }
    let truth = normalize_answer(ground_truth);
    let (correct, match_stage) = check_equivalence(&answer.normalized, &truth);
    (
        answer,
        VerifyResult {
            correct,
            match_stage,
            format_ok,
        },
    )
}
