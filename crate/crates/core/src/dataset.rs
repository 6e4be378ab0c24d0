//! JSON Lines readers for the tool's input formats.
//!
//! Problems: `{id, statement, ground_truth, level, subject}` per line.
//! Transfer records: `{p_s, var_r, disagreement, level, a_down}` per line.
//! Transcripts: `{id, ground_truth, level, responses: [..]}` per line, for
//! computing signals from pre-recorded rollouts instead of a live backend.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::Problem;
use crate::selector::TransferRecord;
use crate::signals::SignalVector;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: file contains no records")]
    Empty { path: String },
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: display.clone(),
        source,
    })?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| DatasetError::Parse {
            path: display.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(DatasetError::Empty { path: display });
    }
    Ok(records)
}

pub fn read_problems(path: &Path) -> Result<Vec<Problem>, DatasetError> {
    let problems: Vec<Problem> = read_jsonl(path)?;
    for (i, problem) in problems.iter().enumerate() {
        problem.validate().map_err(|message| DatasetError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message,
        })?;
    }
    Ok(problems)
}

/// Flat transfer-record row as stored on disk.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TransferRow {
    pub p_s: f64,
    pub var_r: f64,
    pub disagreement: f64,
    pub level: u8,
    pub a_down: f64,
}

impl From<TransferRow> for TransferRecord {
    fn from(row: TransferRow) -> TransferRecord {
        TransferRecord {
            signals: SignalVector {
                p_s: row.p_s,
                var_r: row.var_r,
                disagreement: row.disagreement,
                level: row.level,
            },
            a_down: row.a_down,
        }
    }
}

pub fn read_transfer_records(path: &Path) -> Result<Vec<TransferRecord>, DatasetError> {
    let rows: Vec<TransferRow> = read_jsonl(path)?;
    Ok(rows.into_iter().map(TransferRecord::from).collect())
}

/// Pre-recorded rollouts for one candidate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub id: String,
    pub ground_truth: String,
    pub level: u8,
    pub responses: Vec<String>,
}

pub fn read_transcripts(path: &Path) -> Result<Vec<TranscriptRecord>, DatasetError> {
    read_jsonl(path)
}

pub fn write_problems(path: &Path, problems: &[Problem]) -> Result<(), DatasetError> {
    let mut out = String::new();
    for problem in problems {
        out.push_str(&serde_json::to_string(problem).expect("problem serializes"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })
}
