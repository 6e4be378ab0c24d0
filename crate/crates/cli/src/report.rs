//! The report subcommand: figure and table data from a run's event log.

use std::path::Path;

use serde::Serialize;

use autocur_core::curriculum::{RunDir, RunEvent, RunSummary, StepRecord};
use autocur_core::signals::SignalVector;

use crate::CliError;

#[derive(Serialize)]
struct Table8 {
    level_distribution: autocur_core::curriculum::LevelShares,
    success_bands: autocur_core::curriculum::SuccessShares,
    disagreement_bands: autocur_core::curriculum::DisagreementShares,
}

fn selected_signals(record: &StepRecord) -> Option<SignalVector> {
    record
        .batch
        .iter()
        .find(|e| e.problem_id == record.selected)
        .map(|e| e.signals)
}

pub fn cmd_report(run: &Path) -> Result<(), CliError> {
    let run_dir = RunDir::create(run).map_err(|e| CliError::Input(e.to_string()))?;
    if !run_dir.events_path().exists() {
        return Err(CliError::Input(format!(
            "{}: no events.jsonl in run directory",
            run.display()
        )));
    }
    let events = run_dir
        .read_events()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let records: Vec<&StepRecord> = events
        .iter()
        .filter_map(|e| match e {
            RunEvent::Step(record) => Some(record),
            _ => None,
        })
        .collect();
    if records.is_empty() {
        return Err(CliError::Input(
            "event log contains no completed steps".to_string(),
        ));
    }

    let mut fig1 = String::from("step,p_s,var_r,disagreement\n");
    let mut fig2 = String::from("step,level\n");
    let mut fig3 = String::from("step,p_s,disagreement,var_r,level\n");
    for record in &records {
        if let Some(s) = selected_signals(record) {
            fig1.push_str(&format!(
                "{},{},{},{}\n",
                record.step, s.p_s, s.var_r, s.disagreement
            ));
            fig2.push_str(&format!("{},{}\n", record.step, s.level));
            fig3.push_str(&format!(
                "{},{},{},{},{}\n",
                record.step, s.p_s, s.disagreement, s.var_r, s.level
            ));
        }
    }

    let summary = RunSummary::from_events(&events);
    let table8 = Table8 {
        level_distribution: summary.level_distribution,
        success_bands: summary.success_bands,
        disagreement_bands: summary.disagreement_bands,
    };
    let patterns = summary.loss_patterns;

    let write = |name: &str, contents: String| -> Result<(), CliError> {
        std::fs::write(run.join(name), contents).map_err(|e| CliError::Input(e.to_string()))
    };
    write("fig1_signals.csv", fig1)?;
    write("fig2_levels.csv", fig2)?;
    write("fig3_space.csv", fig3)?;
    write(
        "table8_distributions.json",
        serde_json::to_string_pretty(&table8).expect("table serializes") + "\n",
    )?;
    write(
        "losspatterns.json",
        serde_json::to_string_pretty(&patterns).expect("patterns serialize") + "\n",
    )?;
    println!(
        "wrote report data for {} steps to {}",
        records.len(),
        run.display()
    );
    Ok(())
}
