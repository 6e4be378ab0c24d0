//! The signals, fit, and run subcommands.

use std::path::{Path, PathBuf};

use serde::Serialize;

use autocur_core::backend::remote::{RemoteBackend, RemoteConfig};
use autocur_core::backend::sim::{SimBackend, SimConfig};
use autocur_core::backend::{generate_rollouts, BackendError, PolicyBackend};
use autocur_core::curriculum::{run_curriculum, CurriculumConfig, CurriculumError, RunDir};
use autocur_core::dataset;
use autocur_core::problem::synthetic_dataset;
use autocur_core::rng::stable_hash;
use autocur_core::selector::fit_selector;
use autocur_core::signals::{self, RolloutRecord, SignalVector};

use crate::CliError;

fn make_backend(spec: &str, master_seed: u64) -> Result<Box<dyn PolicyBackend>, CliError> {
    if spec == "sim" {
        return Ok(Box::new(SimBackend::new(SimConfig {
            master_seed,
            ..SimConfig::default()
        })));
    }
    if let Some(url) = spec.strip_prefix("remote:") {
        if url.is_empty() {
            return Err(CliError::Input("remote backend needs a URL".to_string()));
        }
        return Ok(Box::new(RemoteBackend::new(RemoteConfig::new(url))));
    }
    Err(CliError::Input(format!(
        "unknown backend {spec:?}; expected `sim` or `remote:<url>`"
    )))
}

fn backend_error(err: BackendError) -> CliError {
    CliError::Backend(err.to_string())
}

#[derive(Serialize)]
struct SignalRow {
    candidate_id: String,
    p_s: f64,
    var_r: f64,
    disagreement: f64,
    level: u8,
}

pub fn cmd_signals(
    problems: Option<PathBuf>,
    transcripts: Option<PathBuf>,
    backend_spec: &str,
    k: usize,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    if k == 0 {
        return Err(CliError::Input("--k must be at least 1".to_string()));
    }
    let rows: Vec<(String, SignalVector)> = match (problems, transcripts) {
        (_, Some(path)) => {
            let transcripts =
                dataset::read_transcripts(&path).map_err(|e| CliError::Input(e.to_string()))?;
            let mut rows = Vec::with_capacity(transcripts.len());
            for t in &transcripts {
                if t.responses.is_empty() {
                    return Err(CliError::Input(format!(
                        "transcript {} has no responses",
                        t.id
                    )));
                }
                let rollouts: Vec<RolloutRecord> = t
                    .responses
                    .iter()
                    .enumerate()
                    .map(|(i, r)| RolloutRecord::score(i, r.clone(), &t.ground_truth, i as u64))
                    .collect();
                let vector = SignalVector {
                    p_s: signals::success_probability(&rollouts)
                        .map_err(|e| CliError::Input(e.to_string()))?,
                    var_r: signals::reward_variance(&rollouts)
                        .map_err(|e| CliError::Input(e.to_string()))?,
                    disagreement: signals::disagreement(&rollouts)
                        .map_err(|e| CliError::Input(e.to_string()))?,
                    level: t.level,
                };
                rows.push((t.id.clone(), vector));
            }
            rows
        }
        (Some(path), None) => {
            let problems =
                dataset::read_problems(&path).map_err(|e| CliError::Input(e.to_string()))?;
            let backend = make_backend(backend_spec, seed)?;
            let mut rows = Vec::with_capacity(problems.len());
            for (i, problem) in problems.iter().enumerate() {
                let rollout_seed = stable_hash(&[seed, i as u64]);
                let rollouts =
                    generate_rollouts(backend.as_ref(), problem, k, 1.0, 1024, rollout_seed)
                        .map_err(backend_error)?;
                let vector = signals::collect_signals(problem, &rollouts)
                    .map_err(|e| CliError::Input(e.to_string()))?;
                rows.push((problem.id.clone(), vector));
            }
            rows
        }
        (None, None) => {
            return Err(CliError::Input(
                "provide --problems or --transcripts".to_string(),
            ));
        }
    };

    std::fs::create_dir_all(out).map_err(|e| CliError::Input(e.to_string()))?;
    std::fs::write(out.join("signals.csv"), signals::signals_to_csv(&rows))
        .map_err(|e| CliError::Input(e.to_string()))?;
    let json_rows: Vec<SignalRow> = rows
        .iter()
        .map(|(id, s)| SignalRow {
            candidate_id: id.clone(),
            p_s: s.p_s,
            var_r: s.var_r,
            disagreement: s.disagreement,
            level: s.level,
        })
        .collect();
    let json = serde_json::to_string_pretty(&json_rows).expect("rows serialize");
    std::fs::write(out.join("signals.json"), json + "\n")
        .map_err(|e| CliError::Input(e.to_string()))?;
    println!("wrote signals for {} candidates to {}", rows.len(), out.display());
    Ok(())
}

pub fn cmd_fit(records_path: &Path, out: &Path) -> Result<(), CliError> {
    let records =
        dataset::read_transfer_records(records_path).map_err(|e| CliError::Input(e.to_string()))?;
    let model = fit_selector(&records).map_err(|e| CliError::Fit(e.to_string()))?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Input(e.to_string()))?;
    std::fs::write(out.join("selector.json"), model.to_json() + "\n")
        .map_err(|e| CliError::Input(e.to_string()))?;
    println!("fitted selector on {} records", records.len());
    println!(
        "  w_p {:+.6}  w_sigma {:+.6}  w_d {:+.6}  w_level {:+.6}  intercept {:+.6}",
        model.w_p, model.w_sigma, model.w_d, model.w_level, model.intercept
    );
    if let Some(r2) = model.fit_r2 {
        println!("  in-sample R^2 {r2:.6}");
    }
    Ok(())
}

pub struct RunArgs {
    pub config: Option<PathBuf>,
    pub problems: Option<PathBuf>,
    pub backend: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub k: Option<usize>,
    pub batch: Option<usize>,
    pub steps: Option<usize>,
    pub eval_every: Option<usize>,
}

fn curriculum_error(err: CurriculumError) -> CliError {
    match err {
        CurriculumError::Backend(_) | CurriculumError::Burst(_) => {
            CliError::Backend(err.to_string())
        }
        CurriculumError::Io(e) => CliError::Input(e.to_string()),
        _ => CliError::Config(err.to_string()),
    }
}

pub fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let mut config: CurriculumConfig = match &args.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Input(e.to_string()))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => CurriculumConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(k) = args.k {
        config.rollouts_per_candidate = k;
    }
    if let Some(batch) = args.batch {
        config.batch_size = batch;
    }
    if let Some(steps) = args.steps {
        config.total_steps = steps;
    }
    if let Some(eval_every) = args.eval_every {
        config.eval_every = eval_every;
    }
    config.validate().map_err(curriculum_error)?;

    let dataset = match &args.problems {
        Some(path) => dataset::read_problems(path).map_err(|e| CliError::Input(e.to_string()))?,
        None => {
            let n = config.pool_size + config.testset_size;
            synthetic_dataset(n, config.shuffle_seed)
        }
    };

    let backend_spec = args.backend.as_deref().unwrap_or("sim");
    let mut backend = make_backend(backend_spec, config.master_seed)?;

    let out_dir = args
        .out
        .unwrap_or_else(|| PathBuf::from("runs").join(format!("run-{}", config.config_hash())));
    let run_dir = RunDir::create(&out_dir).map_err(|e| CliError::Input(e.to_string()))?;
    run_dir
        .write_config(&config)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let mut sink = run_dir
        .events_sink()
        .map_err(|e| CliError::Input(e.to_string()))?;

    let summary = run_curriculum(&dataset, backend.as_mut(), &config, &mut sink)
        .map_err(curriculum_error)?;

    run_dir
        .write_summary(&summary)
        .map_err(|e| CliError::Input(e.to_string()))?;
    run_dir
        .write_trajectory(&summary)
        .map_err(|e| CliError::Input(e.to_string()))?;
    run_dir
        .write_manifest(&config)
        .map_err(|e| CliError::Input(e.to_string()))?;

    println!("run complete: {}", out_dir.display());
    for point in &summary.trajectory {
        println!("  step {:>3}  accuracy {:.4}", point.step, point.accuracy);
    }
    Ok(())
}
