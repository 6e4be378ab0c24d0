//! End-to-end tests of the command-line surface: artifact byte-stability,
//! the stable exit-code contract, and signal reproduction from transcripts.

use std::path::Path;
use std::process::{Command, Output};

fn autocur(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autocur"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

/// Transcripts mirroring the four discovery candidates (same reward and
/// answer multisets as the core fixtures).
fn discovery_transcripts() -> String {
    let boxed = |a: &str| format!("the final answer is \\boxed{{{a}}}.");
    let plain = |a: &str| format!("the final answer is {a}.");
    let rows = [
        serde_json::json!({
            "id": "cand-0", "ground_truth": "7", "level": 5,
            "responses": [
                boxed("7"), boxed("7"), plain("7"), boxed("12"),
                boxed("15"), boxed("21"), boxed("33"), plain("33"),
            ],
        }),
        serde_json::json!({
            "id": "cand-1", "ground_truth": "12", "level": 2,
            "responses": [
                boxed("12"), boxed("12"), boxed("12"), boxed("12"),
                boxed("12"), boxed("12"), boxed("12"), boxed("8"),
            ],
        }),
        serde_json::json!({
            "id": "cand-2", "ground_truth": "3", "level": 5,
            "responses": [
                boxed("3"), boxed("14"), boxed("25"), boxed("36"),
                boxed("47"), boxed("58"), boxed("69"), plain("71"),
            ],
        }),
        serde_json::json!({
            "id": "cand-3", "ground_truth": "9", "level": 4,
            "responses": [
                boxed("9"), boxed("9"), boxed("11"), boxed("13"),
                boxed("17"), boxed("19"), boxed("23"), boxed("23"),
            ],
        }),
    ];
    rows.iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

#[test]
fn signals_from_transcripts_reproduce_reference_table() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("transcripts.jsonl"), discovery_transcripts()).unwrap();
    let out = autocur(
        &[
            "signals",
            "--transcripts",
            "transcripts.jsonl",
            "--out",
            "sig",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sig/signals.csv")).unwrap();
    let expected = "candidate_id,p_s,var_r,disagreement,level\n\
                    cand-0,0.375,0.25,0.625,5\n\
                    cand-1,0.875,0.109375,0.25,2\n\
                    cand-2,0.125,0.15234375,1,5\n\
                    cand-3,0.25,0.1875,0.75,4\n";
    assert_eq!(csv, expected);
    assert!(dir.path().join("sig/signals.json").exists());
}

#[test]
fn signals_single_rollout_edge() {
    let dir = tempfile::tempdir().unwrap();
    let row = serde_json::json!({
        "id": "solo", "ground_truth": "7", "level": 3,
        "responses": ["\\boxed{7}"],
    });
    std::fs::write(dir.path().join("t.jsonl"), row.to_string() + "\n").unwrap();
    let out = autocur(
        &["signals", "--transcripts", "t.jsonl", "--out", "."],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("signals.csv")).unwrap();
    assert!(csv.contains("solo,1,0,1,3"), "csv was: {csv}");
}

#[test]
fn signals_empty_problems_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("problems.jsonl"), "").unwrap();
    let out = autocur(
        &["signals", "--problems", "problems.jsonl", "--out", "."],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn signals_without_inputs_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = autocur(&["signals", "--out", "."], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_backend_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let problems = serde_json::json!({
        "id": "p0", "statement": "s", "ground_truth": "7", "level": 3,
        "subject": "algebra",
    });
    std::fs::write(dir.path().join("problems.jsonl"), problems.to_string() + "\n").unwrap();
    let out = autocur(
        &[
            "signals",
            "--problems",
            "problems.jsonl",
            "--backend",
            "quantum",
            "--out",
            ".",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn fit_writes_model_and_repeats_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let rows = [
        (0.375, 0.250, 0.625, 5, 0.40),
        (0.875, 0.109, 0.250, 2, 0.40),
        (0.125, 0.152, 1.000, 5, 0.50),
        (0.250, 0.188, 0.750, 4, 0.50),
    ];
    let lines: String = rows
        .iter()
        .map(|&(p_s, var_r, d, level, a_down)| {
            serde_json::json!({
                "p_s": p_s, "var_r": var_r, "disagreement": d,
                "level": level, "a_down": a_down,
            })
            .to_string()
        })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(dir.path().join("records.jsonl"), lines).unwrap();

    let out = autocur(
        &["fit", "--records", "records.jsonl", "--out", "a"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("R^2 1.000000"), "stdout: {stdout}");

    let out2 = autocur(
        &["fit", "--records", "records.jsonl", "--out", "b"],
        dir.path(),
    );
    assert_eq!(code(&out2), 0);
    let a = std::fs::read(dir.path().join("a/selector.json")).unwrap();
    let b = std::fs::read(dir.path().join("b/selector.json")).unwrap();
    assert_eq!(a, b, "refit must be byte-identical");
}

#[test]
fn fit_single_record_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let row = serde_json::json!({
        "p_s": 0.5, "var_r": 0.1, "disagreement": 0.5, "level": 3, "a_down": 0.4,
    });
    std::fs::write(dir.path().join("one.jsonl"), row.to_string() + "\n").unwrap();
    let out = autocur(&["fit", "--records", "one.jsonl", "--out", "."], dir.path());
    assert_eq!(code(&out), 4);
}

#[test]
fn run_produces_artifacts_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "pool_size": 40,
        "shuffle_seed": 42,
        "batch_size": 4,
        "rollouts_per_candidate": 4,
        "total_steps": 4,
        "eval_every": 2,
        "testset_size": 10,
        "master_seed": 9,
        "burst": {
            "group_size": 4, "max_steps": 5, "learning_rate": 2e-5,
            "temperature": 1.0, "max_new_tokens": 1024, "epsilon": 1e-4,
        },
        "scoring": {"strategy": "selector", "model": {
            "w_p": 0.005, "w_sigma": 0.183, "w_d": -0.075, "w_level": 0.219,
            "intercept": 0.0, "source": "deployment",
        }},
    });
    std::fs::write(dir.path().join("config.json"), config.to_string()).unwrap();

    let out = autocur(
        &["run", "--config", "config.json", "--out", "run1"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "config.json",
        "events.jsonl",
        "trajectory.csv",
        "summary.json",
        "manifest.json",
    ] {
        assert!(dir.path().join("run1").join(name).exists(), "missing {name}");
    }

    let out2 = autocur(
        &["run", "--config", "config.json", "--out", "run2"],
        dir.path(),
    );
    assert_eq!(code(&out2), 0);
    let a = std::fs::read(dir.path().join("run1/events.jsonl")).unwrap();
    let b = std::fs::read(dir.path().join("run2/events.jsonl")).unwrap();
    assert_eq!(a, b, "rerun with same config must be byte-identical");

    // Trajectory grid: baseline plus evals at steps 2 and 4.
    let trajectory = std::fs::read_to_string(dir.path().join("run1/trajectory.csv")).unwrap();
    let steps: Vec<&str> = trajectory
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(steps, vec!["0", "2", "4"]);

    // Report emission from the run directory.
    let out3 = autocur(&["report", "--run", "run1"], dir.path());
    assert_eq!(code(&out3), 0);
    for name in [
        "fig1_signals.csv",
        "fig2_levels.csv",
        "fig3_space.csv",
        "table8_distributions.json",
        "losspatterns.json",
    ] {
        assert!(dir.path().join("run1").join(name).exists(), "missing {name}");
    }
    let fig2 = std::fs::read_to_string(dir.path().join("run1/fig2_levels.csv")).unwrap();
    assert_eq!(fig2.lines().count(), 5, "header plus one row per step");
    let patterns: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run1/losspatterns.json")).unwrap())
            .unwrap();
    let sum = patterns["active"].as_f64().unwrap()
        + patterns["zero"].as_f64().unwrap()
        + patterns["transition"].as_f64().unwrap();
    assert!((sum - 1.0).abs() < 1e-9);
}

#[test]
fn run_with_batch_exceeding_pool_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let out = autocur(
        &["run", "--steps", "2", "--batch", "2000", "--out", "r"],
        dir.path(),
    );
    assert_eq!(code(&out), 5);
}

#[test]
fn report_without_events_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = autocur(&["report", "--run", "empty"], dir.path());
    assert_eq!(code(&out), 2);
}
