//! End-to-end tests of the `bigrank` binary: exit codes, file outputs, and
//! reproducibility of outputs from a fixed seed.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bigrank_core::fit::simulate_records;
use bigrank_core::ModelParams;

fn bigrank(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bigrank"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

#[test]
fn simulate_writes_csv_and_manifest_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--policy",
        "popularity",
        "--advantage",
        "200",
        "--a-worst",
        "0.3",
        "--p",
        "0.2",
        "--r",
        "0.09",
        "--votes",
        "20000",
        "--trials",
        "500",
        "--seed",
        "7",
        "--out",
        "sim.csv",
    ];
    assert_exit(&bigrank(dir.path(), &args), 0);
    let csv = fs::read_to_string(dir.path().join("sim.csv")).unwrap();
    let manifest = fs::read_to_string(dir.path().join("sim.csv.manifest.json")).unwrap();
    assert!(csv.starts_with("policy,a_worst,checkpoint,prob_best_first,ci_low,ci_high\n"));
    assert!(csv.lines().nth(1).unwrap().starts_with("popularity_200,0.3,20000,"));
    assert!(manifest.contains("\"subcommand\": \"simulate\""));
    assert!(manifest.contains("\"master_seed\": 7"));

    // breakdown regime: a large head start below the critical quality gap
    // locks the worse answer into the top spot
    let prob: f64 = csv.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(prob < 0.1, "prob_best_first = {prob}");

    // identical invocation, identical bytes
    assert_exit(&bigrank(dir.path(), &args), 0);
    assert_eq!(csv, fs::read_to_string(dir.path().join("sim.csv")).unwrap());
    assert_eq!(
        manifest,
        fs::read_to_string(dir.path().join("sim.csv.manifest.json")).unwrap()
    );
}

#[test]
fn simulate_validates_flags_before_touching_files() {
    let dir = tempfile::tempdir().unwrap();
    // missing --p
    let output = bigrank(
        dir.path(),
        &["simulate", "--policy", "recency", "--a-worst", "0.3", "--r", "0.1"],
    );
    assert_exit(&output, 2);
    // out-of-range probability
    let output = bigrank(
        dir.path(),
        &[
            "simulate", "--policy", "recency", "--a-worst", "0.3", "--p", "1.5", "--r", "0.1",
        ],
    );
    assert_exit(&output, 2);
    // unknown policy
    let output = bigrank(
        dir.path(),
        &[
            "simulate", "--policy", "hot", "--a-worst", "0.3", "--p", "0.2", "--r", "0.1",
        ],
    );
    assert_exit(&output, 2);
    // worst equals best
    let output = bigrank(
        dir.path(),
        &[
            "simulate", "--policy", "recency", "--a-worst", "0", "--p", "0.2", "--r", "0.1",
        ],
    );
    assert_exit(&output, 2);
    assert!(!dir.path().join("simulate.csv").exists());
}

#[test]
fn simulate_quality_with_assumed_params() {
    let dir = tempfile::tempdir().unwrap();
    let output = bigrank(
        dir.path(),
        &[
            "simulate",
            "--policy",
            "quality",
            "--a-worst",
            "0.8",
            "--p",
            "0.2",
            "--r",
            "0.09",
            "--assumed-r",
            "0",
            "--votes",
            "300",
            "--checkpoints",
            "50,300",
            "--trials",
            "40",
            "--seed",
            "3",
            "--out",
            "q.csv",
        ],
    );
    assert_exit(&output, 0);
    let csv = fs::read_to_string(dir.path().join("q.csv")).unwrap();
    // one row per checkpoint
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.contains("quality,0.8,50,"));
    assert!(csv.contains("quality,0.8,300,"));
}

#[test]
fn simulate_recency_tracks_long_run_probability() {
    let dir = tempfile::tempdir().unwrap();
    let output = bigrank(
        dir.path(),
        &[
            "simulate",
            "--policy",
            "recency",
            "--a-worst",
            "0.8",
            "--p",
            "0.2",
            "--r",
            "0.09",
            "--votes",
            "2000",
            "--trials",
            "300",
            "--seed",
            "9",
            "--out",
            "rec.csv",
        ],
    );
    assert_exit(&output, 0);
    let csv = fs::read_to_string(dir.path().join("rec.csv")).unwrap();
    let prob: f64 = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    // closed-form long-run value for a_worst = 0.8 at (p, r) = (0.2, 0.09)
    // is about 0.638; generous band for 300 trials
    assert!((prob - 0.638).abs() < 0.09, "prob {prob}");
}

#[test]
fn phase_diagram_emits_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let output = bigrank(
        dir.path(),
        &["phase-diagram", "--p-max", "0.5", "--a-max", "2.0", "--steps", "100"],
    );
    assert_exit(&output, 0);
    let csv = fs::read_to_string(dir.path().join("phase.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 100 * 100);
    assert!(csv.starts_with("p,a_worst,stable\n"));
    for line in csv.lines().skip(1) {
        let stable = line.split(',').nth(2).unwrap();
        assert!(stable == "0" || stable == "1");
    }
    // both regions present
    assert!(csv.contains(",1\n") && csv.contains(",0\n"));
}

#[test]
fn phase_diagram_rejects_bad_bounds() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(&bigrank(dir.path(), &["phase-diagram", "--steps", "1"]), 2);
    assert_exit(
        &bigrank(dir.path(), &["phase-diagram", "--p-min", "0.6", "--p-max", "0.2"]),
        2,
    );
}

#[test]
fn infer_recovers_balanced_quality() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("ledger.csv"),
        "answer_id,n_t,N_t,n_b,N_b\nx,60,100,40,100\ny,90,100,70,100\n",
    )
    .unwrap();
    let output = bigrank(
        dir.path(),
        &["infer", "--p", "0.2", "--r", "0", "ledger.csv"],
    );
    assert_exit(&output, 0);
    let csv = fs::read_to_string(dir.path().join("infer.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "answer_id,q_hat,rank_first");
    let x_row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(x_row[0], "x");
    let q: f64 = x_row[1].parse().unwrap();
    assert!((q - 0.5).abs() < 1e-6, "q_hat = {q}");
    let y_row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(y_row[2], "1");
}

#[test]
fn infer_data_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    // nonexistent file
    let output = bigrank(dir.path(), &["infer", "--p", "0.1", "--r", "0", "missing.csv"]);
    assert_exit(&output, 1);
    // inconsistent counts
    fs::write(
        dir.path().join("bad.csv"),
        "answer_id,n_t,N_t,n_b,N_b\nx,101,100,0,0\n",
    )
    .unwrap();
    let output = bigrank(dir.path(), &["infer", "--p", "0.1", "--r", "0", "bad.csv"]);
    assert_exit(&output, 1);
}

fn write_choice_csv(path: &Path, params: &ModelParams, n: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::from("a_first,a_last,chose_first\n");
    for record in simulate_records(params, n, &mut rng) {
        text.push_str(&format!(
            "{},{},{}\n",
            record.a_first,
            record.a_last,
            u8::from(record.chose_first)
        ));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn fit_pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let params = ModelParams::new(0.21, 0.08).unwrap();
    write_choice_csv(&dir.path().join("choices.csv"), &params, 600, 11);
    let output = bigrank(
        dir.path(),
        &[
            "fit",
            "--bootstrap",
            "25",
            "--seed",
            "5",
            "--gof",
            "--gof-resamples",
            "50",
            "choices.csv",
        ],
    );
    assert_exit(&output, 0);
    let report = fs::read_to_string(dir.path().join("fit.csv")).unwrap();
    let mut lines = report.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("n,p_hat,r_hat,log_likelihood,p_err,r_err,degenerate"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "600");
    let p_hat: f64 = row[1].parse().unwrap();
    assert!((0.0..=1.0).contains(&p_hat));
    // gof columns populated
    assert!(!row[13].is_empty() && !row[14].is_empty());

    let log = fs::read_to_string(dir.path().join("fit.csv.bootstrap.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 25);
    assert!(log.lines().next().unwrap().contains("\"iteration\":0"));

    let manifest = fs::read_to_string(dir.path().join("fit.csv.manifest.json")).unwrap();
    assert!(manifest.contains("fit.csv.bootstrap.jsonl"));
}

#[test]
fn fit_rejects_insufficient_data() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("one.csv"),
        "a_first,a_last,chose_first\n0.5,-0.5,1\n",
    )
    .unwrap();
    let output = bigrank(dir.path(), &["fit", "--bootstrap", "5", "one.csv"]);
    assert_exit(&output, 1);
}

#[test]
fn normalize_two_point_sample() {
    let dir = tempfile::tempdir().unwrap();
    // guesses 1 and e^2: log values 0 and 2, so mean 1 and std sqrt(2)
    fs::write(
        dir.path().join("guesses.csv"),
        format!("question_id,guess\nq1,1\nq1,{}\n", (2.0f64).exp()),
    )
    .unwrap();
    let output = bigrank(dir.path(), &["normalize", "guesses.csv"]);
    assert_exit(&output, 0);
    let csv = fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    assert_eq!(csv, "question_id,mean_log,std_log,n\nq1,1,1.41421356,2\n");
}

#[test]
fn normalize_rejects_all_invalid_guesses() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("guesses.csv"),
        "question_id,guess\nq1,0.5\nq1,junk\n",
    )
    .unwrap();
    let output = bigrank(dir.path(), &["normalize", "guesses.csv"]);
    assert_exit(&output, 1);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("insufficient data"), "stderr: {stderr}");
}
