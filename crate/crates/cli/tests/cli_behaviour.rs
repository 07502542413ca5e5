use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn medge(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_medge"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn features_csv(root: &Path) -> String {
    let out = root.join("feat");
    let o = medge(&out, &["features", "--n-per-class", "8", "--len", "512"]);
    assert!(o.status.success(), "{}", stderr(&o));
    out.join("features.csv").to_string_lossy().into_owned()
}

#[test]
fn features_are_deterministic_for_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let o = medge(dir, &["--seed", "7", "features", "--n-per-class", "5", "--len", "512"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = fs::read_to_string(a.join("features.csv")).unwrap();
    assert_eq!(text, fs::read_to_string(b.join("features.csv")).unwrap());
    assert_eq!(text.lines().count(), 1 + 15);
    assert!(a.join("features.manifest.json").is_file());
}

#[test]
fn missing_directory_is_a_data_error_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("no_such_set");
    let o = medge(
        tmp.path(),
        &[
            "features",
            "--normal",
            missing.to_str().unwrap(),
            "--seizure",
            missing.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no_such_set"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = medge(tmp.path(), &["features", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let o = medge(tmp.path(), &["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("sweep-gamma"));
}

#[test]
fn single_class_table_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = features_csv(tmp.path());
    let text = fs::read_to_string(&csv).unwrap();
    let normal_only: String = text
        .lines()
        .filter(|l| !l.contains("seizure"))
        .map(|l| format!("{l}\n"))
        .collect();
    let path = tmp.path().join("normal_only.csv");
    fs::write(&path, normal_only).unwrap();
    let o = medge(
        &tmp.path().join("sw"),
        &["sweep-gamma", "--features", path.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn sweep_has_baseline_columns_and_two_thirds_at_gamma_one() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = features_csv(tmp.path());
    let out = tmp.path().join("sw");
    let o = medge(&out, &["sweep-gamma", "--features", &csv, "--folds", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("gamma,ffc,knn,gnb"));
    let last: Vec<&str> = table.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0], "1.0000");
    assert_eq!(last[1], "0.666667");
}

#[test]
fn config_file_fills_defaults_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = features_csv(tmp.path());
    let conf = tmp.path().join("cv.conf");
    fs::write(&conf, "classifier = knn\nknn_k = 5\nfolds = 3\n").unwrap();
    let out = tmp.path().join("cv");
    let o = medge(
        &out,
        &[
            "cross-validate",
            "--features",
            &csv,
            "--config",
            conf.to_str().unwrap(),
            "--folds",
            "4",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("cv.json")).unwrap()).unwrap();
    assert_eq!(report["k"], 4);
    assert_eq!(report["classifier"], "knn(k=5)");
}

#[test]
fn unachievable_ratio_lists_valid_ones() {
    let tmp = tempfile::tempdir().unwrap();
    let o = medge(
        tmp.path(),
        &[
            "bench-compression",
            "--records",
            "20",
            "--segment-len",
            "16",
            "--crs",
            "3",
            "--epochs",
            "1",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("achievable ratios: [2, 4, 8, 16]"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn divergent_training_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let o = medge(
        tmp.path(),
        &[
            "train-sae",
            "--n-per-class",
            "4",
            "--len",
            "256",
            "--sizes",
            "32,4",
            "--activation",
            "identity",
            "--lr",
            "1e6",
        ],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn mismatched_model_halves_fail_before_simulation() {
    let tmp = tempfile::tempdir().unwrap();
    for (dir, seed) in [("m1", "1"), ("m2", "2")] {
        let o = medge(
            &tmp.path().join(dir),
            &[
                "--seed",
                seed,
                "train-sae",
                "--n-per-class",
                "3",
                "--len",
                "256",
                "--sizes",
                "256,16",
                "--epochs",
                "2",
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let out = tmp.path().join("sim");
    let enc = tmp.path().join("m1/encoder.bin");
    let dec = tmp.path().join("m2/decoder.bin");
    let o = medge(
        &out,
        &[
            "simulate",
            "--n-per-class",
            "3",
            "--len",
            "256",
            "--payload",
            "compressed",
            "--encoder",
            enc.to_str().unwrap(),
            "--decoder",
            dec.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(!out.join("stream.bin").exists());
    let o = medge(&out, &["simulate", "--payload", "compressed"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn cbs_simulation_bytes_match_frame_sizes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cbs");
    let o = medge(&out, &["simulate", "--mode", "cbs", "--n-per-class", "100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let log: serde_json::Value = serde_json::from_slice(&fs::read(out.join("log.json")).unwrap()).unwrap();
    assert_eq!(log["total_bytes"], 4_924_800);
    for name in ["report.json", "lifetime.json", "stream.bin"] {
        assert!(out.join(name).is_file(), "{name}");
    }
}

#[test]
fn replay_detects_changed_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = features_csv(tmp.path());
    let out = tmp.path().join("ffc");
    assert!(medge(&out, &["train-ffc", "--features", &csv]).status.success());
    let mut text = fs::read_to_string(&csv).unwrap();
    text.push_str("extra,normal,1,1,1,1,1\n");
    fs::write(&csv, text).unwrap();
    let manifest = out.join("train-ffc.manifest.json");
    let o = medge(
        &tmp.path().join("again"),
        &["replay", "--manifest", manifest.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("changed"), "{}", stderr(&o));
}
