//! End-to-end smoke tests of the `thg` binary: exit codes, file
//! outputs, config precedence, and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thg"))
}

fn write_triangle(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("triangle.txt");
    std::fs::write(&path, "N 3\n0 1 2\n").unwrap();
    path
}

fn write_tiny_dataset(dir: &Path) -> [std::path::PathBuf; 4] {
    let graph = dir.join("g.txt");
    std::fs::write(&graph, "N 6\n0 1 2\n3 4 5\n2 3\n").unwrap();
    let features = dir.join("x.csv");
    std::fs::write(&features, "1.0,0.1\n0.9,0.0\n1.1,0.2\n0.1,1.0\n0.0,0.9\n0.2,1.1\n").unwrap();
    let labels = dir.join("y.csv");
    std::fs::write(&labels, "0,0\n1,0\n2,0\n3,1\n4,1\n5,1\n").unwrap();
    let splits = dir.join("s.csv");
    std::fs::write(&splits, "0,train\n1,val\n2,train\n3,train\n4,val\n5,train\n").unwrap();
    [graph, features, labels, splits]
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "command failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn build_reports_zero_rowsum_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_triangle(dir.path());
    let out = bin()
        .args(["build", "--check-rowsum", "--json", "--graph"])
        .arg(&graph)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["max_rowsum_deviation"].as_f64(), Some(0.0));
    assert!(dir.path().join("adjacency.json").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn missing_graph_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["build", "--graph", "no-such-file.txt", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn denoise_with_zero_steps_copies_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_triangle(dir.path());
    let features = dir.path().join("x.csv");
    std::fs::write(&features, "0.5\n-1.0\n2.0\n").unwrap();
    let out = bin()
        .args(["denoise", "--K", "0", "--json", "--graph"])
        .arg(&graph)
        .arg("--features")
        .arg(&features)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["steps_run"].as_u64(), Some(0));

    let dump: thg_core::talg::TensorDump = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("denoised.json")).unwrap(),
    )
    .unwrap();
    let got = thg_core::talg::SymTensor3::from_dump(&dump).unwrap();
    let feats = ndarray::arr2(&[[0.5], [-1.0], [2.0]]);
    let want = thg_core::builder::symmetrized_signal(&feats, 3).unwrap();
    assert_eq!(got.sub(&want).unwrap().max_abs(), 0.0);
}

#[test]
fn train_is_deterministic_under_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let [graph, features, labels, splits] = write_tiny_dataset(dir.path());
    let run = |out_dir: &Path| {
        let out = bin()
            .args(["train", "--seed", "7", "--epochs", "8", "--hidden", "4"])
            .arg("--graph")
            .arg(&graph)
            .arg("--features")
            .arg(&features)
            .arg("--labels")
            .arg(&labels)
            .arg("--splits")
            .arg(&splits)
            .arg("--out-dir")
            .arg(out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(out_dir.join("metrics.csv")).unwrap()
    };
    assert_eq!(run(&dir.path().join("a")), run(&dir.path().join("b")));
}

#[test]
fn eval_reproduces_the_training_test_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let [graph, features, labels, splits] = write_tiny_dataset(dir.path());
    let data_args = |cmd: &mut Command| {
        cmd.arg("--graph")
            .arg(&graph)
            .arg("--features")
            .arg(&features)
            .arg("--labels")
            .arg(&labels)
            .arg("--splits")
            .arg(&splits);
    };
    let mut train = bin();
    train.args(["train", "--seed", "3", "--epochs", "30", "--hidden", "4", "--json"]);
    data_args(&mut train);
    let out = train.arg("--out-dir").arg(dir.path()).output().unwrap();
    let trained = stdout_json(&out);

    let mut eval = bin();
    eval.args(["eval", "--json", "--checkpoint"]);
    eval.arg(dir.path().join("checkpoint.json"));
    data_args(&mut eval);
    let out = eval.arg("--out-dir").arg(dir.path().join("eval")).output().unwrap();
    let report = stdout_json(&out);
    assert_eq!(report["test_acc"], trained["test_acc"]);
    assert!(dir.path().join("eval/report.json").exists());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let [graph, features, labels, splits] = write_tiny_dataset(dir.path());
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "epochs = 5\nhidden = 4\n").unwrap();
    let out = bin()
        .args(["train", "--epochs", "2", "--config"])
        .arg(&cfg)
        .arg("--graph")
        .arg(&graph)
        .arg("--features")
        .arg(&features)
        .arg("--labels")
        .arg(&labels)
        .arg("--splits")
        .arg(&splits)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    // Header plus the two epochs the flag asked for, not the file's five.
    assert_eq!(metrics.lines().count(), 3);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_triangle(dir.path());
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "epochz = 5\n").unwrap();
    let out = bin()
        .args(["build", "--config"])
        .arg(&cfg)
        .arg("--graph")
        .arg(&graph)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_emits_one_row_per_size_and_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["bench", "--sizes", "4,8", "--repeat", "2", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5); // header + 2 sizes x 2 paths
}
