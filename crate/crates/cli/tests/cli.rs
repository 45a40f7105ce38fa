use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tmfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmfs"))
        .args(args)
        .env_remove("TMFS_OUTPUT")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL: &[&str] = &["--epochs", "3", "--num-clauses", "40", "--trials", "1", "--k-grid", "1,3"];

#[test]
fn train_iris_is_accurate_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&tmfs(&["train", "-d", "iris", "-o", p(dir.path())]));
    assert!(stdout.contains("iris"));
    let baseline = fs::read_to_string(dir.path().join("train/baseline.csv")).unwrap();
    let mut r = csv::Reader::from_reader(baseline.as_bytes());
    let headers = r.headers().unwrap().clone();
    let row = r.records().next().unwrap().unwrap();
    let col = |name: &str| row[headers.iter().position(|h| h == name).unwrap()].parse::<f64>().unwrap();
    let acc = col("test_acc");
    assert!((acc - 0.90).abs() <= 0.05, "iris accuracy {acc}");
    assert!(col("test_macro_f1") > 0.0);
    assert!(dir.path().join("train/models/iris.tm").exists());

    ok(&tmfs(&["train", "-d", "iris", "-o", p(dir.path())]));
    assert_eq!(fs::read_to_string(dir.path().join("train/baseline.csv")).unwrap(), baseline);
}

#[test]
fn rank_all_expands_every_variant() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["rank", "-d", "iris", "-o", p(dir.path()), "--methods", "all"];
    args.extend_from_slice(SMALL);
    ok(&tmfs(&args));
    let timings = fs::read_to_string(dir.path().join("rank/timings.csv")).unwrap();
    assert!(timings.starts_with("config_hash,dataset,label,rank_time"));
    assert_eq!(timings.lines().count(), 1 + 28);
    let scores = fs::read_to_string(dir.path().join("rank/scores.jsonl")).unwrap();
    assert_eq!(scores.lines().count(), 28);
}

#[test]
fn user_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmfs(&["rank", "-d", "iris", "-o", p(dir.path()), "--methods", "Bogus"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("LIME") && err.contains("MutualInfo"), "{err}");

    assert_eq!(tmfs(&["train", "-o", p(dir.path())]).status.code(), Some(1));
    assert_eq!(tmfs(&["train", "-d", "no_such_set", "-o", p(dir.path())]).status.code(), Some(1));
    assert_eq!(tmfs(&["analyze", "-o", p(dir.path())]).status.code(), Some(1));
    assert_eq!(tmfs(&["frobnicate"]).status.code(), Some(1));
    fs::create_dir_all(dir.path().join("eval")).unwrap();
    assert_eq!(tmfs(&["report", "-o", p(dir.path())]).status.code(), Some(1));

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "schema_version = 9\n[[datasets]]\nname = \"iris\"\n").unwrap();
    assert_eq!(tmfs(&["train", "-c", p(&cfg)]).status.code(), Some(1));
    fs::write(&cfg, "[[datasets]]\nname = \"iris\"\nT = 0\n").unwrap();
    assert_eq!(tmfs(&["train", "-c", p(&cfg)]).status.code(), Some(1));
    assert!(tmfs(&["--help"]).status.success());
}

#[test]
fn config_file_with_flag_overrides_and_env_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "seed = 3\nepochs = 200\nnum_clauses = 40\noutput_dir = \"never_used\"\n\
         [[datasets]]\nname = \"feature_interaction\"\ns = 2.0\nT = 20\n",
    )
    .unwrap();
    let env_out = dir.path().join("from_env");
    let out = Command::new(env!("CARGO_BIN_EXE_tmfs"))
        .args(["train", "-c", p(&cfg), "--epochs", "2"])
        .env("TMFS_OUTPUT", &env_out)
        .output()
        .unwrap();
    ok(&out);
    let b = fs::read_to_string(env_out.join("train/baseline.jsonl")).unwrap();
    let rec: serde_json::Value = serde_json::from_str(b.lines().next().unwrap()).unwrap();
    assert_eq!(rec["epochs"], 2);
    assert_eq!(rec["threshold"], 20);
    assert_eq!(rec["num_clauses"], 40);
    assert_eq!(rec["schema_version"], 1);
}

#[test]
fn eval_analyze_report_flow() {
    let dir = tempfile::tempdir().unwrap();
    let root = p(dir.path());
    let mut args = vec![
        "eval", "-d", "digits", "-d", "parity", "-o", root, "--methods", "Chi2,TM-Weight", "--protocols", "all",
    ];
    args.extend_from_slice(SMALL);
    let stdout = ok(&tmfs(&args));
    // 2 methods + Random, 4 protocols, 2 datasets
    assert!(stdout.contains("24 curves, 0 failures"), "{stdout}");

    // rerun resumes with nothing left to do and identical tables
    let curves = fs::read(dir.path().join("eval/curves.csv")).unwrap();
    ok(&tmfs(&args));
    assert_eq!(fs::read(dir.path().join("eval/curves.csv")).unwrap(), curves);

    // another seed into the same directory is refused
    let mut other = args.clone();
    other.extend_from_slice(&["--seed", "5"]);
    assert_eq!(tmfs(&other).status.code(), Some(1));

    ok(&tmfs(&["analyze", "-o", root]));
    let leaves = fs::read_to_string(dir.path().join("analysis/dendrogram_leaves.csv")).unwrap();
    assert_eq!(leaves.lines().count(), 1 + 3);
    for m in ["Chi2", "TM-Weight", "Random"] {
        assert!(dir.path().join(format!("analysis/heatmaps/digits__{m}.csv")).exists(), "{m}");
    }

    ok(&tmfs(&["report", "-o", root]));
    let report = fs::read_to_string(dir.path().join("report.md")).unwrap();
    let hash = fs::read_to_string(dir.path().join("eval/timings.csv")).unwrap();
    let hash = hash.lines().nth(1).unwrap().split(',').next().unwrap().to_string();
    assert!(report.contains(&hash));
    assert!(report.contains("| digits | 1797 | 64 |"), "{report}");
    ok(&tmfs(&["report", "-o", root]));
    assert_eq!(fs::read_to_string(dir.path().join("report.md")).unwrap(), report);

    // mixed hashes are rejected
    let mixed = dir.path().join("mixed");
    fs::create_dir_all(&mixed).unwrap();
    let lines = fs::read_to_string(dir.path().join("eval/curves.jsonl")).unwrap();
    let first = lines.lines().next().unwrap().replace(&hash, "0000000000000000");
    fs::write(mixed.join("curves.jsonl"), format!("{lines}{first}\n")).unwrap();
    let out = tmfs(&["analyze", "-o", root, "--input", p(&mixed)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mixes"));
}
