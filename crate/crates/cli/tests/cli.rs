//! Black-box CLI behavior: exit codes, custom dataset ingestion, generated
//! labels, and the compare table.

use std::path::Path;
use std::process::{Command, Output};

fn igprune(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igprune"))
        .args(args)
        .output()
        .expect("spawn igprune")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

#[test]
fn usage_errors_exit_2() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["prune", "--builtin", "karate", "--steps", "0", "--out", "/tmp/never"],
        vec!["prune", "--builtin", "karate", "--method", "nope", "--out", "/tmp/never"],
        vec!["prune", "--out", "/tmp/never"], // no dataset
        vec!["prune", "--builtin", "mystery", "--out", "/tmp/never"],
        vec!["prune", "--builtin", "karate", "--task", "betweenness", "--out", "/tmp/never"],
        vec!["eval", "/tmp/never", "--builtin", "karate", "--delta", "0"],
        vec!["eval", "/tmp/never", "--builtin", "karate", "--reps", "0"],
        vec!["prune", "--builtin", "karate", "--edges", "x.tsv", "--out", "/tmp/never"],
    ];
    for args in cases {
        let out = igprune(&args);
        assert_eq!(exit_code(&out), 2, "args {args:?}: {:?}", out);
    }
}

#[test]
fn data_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.tsv");
    let out = igprune(&[
        "prune",
        "--edges",
        missing.to_str().unwrap(),
        "--task",
        "degree",
        "--out",
        tmp.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 3);

    // eval on a directory without a trajectory
    let out = igprune(&["eval", tmp.path().to_str().unwrap(), "--builtin", "karate"]);
    assert_eq!(exit_code(&out), 3);

    // compare with no readable summaries
    let out = igprune(&["compare", tmp.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
}

fn write_custom_dataset(dir: &Path) -> (String, String, String) {
    // 6-node barbell: two triangles joined by a bridge
    let edges = dir.join("g.tsv");
    std::fs::write(
        &edges,
        "0\t1\n1\t2\n0\t2\n3\t4\n4\t5\n3\t5\n2\t3\n",
    )
    .unwrap();
    let labels = dir.join("labels.txt");
    std::fs::write(&labels, "0\n0\n0\n1\n1\n1\n").unwrap();
    let splits = dir.join("splits.json");
    std::fs::write(
        &splits,
        r#"{"train":[0,3],"val":[1,4],"test":[2,5]}"#,
    )
    .unwrap();
    (
        edges.display().to_string(),
        labels.display().to_string(),
        splits.display().to_string(),
    )
}

#[test]
fn custom_dataset_prune_eval_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let (edges, labels, splits) = write_custom_dataset(tmp.path());
    let traj = tmp.path().join("traj");

    let out = igprune(&[
        "prune", "--edges", &edges, "--labels", &labels, "--splits", &splits,
        "--task", "original", "--method", "LS", "--steps", "3", "--seed", "5",
        "--out", traj.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    assert!(traj.join("step_003.edges").exists());
    assert_eq!(
        std::fs::read_to_string(traj.join("step_003.edges")).unwrap(),
        ""
    );

    let out = igprune(&[
        "eval", traj.to_str().unwrap(), "--edges", &edges, "--labels", &labels,
        "--splits", &splits, "--task", "original", "--reps", "2",
        "--epochs", "40", "--hidden", "8",
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("AUC-IC ")));
    assert!(stdout.lines().any(|l| l.starts_with("IBP ")));
    assert!(traj.join("metrics.csv").exists());
    let metrics = std::fs::read_to_string(traj.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("step,edges,complexity,mi_mean,mi_std,info_score,acc_mean\n"));

    let csv_out = tmp.path().join("cmp.csv");
    let out = igprune(&[
        "compare",
        traj.to_str().unwrap(),
        "--out",
        csv_out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("LS"));
    let csv = std::fs::read_to_string(csv_out).unwrap();
    assert!(csv.starts_with("run,method,seed,auc_ic,ibp,delta\n"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn compare_orders_by_auc_descending_and_skips_broken_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let mk = |name: &str, method: &str, auc: f64| {
        let dir = tmp.path().join(name);
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(
            dir.join("summary.json"),
            format!(
                r#"{{"auc_ic":{auc},"ibp":0.5,"delta":0.8,"method":"{method}","seed":0,"config":{{}},"steps":[]}}"#
            ),
        )
        .unwrap();
        dir
    };
    let low = mk("low", "RE", 0.5);
    let high = mk("high", "igprune-exact", 1.0);
    let broken = tmp.path().join("broken");
    std::fs::create_dir_all(&broken).unwrap();

    let out = igprune(&[
        "compare",
        low.to_str().unwrap(),
        broken.to_str().unwrap(),
        high.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert!(lines[1].starts_with("igprune-exact"), "{stdout}");
    assert!(lines[2].starts_with("RE"), "{stdout}");
    assert!(String::from_utf8(out.stderr).unwrap().contains("skipping"));
}

#[test]
fn generated_centrality_labels_are_emitted() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("traj");
    let out = igprune(&[
        "prune", "--builtin", "karate", "--task", "closeness", "--method", "RN",
        "--steps", "4", "--seed", "3", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let labels = std::fs::read_to_string(dir.join("labels_closeness.txt")).unwrap();
    assert_eq!(labels.lines().count(), 34);
    assert!(labels.lines().all(|l| matches!(l, "0" | "1" | "2")));
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("labels_closeness.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["kind"], "closeness");
    assert_eq!(meta["quantile_boundaries"].as_array().unwrap().len(), 2);
}
