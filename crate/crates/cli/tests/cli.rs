use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn isg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isg")).args(args).output().expect("binary runs")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/four_agent.json")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn four_agent_all_solvers() {
    let path = fixture();
    for solver in ["exact", "quacs-classical", "quacs-qaoa"] {
        let report = stdout_json(&isg(&["solve", "--game", path.to_str().unwrap(), "--solver", solver]));
        assert_eq!(report["solver"], solver);
        assert!((report["value"].as_f64().unwrap() - 6.0).abs() < 1e-9);
        assert_eq!(report["structure"], serde_json::json!([[1, 3], [2], [4]]));
        if solver != "exact" {
            assert_eq!(report["history"].as_array().unwrap().len(), 3);
        }
    }
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = isg(&["generate", "--n", "9", "--distribution", "uniform", "--seed", "42", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let stdout = isg(&["generate", "--n", "9", "--distribution", "uniform", "--seed", "42"]);
    assert_eq!(stdout.stdout, std::fs::read(&a).unwrap());
}

#[test]
fn oversized_game_is_rejected() {
    let out = isg(&["generate", "--n", "25"]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "validation");
    assert!(err["error"]["message"].as_str().unwrap().contains("1..=24"));
}

#[test]
fn malformed_game_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"n":2,"weights":[[0,1],[2,0]]}"#).unwrap();
    let out = isg(&["solve", "--game", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("weights"));
}

#[test]
fn bench_rows_reproduce_via_solve() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("run.csv");
    let out = isg(&[
        "bench", "--n-min", "4", "--n-max", "5", "--games-per-n", "2", "--solvers", "exact,quacs-qaoa",
        "--out", csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("run.summary.csv").exists());

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["n", "distribution", "seed", "solver", "p", "value", "er", "time_s"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2 * 2 * 2 * 2);

    for row in rows.iter().filter(|r| &r[3] == "quacs-qaoa").take(3) {
        let game = dir.path().join("g.json");
        let gen = isg(&["generate", "--n", &row[0], "--distribution", &row[1], "--seed", &row[2], "--out", game.to_str().unwrap()]);
        assert!(gen.status.success());
        let report = stdout_json(&isg(&[
            "solve", "--game", game.to_str().unwrap(), "--solver", "quacs-qaoa", "--p", &row[4], "--seed", &row[2],
        ]));
        let expected: f64 = row[5].parse().unwrap();
        assert_eq!(report["value"].as_f64().unwrap(), expected);
    }
}
