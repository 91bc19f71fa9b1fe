use std::path::Path;
use std::process::{Command, Output};

use inkdrop::fixtures::{single_stain_group, worked_example_specs};
use inkdrop::io::write_model;
use inkdrop::Model;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inkdrop"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field(text: &str, key: &str) -> usize {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

fn save(dir: &Path, name: &str, model: &Model) {
    write_model(model, std::fs::File::create(dir.join(name)).unwrap()).unwrap();
}

#[test]
fn fixture_train_and_infer() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["train", "--out", "m.idsm"]);
    assert!(out.status.success(), "{out:?}");
    assert_eq!(field(&stdout(&out), "groups"), 2);

    let out = run(dir.path(), &["infer", "m.idsm", "2.5", "3.5"]);
    assert!(out.status.success());
    let y: f64 = stdout(&out).trim().parse().unwrap();
    assert!((y - 1.3366).abs() <= 0.02, "{y}");
    assert_eq!(stdout(&out).trim().split('.').nth(1).unwrap().len(), 4);
}

#[test]
fn uncovered_query_exits_3() {
    let dir = TempDir::new().unwrap();
    run(dir.path(), &["train", "--out", "m.idsm"]);
    let out = run(dir.path(), &["infer", "m.idsm", "5", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout(&out).trim(), "NO_COVERAGE");
}

#[test]
fn trace_lists_every_degree() {
    let dir = TempDir::new().unwrap();
    run(dir.path(), &["train", "--out", "m.idsm"]);
    let out = run(dir.path(), &["infer", "m.idsm", "2.5", "3.5", "--trace"]);
    assert!(out.status.success());
    let trace: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let groups = trace["group_confidences"].as_array().unwrap();
    assert_eq!(groups.len(), 2);
    let g2_level1 = groups[1][0].as_f64().unwrap();
    assert!((g2_level1 - 0.67).abs() < 0.01);
    assert_eq!(
        trace["plane_confidences"][0][1].as_array().unwrap().len(),
        2
    );
}

#[test]
fn gated_policy_keeps_fewer_groups() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "train",
            "--set",
            "task=regression",
            "--set",
            "train_count=300",
            "--set",
            "policy=error-gated",
            "--set",
            "tolerance=0.3",
            "--out",
            "m.idsm",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(field(&text, "groups") < field(&text, "samples"));
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = run(
        dir.path(),
        &[
            "train",
            "--set",
            "task=csv",
            "--set",
            "dataset=absent.csv",
            "--out",
            "m.idsm",
        ],
    );
    assert_eq!(missing.status.code(), Some(2));
    std::fs::write(
        dir.path().join("bad.toml"),
        "task = \"circles\"\nradius = 3\n",
    )
    .unwrap();
    let unknown = run(
        dir.path(),
        &["train", "--config", "bad.toml", "--out", "m.idsm"],
    );
    assert_eq!(unknown.status.code(), Some(2));
    let no_model = run(dir.path(), &["infer", "absent.idsm", "1"]);
    assert_eq!(no_model.status.code(), Some(2));
}

#[test]
fn csv_task_trains_from_file() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("d.csv"),
        "a,b,label\n0,0,x\n0,1,x\n1,0,y\n1,1,y\n0.5,0,x\n0.5,1,y\n",
    )
    .unwrap();
    let out = run(
        dir.path(),
        &[
            "train",
            "--set",
            "task=csv",
            "--set",
            "dataset=d.csv",
            "--set",
            "input_levels=8",
            "--out",
            "m.idsm",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    assert_eq!(field(&stdout(&out), "samples"), 4);
}

#[test]
fn bench_reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = [
        "bench",
        "spiral",
        "--set",
        "points_per_class=100",
        "--set",
        "dense_per_class=200",
        "--out",
    ];
    let mut first = args.to_vec();
    first.push("a");
    assert!(run(dir.path(), &first).status.success());
    // re-run from the echoed config alone
    let second = run(
        dir.path(),
        &["bench", "spiral", "--config", "a/spiral.toml", "--out", "b"],
    );
    assert!(second.status.success(), "{second:?}");
    for ext in ["json", "csv", "toml"] {
        let a = std::fs::read(dir.path().join(format!("a/spiral.{ext}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b/spiral.{ext}"))).unwrap();
        assert_eq!(a, b, "{ext} differs");
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a/spiral.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["points_per_class"], 100);
}

#[test]
fn table_bench_covers_every_cell() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &["bench", "table1", "--set", "seeds=[0]", "--out", "r"],
    );
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(dir.path().join("r/table1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 19);
    assert!(csv.lines().any(|l| l.starts_with("f1-l250-r10,NAN")));
}

#[test]
fn check_mode_flags_band_failures() {
    let dir = TempDir::new().unwrap();
    let out = run(
        dir.path(),
        &[
            "bench",
            "circles",
            "--set",
            "seeds=[0]",
            "--set",
            "radius_in=2",
            "--set",
            "test_count=200",
            "--out",
            "r",
            "--check",
        ],
    );
    assert_eq!(out.status.code(), Some(4), "{out:?}");
    let bad_task = run(
        dir.path(),
        &["bench", "iris", "--set", "task=circles", "--out", "r"],
    );
    assert_eq!(bad_task.status.code(), Some(2));
}

#[test]
fn hardware_comparison_on_fixture() {
    let dir = TempDir::new().unwrap();
    run(dir.path(), &["train", "--out", "m.idsm"]);
    let out = run(
        dir.path(),
        &["compare-hw", "m.idsm", "--set", "queries=300"],
    );
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sweep = report["sweep"].as_array().unwrap();
    assert_eq!(sweep.len(), 3);
    // output range of the fixture is one unit
    assert!(sweep[0]["max_deviation"].as_f64().unwrap() <= 0.02);
    assert_eq!(sweep[0]["underflows_on_covered"], 0);
    let means: Vec<f64> = sweep
        .iter()
        .map(|p| p["mean_deviation"].as_f64().unwrap())
        .collect();
    assert!(means[2] < means[0]);
    assert_eq!(report["monotone"], true);
}

#[test]
fn empty_model_underflows_on_hardware() {
    let dir = TempDir::new().unwrap();
    let (specs, radii) = worked_example_specs();
    save(dir.path(), "empty.idsm", &Model::new(specs, radii));
    let out = run(
        dir.path(),
        &[
            "compare-hw",
            "empty.idsm",
            "--set",
            "queries=20",
            "--set",
            "epsilons=[0.01]",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["sweep"][0]["divider_underflows"], 20);
    assert_eq!(report["sweep"][0]["compared"], 0);
}

#[test]
fn dump_plane_writes_stain() {
    let dir = TempDir::new().unwrap();
    save(dir.path(), "s.idsm", &single_stain_group());
    let out = run(
        dir.path(),
        &[
            "dump-plane",
            "s.idsm",
            "--group",
            "1",
            "--plane",
            "1",
            "--out",
            "p.csv",
        ],
    );
    assert!(out.status.success(), "{out:?}");
    let rows: Vec<Vec<f64>> = std::fs::read_to_string(dir.path().join("p.csv"))
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.len() == 10));
    // apex at input level 5, output level 7; radius 2 reaches two cells out
    assert_eq!(rows[6][4], 1.0);
    assert_eq!(rows[6][3], 0.5);
    assert_eq!(rows[5][5], 0.5);
    assert_eq!(rows[6][2], 0.0);
    assert_eq!(rows.iter().flatten().filter(|&&v| v > 0.0).count(), 9);
    let missing = run(
        dir.path(),
        &[
            "dump-plane",
            "s.idsm",
            "--group",
            "2",
            "--plane",
            "1",
            "--out",
            "q.csv",
        ],
    );
    assert_eq!(missing.status.code(), Some(2));
}
