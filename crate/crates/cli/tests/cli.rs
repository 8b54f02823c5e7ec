use std::path::Path;
use std::process::{Command, Output};

fn pathint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_trajectory_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = pathint(&[
        "simulate",
        "--scenario",
        "firemen-2x2",
        "--seed",
        "4",
        "--out",
        path_arg(dir.path()),
        "--plots",
        "--record-marginals",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("firemen-2x2_seed4.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x_1,x_2,u_1,u_2,mubar_1,mubar_2,p_1_1,p_2_1");
    let last: Vec<f64> = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(last[0], 1.0);
    assert!(dir.path().join("firemen-2x2_seed4.svg").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, jobs) in [(&a, "1"), (&b, "3")] {
        let out = pathint(&[
            "sweep",
            "--scenario",
            "firemen-6x3",
            "--seeds",
            "0..5",
            "--out",
            path_arg(dir.path()),
            "--jobs",
            jobs,
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in (0..5)
        .map(|s| format!("firemen-6x3_seed{s}.csv"))
        .chain(["summary.csv".to_string()])
    {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn scenario_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pair.toml");
    std::fs::write(
        &file,
        r#"
name = "pair"

[params]
nu = 0.5
R = 2.0
alpha = 500.0
epsilon = 0.02
T = 1.0

[agents]
count = 2
dimension = 2

[targets]
positions = [[1.0, 1.0], [-1.0, 1.0]]

[end_cost]
kind = "firemen"
c = 1.0
"#,
    )
    .unwrap();
    let out = pathint(&[
        "simulate",
        "--scenario",
        path_arg(&file),
        "--out",
        path_arg(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("pair_seed0.csv")).unwrap();
    assert!(csv.starts_with("t,x_1_1,x_1_2,x_2_1,x_2_2,u_1_1,"));
}

#[test]
fn bad_inputs_fail_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.toml");
    std::fs::write(&file, "name = \"x\"\n[params]\nnu = \n").unwrap();
    let out = pathint(&["simulate", "--scenario", path_arg(&file), "--out", path_arg(dir.path())]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("broken.toml") && err.contains("line"), "{err}");

    let out = pathint(&["sweep", "--scenario", "firemen-2x2", "--seeds", "5..5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = pathint(&["simulate", "--scenario", "missing.toml", "--out", path_arg(dir.path())]);
    assert!(!out.status.success());
}

#[test]
fn validate_reports_json() {
    let out = pathint(&["validate", "oracle"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 2);

    let out = pathint(&["validate", ""]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mc_check_prints_estimates() {
    let out = pathint(&["mc-check", "--x", "-0.5", "--target", "1", "--samples", "20000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("log Z: estimate"));
    assert!(text.contains("n 20000"));
    assert!(text.contains("closed form"));
}
