use std::process::Command;

fn bench(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nap-bench"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn converged_run_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bench(&["--nx", "16", "--procs", "4", "--ppn", "2", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.json", "levels.csv", "messages.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    // Wall-clock goes to stderr only.
    assert!(String::from_utf8_lossy(&o.stderr).contains("wall-clock"));
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(!json.contains("wall"));

    let c = bench(&["--compare", &format!("{out}/report.json")]);
    assert_eq!(c.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&c.stdout).contains("model-derived"));
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for (args, key) in [
        (vec!["--procs", "0"], "procs"),
        (vec!["--strength-theta", "1.5"], "strength-theta"),
        (vec!["--strategy", "nap4"], "strategy"),
        (vec!["--solver", "gmg"], "solver"),
        (vec!["--matrix-file", "/no/such/file.mtx"], "/no/such/file.mtx"),
        (vec!["--model-params", "/no/such/params.toml"], "model-params"),
    ] {
        let o = bench(&[args.as_slice(), &["--out", out]].concat());
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(key), "{args:?}: {err}");
    }
}

#[test]
fn divergence_and_stagnation_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bench(&["--nx", "16", "--jacobi-weight", "3", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    let o = bench(&["--nx", "16", "--max-iters", "1", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn anisotropic_problem_takes_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = bench(&[
        "--problem", "aniso2d", "--nx", "16", "--eps", "0.01", "--theta-angle", "45",
        "--solver", "sa", "--sweeps", "2", "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let theta = v["config"]["problem"]["theta"].as_f64().unwrap();
    assert_eq!(theta, 45f64.to_radians());
    assert_eq!(v["config"]["setup"]["prolongation_sweeps"], 2);
}
