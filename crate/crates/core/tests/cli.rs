use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geoscatter"))
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn graph_scatter_writes_features_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write(&dir, "e.csv", "src,dst,weight\n0,1,1\n");
    let signals = write(&dir, "s.csv", "1\n0\n");
    let out = dir.path().join("f.csv");
    let run = bin()
        .args(["graph-scatter", "--edges", &edges, "--signals", &signals, "--J", "1", "--layers", "1"])
        .args(["--nonwindowed", "phi0", "--seed", "3", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let (header, rows) = geoscatter::io::read_features(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(header.len(), 3);
    assert!((rows[0][1] - 0.61140).abs() < 5e-5);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("f.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "graph-scatter");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["config"]["J"], 1);
    assert!(manifest["version"].as_str().unwrap().starts_with('v'));
    assert!(manifest["runtime_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn missing_weight_column_warns_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write(&dir, "e.csv", "0,1\n1,2\n");
    let signals = write(&dir, "s.csv", "1\n0\n0\n");
    let run = bin()
        .env("RUST_LOG", "warn")
        .args(["graph-scatter", "--edges", &edges, "--signals", &signals, "--moments", "4", "--J", "2", "--layers", "2"])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&run.stderr).contains("weight"));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert_eq!(stdout.lines().next().unwrap().split(',').count(), 52);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(&dir, "p.csv", "0,0\n1,0\n0,1\n");
    let sig = write(&dir, "s.csv", "1\n1\n1\n");
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();

    assert_eq!(code(&["cloud-scatter", "--points", &pts, "--signals", &sig, "--method", "eigen"]), Some(2));
    assert_eq!(code(&["property-suite", "frame,nonsense"]), Some(2));
    assert_eq!(code(&["graph-scatter", "--edges", &pts]), Some(2));
    assert_eq!(code(&["dsbm-bench", "spiral"]), Some(2));

    let bad = write(&dir, "bad.csv", "0,1,1\n1,x,1\n");
    let run = bin().args(["graph-scatter", "--edges", &bad, "--signals", &sig]).output().unwrap();
    assert_eq!(run.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&run.stderr).contains("line 2"));
    assert_eq!(code(&["graph-scatter", "--edges", "/nonexistent.csv", "--signals", &sig]), Some(3));
}

#[test]
fn constant_signal_first_moment_is_the_constant() {
    let dir = tempfile::tempdir().unwrap();
    let pts: String = (0..40).map(|i| {
        let t = i as f64 * std::f64::consts::TAU / 40.0;
        format!("{},{}\n", t.cos(), t.sin())
    }).collect();
    let pts = write(&dir, "p.csv", &pts);
    let sig = write(&dir, "s.csv", &"2.5\n".repeat(40));
    let run = bin()
        .args(["cloud-scatter", "--points", &pts, "--signals", &sig, "--knn", "3", "--J", "2", "--layers", "1", "--moments", "1"])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    let first: f64 = stdout.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((first - 2.5).abs() < 1e-12);
}

#[test]
fn property_suite_and_bench_reports_are_deterministic() {
    let run = |args: &[&str]| {
        let o = bin().args(args).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["runtime_s"] = serde_json::Value::Null;
        v
    };
    let a = run(&["property-suite", "frame,invariance", "--trials", "5", "--seed", "9"]);
    assert_eq!(a["result"].as_array().unwrap().len(), 2);
    assert!(a["result"].as_array().unwrap().iter().all(|c| c["passed"] == true));

    let bench = ["dsbm-bench", "cyclic", "--n", "250", "--J", "3", "--realizations", "1", "--splits", "2", "--seed", "4"];
    assert_eq!(run(&bench), run(&bench));
}
