use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn semnav(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semnav"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn semnav")
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn scenes(dir: &Path, count: &str) {
    ok(&semnav(&["gen-scenarios", "-o", "scenes", "--count", count, "--seeds", "2"], dir));
}

#[test]
fn run_writes_three_artifacts_deterministically() {
    let d = tempfile::tempdir().unwrap();
    scenes(d.path(), "1");
    for out in ["a", "b"] {
        ok(&semnav(&["run", "scenes/scene_000.json", "--preset", "desk", "-o", out], d.path()));
        for f in ["result.json", "trace.jsonl", "final.ppm"] {
            assert!(d.path().join(out).join(f).is_file(), "{out}/{f}");
        }
    }
    let a = fs::read(d.path().join("a/trace.jsonl")).unwrap();
    let b = fs::read(d.path().join("b/trace.jsonl")).unwrap();
    assert_eq!(a, b);
    let result: serde_json::Value = serde_json::from_slice(&fs::read(d.path().join("a/result.json")).unwrap()).unwrap();
    assert!(result["result"]["success"].is_boolean());
}

#[test]
fn missing_map_exits_2_naming_the_path() {
    let d = tempfile::tempdir().unwrap();
    scenes(d.path(), "1");
    fs::remove_file(d.path().join("scenes/scene_000.map")).unwrap();
    let o = semnav(&["run", "scenes/scene_000.json", "-o", "out"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scene_000.map"));
}

#[test]
fn bad_config_reports_the_line() {
    let d = tempfile::tempdir().unwrap();
    scenes(d.path(), "1");
    fs::write(d.path().join("bad.toml"), "version = 1\n[coverage]\ntau = 0.5\nnope = 1\n").unwrap();
    let o = semnav(&["run", "scenes/scene_000.json", "-c", "bad.toml", "-o", "out"], d.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4") && err.contains("nope"), "{err}");
}

#[test]
fn render_frames() {
    let d = tempfile::tempdir().unwrap();
    scenes(d.path(), "1");
    ok(&semnav(&["run", "scenes/scene_000.json", "--preset", "desk", "-o", "run"], d.path()));
    ok(&semnav(&["render", "run/trace.jsonl", "-o", "f0.ppm", "--frame", "0"], d.path()));
    ok(&semnav(&["render", "run/trace.jsonl", "-o", "f0b.ppm", "--frame", "0"], d.path()));
    let a = fs::read(d.path().join("f0.ppm")).unwrap();
    assert!(a.starts_with(b"P6\n"));
    assert_eq!(a, fs::read(d.path().join("f0b.ppm")).unwrap());
    let o = semnav(&["render", "run/trace.jsonl", "-o", "x.ppm", "--frame", "100000"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("valid frames are 0..="));
}

#[test]
fn batch_grid_and_csv_recompute() {
    let d = tempfile::tempdir().unwrap();
    scenes(d.path(), "3");
    let manifest = r#"{"version": 1, "scenarios": ["scenes/scene_000.json", "scenes/scene_001.json", "scenes/scene_002.json"],
        "policies": ["full", "geometric_only"], "seeds": [1, 2], "config": "scenes/config.toml"}"#;
    fs::write(d.path().join("m.json"), manifest).unwrap();
    ok(&semnav(&["batch", "m.json", "-o", "b"], d.path()));
    let csv = fs::read_to_string(d.path().join("b/episodes.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);

    // Recompute SR/SPL per policy from the per-episode JSON files.
    let mut acc: std::collections::BTreeMap<String, (usize, f64, f64)> = Default::default();
    for e in fs::read_dir(d.path().join("b/episodes")).unwrap() {
        let v: serde_json::Value = serde_json::from_slice(&fs::read(e.unwrap().path()).unwrap()).unwrap();
        let r = &v["result"];
        let s = if r["success"].as_bool().unwrap() { 1.0 } else { 0.0 };
        let (p, l) = (r["path_length"].as_f64().unwrap(), r["oracle_length"].as_f64().unwrap());
        let spl = if s > 0.0 { l / p.max(l) } else { 0.0 };
        let a = acc.entry(v["policy"].as_str().unwrap().to_string()).or_default();
        a.0 += 1;
        a.1 += s;
        a.2 += spl;
    }
    assert_eq!(acc.values().map(|a| a.0).sum::<usize>(), 12);
    let summary = fs::read_to_string(d.path().join("b/summary.csv")).unwrap();
    for line in summary.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (n, sr, spl) = acc[f[0]];
        assert_eq!(f[1].parse::<usize>().unwrap(), n);
        assert!((f[2].parse::<f64>().unwrap() - sr / n as f64).abs() < 1e-12);
        assert!((f[3].parse::<f64>().unwrap() - spl / n as f64).abs() < 1e-12);
    }
    assert!(fs::read_to_string(d.path().join("b/comparison.csv")).unwrap().contains("geometric_only,"));
}

#[test]
fn empty_manifest_is_an_error() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("m.json"), r#"{"version": 1, "scenarios": [], "policies": ["full"], "seeds": [1]}"#).unwrap();
    let o = semnav(&["batch", "m.json", "-o", "b"], d.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least one scenario"));
}
