use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn evigrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evigrid")).args(args).output().unwrap()
}

fn write_json(dir: &Path, name: &str, value: serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_vec_pretty(&value).unwrap()).unwrap();
    path
}

fn metrics(out: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(out.join("metrics.json")).unwrap()).unwrap()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(evigrid(&["--help"]).status.code(), Some(0));
    assert_eq!(evigrid(&["--version"]).status.code(), Some(0));
    assert_eq!(evigrid(&["run", "--help"]).status.code(), Some(0));
}

#[test]
fn bad_arguments_exit_1() {
    assert_eq!(evigrid(&[]).status.code(), Some(1));
    assert_eq!(evigrid(&["run", "--out", "x"]).status.code(), Some(1));
    assert_eq!(evigrid(&["run", "--scenario", "a", "--out", "x", "--frames", "many"]).status.code(), Some(1));
}

#[test]
fn configuration_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let missing = evigrid(&["run", "--scenario", "no/such/scenario.json", "--out", out]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("configuration error"));

    let bad = write_json(dir.path(), "bad.json", serde_json::json!({"fusion": {"beta_b": 1.5}}));
    let s = scenario("moving.json");
    let status = evigrid(&["run", "--scenario", s.to_str().unwrap(), "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(status.status.code(), Some(1));

    let unknown = write_json(dir.path(), "unknown.json", serde_json::json!({"fusoin": {}}));
    let status = evigrid(&["run", "--scenario", s.to_str().unwrap(), "--config", unknown.to_str().unwrap(), "--out", out]);
    assert_eq!(status.status.code(), Some(1));

    // output path occupied by a file
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, b"").unwrap();
    let status = evigrid(&["run", "--scenario", s.to_str().unwrap(), "--out", blocker.to_str().unwrap(), "--frames", "1"]);
    assert_eq!(status.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // the ego sits at (20, -10), outside this grid
    let config = write_json(
        dir.path(),
        "far.json",
        serde_json::json!({"grid": {"origin_x": 100.0, "origin_y": 100.0, "resolution": 0.5, "width": 20, "height": 20}}),
    );
    let s = scenario("moving.json");
    let out = dir.path().join("out");
    let status = evigrid(&[
        "run",
        "--scenario",
        s.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("runtime error"));
}

#[test]
fn run_writes_the_requested_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let s = scenario("parked.json");
    let c = scenario("config.json");
    let run = evigrid(&[
        "run",
        "--scenario",
        s.to_str().unwrap(),
        "--config",
        c.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--frames",
        "3",
        "--images",
        "--dump-masses",
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    for frame in 0..3 {
        for suffix in ["composite.ppm", "F.pgm", "C.pgm", "N.pgm", "S.pgm", "V.pgm", "masses.csv"] {
            let path = out.join(format!("frame_{frame:04}_{suffix}"));
            assert!(path.is_file(), "{} missing", path.display());
        }
    }
    assert!(!out.join("frame_0003_composite.ppm").exists());
    let resolved: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("resolved_config.json")).unwrap()).unwrap();
    assert_eq!(resolved["frames"], 3);
    assert_eq!(resolved["fusion"]["use_prior"], true);
    assert_eq!(metrics(&out)["frames_evaluated"], 3);

    let csv = std::fs::read_to_string(out.join("frame_0000_masses.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("i,j,"), "{header}");
    assert_eq!(csv.lines().count(), 1 + 120 * 60);
}

#[test]
fn seed_and_no_map_overrides_reach_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let s = scenario("parked.json");
    let run = evigrid(&[
        "run",
        "--scenario",
        s.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--frames",
        "2",
        "--seed",
        "1234",
        "--no-map",
    ]);
    assert_eq!(run.status.code(), Some(0));
    let resolved: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("resolved_config.json")).unwrap()).unwrap();
    assert_eq!(resolved["seed"], 1234);
    assert_eq!(resolved["fusion"]["use_prior"], false);
    // composite images are off by default
    assert!(!out.join("frame_0000_composite.ppm").exists());
}

#[test]
fn empty_world_without_map_or_free_evidence_is_all_ties() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_json(
        dir.path(),
        "empty.json",
        serde_json::json!({
            "ego": [[0.0, 0.0, 0.0, 0.0]],
            "duration": 1.0,
            "grid": {"origin_x": -10.0, "origin_y": -10.0, "resolution": 0.5, "width": 40, "height": 40}
        }),
    );
    let c = write_json(
        dir.path(),
        "config.json",
        serde_json::json!({"fusion": {"mu_free": 0.0}, "outputs": {"composite": true}}),
    );
    let out = dir.path().join("out");
    let run = evigrid(&[
        "run",
        "--scenario",
        s.to_str().unwrap(),
        "--config",
        c.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--no-map",
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let m = metrics(&out);
    assert_eq!(m["tie_count"], m["total_count"]);
    let image = std::fs::read(out.join("frame_0010_composite.ppm")).unwrap();
    let header = b"P6\n40 40\n255\n";
    assert!(image.starts_with(header));
    assert!(image[header.len()..].iter().all(|b| *b == 128));
}
