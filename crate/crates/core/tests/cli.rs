use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cfak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfak")).args(args).output().expect("spawn cfak")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn list_shows_every_benchmark() {
    let out = cfak(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in cfak_core::benchmarks::IDS {
        assert!(text.contains(id), "{id} missing from:\n{text}");
    }
    assert!(text.contains("pf_ref=4.4454e-3"));
}

#[test]
fn unknown_benchmark_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"benchmark": "nope", "method": "cfak_c"}"#);
    let out = cfak(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("four_branch"), "{err}");
}

#[test]
fn bad_override_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"benchmark": "parabolic", "method": "cfak_c", "overrides": {"pso": {"n_swarm": "many"}}}"#,
    );
    let out = cfak(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pso.n_swarm"));
}

#[test]
fn run_writes_outputs_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let cfg = write_config(
        dir.path(),
        r#"{"benchmark": "parabolic", "method": "cfak_c", "n_runs": 3,
            "overrides": {"n_mc_init": 100000, "mc_budget": 100000, "same_population_reference": true}}"#,
    );
    let a = out_a.to_string_lossy().into_owned();
    let b = out_b.to_string_lossy().into_owned();
    assert!(cfak(&["run", &cfg, "--out", &a]).status.success());
    assert!(cfak(&["run", &cfg, "--out", &b, "--jobs", "2"]).status.success());

    let runs = fs::read_to_string(out_a.join("runs.csv")).unwrap();
    assert_eq!(runs, fs::read_to_string(out_b.join("runs.csv")).unwrap());
    let lines: Vec<&str> = runs.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("seed,status,pf"));
    assert!(lines[1..].iter().all(|l| l.contains(",ok,")));
    for seed in 0..3 {
        let log = fs::read_to_string(out_a.join(format!("log_{seed}.csv"))).unwrap();
        assert_eq!(log, fs::read_to_string(out_b.join(format!("log_{seed}.csv"))).unwrap());
    }

    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_a.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["n_seeds"], 3);
    assert!(stats["stats"]["pf_mean"].as_f64().unwrap() > 0.0);
    assert!(stats["stats_same_population"]["avg_rel_error"].as_f64().unwrap() < 0.1);
    assert!(out_a.join("timing.csv").exists());
}

#[test]
fn grid_rejects_non_planar_benchmarks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"benchmark": "oscillator", "method": "cfak_c"}"#);
    let out = cfak(&["grid", &cfg, "--out", &dir.path().to_string_lossy()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grid_matches_the_true_limit_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"benchmark": "four_branch", "method": "cfak_c", "seed_base": 4}"#);
    let out = cfak(&["grid", &cfg, "--out", &dir.path().to_string_lossy()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let grid = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    let mut lines = grid.lines();
    assert_eq!(lines.next(), Some("u1,u2,mu,sigma,g_true"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 201 * 201);
    // Sign agreement inside the region that carries the probability mass.
    let inner: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0].hypot(r[1]) <= 4.0).collect();
    let agree = inner.iter().filter(|r| (r[2] < 0.0) == (r[4] < 0.0)).count();
    assert!(agree as f64 >= 0.999 * inner.len() as f64, "{agree}/{}", inner.len());

    let doe = fs::read_to_string(dir.path().join("doe.csv")).unwrap();
    let pts: Vec<Vec<f64>> =
        doe.lines().skip(1).map(|l| l.split(',').take(3).map(|v| v.parse().unwrap()).collect()).collect();
    assert!(pts.len() > 6);
    for r in &rows {
        let near = pts.iter().any(|p| (p[1] - r[0]).hypot(p[2] - r[1]) < 1e-3);
        if !near {
            assert!(r[3] > 0.0, "zero sigma away from the design at {:?}", &r[..2]);
        }
    }
}
