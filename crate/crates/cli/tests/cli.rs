use std::path::Path;
use std::process::{Command, Output};

fn ttef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttef")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn j30(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/j30")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn example_upper_bound_mode() {
    let o = ttef(&["--mode", "ub", "--prop", "ttef", "@example1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("instance,mode,prop,status,value,failures,decisions,seconds,seed\n"));
    let r = &rows(&o)[0];
    assert_eq!((r[0].as_str(), r[1].as_str(), r[2].as_str()), ("example1", "ub", "ttef"));
    assert_eq!((r[3].as_str(), r[4].as_str()), ("optimal", "9"));
}

#[test]
fn example_destructive_lower_bounds() {
    let o = ttef(&["--mode", "lb", "--prop", "ttef", "--start-makespan", "1", "@example1"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &rows(&o)[0];
    assert_eq!((r[3].as_str(), r[4].as_str()), ("optimal", "9"));
}

#[test]
fn unknown_propagation_level_is_a_usage_error() {
    let o = ttef(&["--prop", "bogus", "@example1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn invalid_restart_factor() {
    let o = ttef(&["--restart-factor", "0.5", "@example1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_file_reported_and_batch_continues() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.sm");
    std::fs::write(&bad, "jobs (incl. supersource/sink ):  3\nPRECEDENCE RELATIONS:\n").unwrap();
    let missing = dir.path().join("missing.sm");
    let o = ttef(&[
        bad.to_str().unwrap(),
        "@example1",
        missing.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let r = rows(&o);
    assert_eq!(r.len(), 3);
    assert_eq!(r[0][3], "error");
    assert_eq!(r[0][4], "");
    assert_eq!(r[1][3], "optimal");
    assert_eq!(r[2][3], "error");
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("broken.sm") && err.contains("missing.sm"), "{err}");
}

#[test]
fn json_lines() {
    let o = ttef(&["--output", "json", "--no-timing", "@example1", &j30("j301_1.sm")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["value"], 9);
    assert_eq!(lines[1]["instance"], "j301_1");
    assert_eq!(lines[1]["value"], 43);
    assert_eq!(lines[1]["seconds"], 0.0);
}

#[test]
fn timeout_reports_incumbent_or_bound() {
    let o = ttef(&["--time-limit", "0.001", "--sgs-budget", "0", &j30("gen_rs0.2_rf0.75_1.sm")]);
    assert_eq!(o.status.code(), Some(0));
    let r = &rows(&o)[0];
    assert!(["optimal", "feasible", "unknown"].contains(&r[3].as_str()), "{r:?}");
    assert_eq!(r[4].is_empty(), r[3] == "unknown");
}

fn fixture_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for f in ["j301_1.sm", "gen_rs0.5_rf0.5_1.sm", "gen_rs0.7_rf1.0_1.sm"] {
        std::fs::copy(j30(f), dir.path().join(f)).unwrap();
    }
    dir
}

#[test]
fn bench_two_configurations() {
    let dir = fixture_dir();
    let o = ttef(&["bench", dir.path().to_str().unwrap(), "--props", "tt,ttef"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.starts_with("mode,prop,instances,solved,common,cmpr_seconds,cmpr_failures\n"));
    let r = rows(&o);
    assert_eq!(r.len(), 2);
    for (row, prop) in r.iter().zip(["tt", "ttef"]) {
        assert_eq!(row[1], prop);
        assert_eq!((row[2].as_str(), row[3].as_str(), row[4].as_str()), ("3", "3", "3"));
    }
}

#[test]
fn bench_single_configuration_with_details() {
    let dir = fixture_dir();
    let details = dir.path().join("runs.csv");
    let o = ttef(&[
        "bench",
        dir.path().to_str().unwrap(),
        "--props",
        "ttefc",
        "--modes",
        "lb",
        "--details",
        details.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(rows(&o).len(), 1);
    let runs = std::fs::read_to_string(details).unwrap();
    assert_eq!(runs.lines().count(), 4);
    assert!(runs.lines().skip(1).all(|l| l.contains(",lb,ttefc,optimal,")));
}

#[test]
fn bench_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = ttef(&["bench", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generated_instances_parse_and_solve() {
    let dir = tempfile::tempdir().unwrap();
    let o = ttef(&["generate", dir.path().to_str().unwrap(), "--count", "2", "--seed", "40", "--activities", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let a = dir.path().join("gen_40.sm");
    let b = dir.path().join("gen_41.sm");
    let o = ttef(&[a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(rows(&o).iter().all(|r| r[3] == "optimal"));
}

#[test]
fn time_limit_is_respected() {
    let dir = tempfile::tempdir().unwrap();
    let o = ttef(&[
        "generate",
        dir.path().to_str().unwrap(),
        "--count",
        "1",
        "--strength",
        "0.2",
        "--factor",
        "1.0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let hard = dir.path().join("gen_1.sm");
    for mode in ["ub", "lb"] {
        let t = std::time::Instant::now();
        let o = ttef(&["--mode", mode, "--time-limit", "1", hard.to_str().unwrap()]);
        let took = t.elapsed().as_secs_f64();
        assert_eq!(o.status.code(), Some(0));
        let r = &rows(&o)[0];
        assert!(took < 2.0, "{mode} took {took:.2}s");
        let expected = if mode == "ub" { "feasible" } else { "lower_bound" };
        assert_eq!(r[3], expected);
    }
}
