use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use swe_cli::suites::{draining_scenario, scan_snapshots};
use swe_core::io::{emit_config, read_snapshot, Snapshot};

fn swe(args: &[&str]) -> Output {
    swe_env(args, &[])
}

fn swe_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_swe"));
    cmd.args(args).env_remove("SWE_WORKERS").env_remove("RUST_LOG");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn swe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(path: &Path) -> Snapshot {
    read_snapshot(&mut fs::File::open(path).unwrap()).unwrap()
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const STILL: &str = "\
[run]
name = still
t_end = 20
[grid]
nx = 40
ny = 33
[policy]
cfl = 0.5
[initial]
type = flat
depth = 2
";

fn repo_config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).display().to_string()
}

#[test]
fn still_water_run_exits_zero_with_unchanged_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "still.cfg", STILL);
    let out_dir = dir.path().join("out");
    let o = swe(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).is_empty(), "{}", stderr(&o));
    let snap = read(&out_dir.join("still_final.sws"));
    assert_eq!(snap.state.t, 20.0);
    assert!(snap.state.h.iter().all(|&h| h == 2.0));
    assert!(snap.state.qx.iter().chain(&snap.state.qy).all(|&q| q.to_bits() == 0));
    assert!(stdout(&o).contains("steps: "));
}

#[test]
fn planted_negative_depth_is_an_instability() {
    let dir = tempfile::tempdir().unwrap();
    let text = STILL.replace("type = flat\ndepth = 2\n", "type = drops\ndepth = 1\ndrops = 20.5 16.5 2 -3\n");
    let cfg = write_cfg(dir.path(), "bad.cfg", &text);
    let o = swe(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    let line = err.lines().find(|l| l.starts_with("error[")).unwrap();
    assert!(line.starts_with("error[instability]: "), "{line}");
    assert!(line.contains("cell (20, 14)") && line.contains("t=0"), "{line}");
}

#[test]
fn draining_scenario_aborts_without_writing_nan() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = draining_scenario(dir.path()).unwrap();
    let cfg = write_cfg(dir.path(), "drain.cfg", &emit_config(&scenario));
    let o = swe(&["run", "--config", cfg.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.starts_with("error[instability]: step "), "{err}");
    assert!(err.contains("at cell (") && err.contains(", t="), "{err}");
    let (written, bad) = scan_snapshots(&dir.path().join("out")).unwrap();
    assert!(written >= 1);
    assert_eq!(bad, 0);
    assert!(!dir.path().join("out/drain_final.sws").exists());
}

#[test]
fn error_classes_have_fixed_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "still.cfg", STILL);
    let c = cfg.to_str().unwrap();

    let o = swe(&["run", "--config", c, "--set", "policy.dt_min=5", "--quiet"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error[step-collapse]: "), "{}", stderr(&o));

    let o = swe(&["run", "--config", c, "--set", "policy.cfl=1.5", "--quiet"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]: "), "{}", stderr(&o));
    assert!(stderr(&o).contains("cfl"), "{}", stderr(&o));

    let o = swe(&["run", "--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).starts_with("error[io]: "));

    let o = swe(&["run", "--config", c, "--executor", "warp"]);
    assert_eq!(o.status.code(), Some(2));

    let o = swe(&["run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]: "), "{}", stderr(&o));

    let o = swe_env(&["run", "--config", c], &[("SWE_WORKERS", "lots")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("SWE_WORKERS"));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "bad.cfg", "[run]\nt_end = 5\n[policy]\ncfl = 1.5\n");
    let o = swe(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config]: line 4: "), "{}", stderr(&o));
}

#[test]
fn executor_choice_and_worker_cap_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let text = STILL.replace("type = flat\ndepth = 2\n", "type = drops\ndepth = 1\ndrops = 20.5 16.5 3 0.2\n");
    let cfg = write_cfg(dir.path(), "drop.cfg", &text);
    let c = cfg.to_str().unwrap();
    let mut finals = Vec::new();
    for (exec, workers) in [("naive", None), ("tiled:8", None), ("decomposed:4", None), ("decomposed:8", Some("2"))] {
        let out = dir.path().join(exec.replace(':', "_"));
        let env: Vec<(&str, &str)> = workers.map(|w| ("SWE_WORKERS", w)).into_iter().collect();
        let o = swe_env(
            &["run", "--config", c, "--executor", exec, "--out", out.to_str().unwrap(), "--set", "run.t_end=5", "--quiet"],
            &env,
        );
        assert_eq!(o.status.code(), Some(0), "{exec}: {}", stderr(&o));
        finals.push(fs::read(out.join("still_final.sws")).unwrap());
    }
    assert!(finals.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn resume_from_a_numbered_snapshot_matches_the_whole_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = STILL.replace("type = flat\ndepth = 2\n", "type = drops\ndepth = 1\ndrops = 12.5 16.5 3 0.3\n");
    let cfg = write_cfg(dir.path(), "drop.cfg", &text);
    let c = cfg.to_str().unwrap();
    let a = dir.path().join("a");
    let o = swe(&["run", "--config", c, "--out", a.to_str().unwrap(), "--snapshot-every", "4", "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mid = a.join("still_000002.sws");
    assert!(read(&mid).step_index.is_some());
    let b = dir.path().join("b");
    let o = swe(&["run", "--config", c, "--out", b.to_str().unwrap(), "--resume", mid.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read(a.join("still_final.sws")).unwrap(), fs::read(b.join("still_final.sws")).unwrap());
}

#[test]
fn gen_writes_a_runnable_config_and_initial_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gen");
    let o = swe(&["gen", "five_drops", "--n", "41", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("five_drops.cfg"));
    let snap = read(&out.join("five_drops_initial.sws"));
    assert_eq!((snap.state.spec.nx, snap.state.spec.ny, snap.state.t), (41, 41, 0.0));
    let cfg = out.join("five_drops.cfg");
    let o = swe(&["run", "--config", cfg.to_str().unwrap(), "--set", "run.t_end=2", "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let o = swe(&["gen", "five_drops", "--n", "12", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = swe(&["gen", "lake", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn five_drops_201_reports_steps_and_kernel_times() {
    let o = swe(&["run", "--config", &repo_config("five_drops_201.cfg"), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stdout(&o);
    let value = |key: &str| {
        report.lines().find_map(|l| l.strip_prefix(&format!("{key}: "))).unwrap_or_else(|| panic!("{key} in {report}"))
    };
    assert_eq!(value("cells"), "40401");
    assert_eq!(value("t_final"), "100");
    assert!(value("steps").parse::<u64>().unwrap() > 100);
    for k in ["predictor", "corrector", "stability_guard", "wave_speed_reduction"] {
        assert!(value(&format!("kernel_time_s.{k}")).parse::<f64>().is_ok());
    }
}

#[test]
fn validate_lists_and_runs_suites() {
    let o = swe(&["validate", "list"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 9);
    let o = swe(&["validate", "datasets"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS datasets/five_drops: measured 40401 cells"));
    assert!(stdout(&o).ends_with("summary: 1/1 suites passed\n"));
    let o = swe(&["validate", "conservation"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = swe(&["validate", "everything"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_prints_a_table_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let o = swe(&[
        "bench", "--sizes", "40,48", "--steps", "3", "--reps", "1", "--executors", "naive,tiled:8", "--csv",
        csv.to_str().unwrap(), "--quiet",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], swe_cli::bench::CSV_HEADER);
    assert_eq!(rows.len(), 5);
    assert!(rows[1].starts_with("40,naive,3,1,") && rows[4].starts_with("48,tiled:8,3,1,"), "{text}");
    assert!(stdout(&o).contains("naive step time 48/40: "));
    assert!(stdout(&o).contains("tiled:8 throughput vs naive at 40: "));

    let o = swe(&["bench", "--sizes", "16", "--steps", "1", "--reps", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
