//! End-to-end tests of the binary: exit codes, file outputs, determinism.

use declutter::eventlog::EventLog;
use declutter::scenario::Scenario;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_declutter"))
}

/// A per-test scratch directory, recreated empty on entry.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("declutter-cli-tests").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn gen_scene(dir: &Path, n: u32, seed: u64) -> PathBuf {
    let path = dir.join(format!("scene_{n}_{seed}.txt"));
    let out = run(bin()
        .args(["gen", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out"])
        .arg(&path));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    path
}

#[test]
fn gen_writes_a_loadable_deterministic_scenario() {
    let dir = scratch("gen");
    let path = gen_scene(&dir, 6, 3);
    let scenario = Scenario::load(&path).unwrap();
    assert_eq!(scenario.objects.len(), 6);
    assert_eq!(scenario.objects.iter().filter(|o| o.is_target).count(), 1);

    let again = gen_scene(&dir, 6, 3);
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&again).unwrap(),
        "same seed, same bytes"
    );

    // Without --out the scenario goes to stdout.
    let out = run(bin().args(["gen", "--n", "6", "--seed", "3"]));
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), std::fs::read_to_string(&path).unwrap());
}

#[test]
fn plan_writes_a_parseable_log_with_config_header() {
    let dir = scratch("plan");
    let scene = gen_scene(&dir, 6, 3);
    let log_path = dir.join("run.log");
    let out = run(bin()
        .args(["plan", "--oracle", "disc2d", "--scenario"])
        .arg(&scene)
        .arg("--out")
        .arg(&log_path));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).starts_with("method,case,n,seed,"), "metrics row on stdout");

    let text = std::fs::read_to_string(&log_path).unwrap();
    assert!(text.contains("# method proposed"));
    assert!(text.contains("# oracle disc2d"));
    assert!(text.contains("# grid_res 0.005"));
    let log = EventLog::parse(&text).expect("config comments do not break parsing");
    assert!(log.outcome().is_some());

    // Same command, same bytes: nothing in the log depends on the clock.
    let log2 = dir.join("run2.log");
    let out = run(bin()
        .args(["plan", "--oracle", "disc2d", "--scenario"])
        .arg(&scene)
        .arg("--out")
        .arg(&log2));
    assert_eq!(code(&out), 0);
    assert_eq!(
        std::fs::read(&log_path).unwrap(),
        std::fs::read(&log2).unwrap()
    );
}

#[test]
fn plan_exit_codes_distinguish_fail_timeout_and_input_errors() {
    let dir = scratch("codes");
    let scene = gen_scene(&dir, 6, 3);

    // The target refuses to move; every alternative drains; exit 2.
    let faults = dir.join("faults.txt");
    std::fs::write(&faults, "3 always\n").unwrap();
    let out = run(bin()
        .args(["plan", "--scenario"])
        .arg(&scene)
        .arg("--oracle")
        .arg(format!("fault:{}", faults.display())));
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    // An impossible budget trips the deadline before any attempt; exit 3.
    let out = run(bin()
        .args(["plan", "--timeout-s", "0.000001", "--scenario"])
        .arg(&scene));
    assert_eq!(code(&out), 3, "{}", stderr(&out));

    // Input problems: missing file, bad oracle spec, unknown flag; exit 4.
    let out = run(bin().args(["plan", "--scenario", "/nonexistent/scene.txt"]));
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("error"));

    let out = run(bin()
        .args(["plan", "--oracle", "psychic", "--scenario"])
        .arg(&scene));
    assert_eq!(code(&out), 4);

    let out = run(bin().args(["plan", "--frobnicate"]));
    assert_eq!(code(&out), 4);

    // Help is not an error.
    let out = run(bin().arg("--help"));
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("plan"));
}

#[test]
fn batch_writes_metrics_aggregate_and_logs() {
    let dir = scratch("batch");
    let out_dir = dir.join("results");
    let out = run(bin()
        .args([
            "batch", "--n", "6", "--reps", "2", "--seed", "10", "--oracle", "always", "--out",
        ])
        .arg(&out_dir));
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let metrics = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 3, "header + reps x methods");
    assert!(lines[0].starts_with("method,case,n,seed,"));

    let aggregate = std::fs::read_to_string(out_dir.join("aggregate.csv")).unwrap();
    assert_eq!(aggregate.lines().count(), 1 + 3);
    assert_eq!(stdout(&out), aggregate, "aggregate echoed to stdout");

    for name in [
        "proposed_10.log",
        "proposed_11.log",
        "distance_10.log",
        "distance_11.log",
        "vfh_10.log",
        "vfh_11.log",
    ] {
        let text = std::fs::read_to_string(out_dir.join("logs").join(name)).unwrap();
        EventLog::parse(&text).unwrap();
    }
}

#[test]
fn graph_dumps_the_initial_belief_adjacency() {
    let dir = scratch("graph");
    let scene = gen_scene(&dir, 6, 3);
    let out = run(bin().args(["graph", "--scenario"]).arg(&scene));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# nodes 7 edges "));
    assert!(text.contains("\nR:"), "robot adjacency line present");
}

#[test]
fn render_draws_scenes_and_episode_frames() {
    let dir = scratch("render");
    let scene = gen_scene(&dir, 6, 3);

    let svg_path = dir.join("scene.svg");
    let out = run(bin()
        .args(["render", "--scenario"])
        .arg(&scene)
        .arg("--out")
        .arg(&svg_path));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg "));
    assert!(svg.contains(r#"class="target""#));

    let log_path = dir.join("run.log");
    let out = run(bin()
        .args(["plan", "--oracle", "always", "--scenario"])
        .arg(&scene)
        .arg("--out")
        .arg(&log_path));
    assert_eq!(code(&out), 0);

    let frames_dir = dir.join("frames");
    let out = run(bin()
        .args(["render", "--scenario"])
        .arg(&scene)
        .arg("--log")
        .arg(&log_path)
        .arg("--out")
        .arg(&frames_dir));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut frames: Vec<String> = std::fs::read_dir(&frames_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    frames.sort();
    assert!(frames.len() >= 2, "at least one plan frame and the outcome");
    assert_eq!(frames[0], "frame_000.svg");
}
