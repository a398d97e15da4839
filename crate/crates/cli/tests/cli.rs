use std::path::Path;
use std::process::{Command, Output};

use fronthaul_core::model::{compute_distances, path_delay};
use fronthaul_core::{case_study, io, SplitRatio};
use rust_decimal::Decimal;

fn fronthaul(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fronthaul"))
        .args(args)
        .current_dir(dir)
        .env_remove("FRONTHAUL_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

const CELL: [&str; 4] = ["--delay-us", "30", "--ratio", "16"];

fn solve_cell(dir: &Path) {
    let mut args = vec!["solve", "case_study"];
    args.extend(CELL);
    let out = fronthaul(dir, &args);
    assert_eq!(code(&out), 0, "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("status: optimal"));
}

#[test]
fn solve_then_verify_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    solve_cell(dir.path());
    let mut args = vec!["verify", "case-study", "plan.json"];
    args.extend(CELL);
    let out = fronthaul(dir.path(), &args);
    assert_eq!(code(&out), 0, "{}", text(&out.stdout));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.starts_with("component,value\n"));
}

#[test]
fn verify_lists_a_delay_violation() {
    let dir = tempfile::tempdir().unwrap();
    solve_cell(dir.path());
    let path = dir.path().join("plan.json");
    let mut plan = io::parse_plan(&std::fs::read_to_string(&path).unwrap()).unwrap();

    // Move one RU/ONU to an open splitter whose path exceeds 30 µs.
    let mut inst = case_study::instance();
    inst.params.split_ratio = SplitRatio(16);
    let dm = compute_distances(&inst);
    let index = plan.resolve(&inst).unwrap();
    let limit = Decimal::from(30);
    let (r, j) = (0..inst.ru_onus.len())
        .flat_map(|r| index.homing.iter().map(move |&(j, i)| (r, j, i)))
        .find(|&(r, j, i)| path_delay(dm.feeder(i, j), dm.distribution(j, r), inst.params.delay_per_km) > limit)
        .map(|(r, j, _)| (r, j))
        .expect("some chain is too long");
    plan.ru_assignment
        .insert(inst.ru_onus[r].id.clone(), inst.splitters[j].id.clone());
    std::fs::write(&path, io::plan_json(&plan)).unwrap();

    let mut args = vec!["verify", "case_study", "plan.json"];
    args.extend(CELL);
    let out = fronthaul(dir.path(), &args);
    assert_eq!(code(&out), 1);
    let listing = text(&out.stdout);
    assert!(listing.contains("violated eq24"), "{listing}");
    assert!(listing.contains("µs"), "{listing}");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fronthaul(dir.path(), &["solve", "case_study", "--frobnicate"])), 2);
    assert_eq!(code(&fronthaul(dir.path(), &["launch"])), 2);
    assert_eq!(code(&fronthaul(dir.path(), &["solve", "case_study", "--time-limit", "-1"])), 2);
}

#[test]
fn bad_inputs_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&fronthaul(dir.path(), &["validate", "missing.json"])), 1);
    std::fs::write(dir.path().join("broken.json"), "{\"sites\": 3}").unwrap();
    let out = fronthaul(dir.path(), &["validate", "broken.json"]);
    assert_eq!(code(&out), 1);
    assert!(text(&out.stderr).contains("parse error"));
    let out = fronthaul(dir.path(), &["solve", "case_study", "--delay-us", "0"]);
    assert_eq!(code(&out), 1);
    assert!(!dir.path().join("plan.json").exists());
}

#[test]
fn saved_instance_validates() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("inst.json"), io::save_instance(&case_study::instance())).unwrap();
    let out = fronthaul(dir.path(), &["validate", "inst.json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(text(&out.stdout).trim(), "valid: 6 central offices, 21 splitters, 34 RU/ONUs");
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[solve]\nworkers = 0\n").unwrap();
    let run = |cfg: &str| {
        Command::new(env!("CARGO_BIN_EXE_fronthaul"))
            .args(["solve", "case_study", "--delay-us", "30", "--ratio", "16"])
            .current_dir(dir.path())
            .env("FRONTHAUL_CONFIG", dir.path().join(cfg))
            .output()
            .unwrap()
    };
    // The configured worker count reaches the solver and is refused there.
    assert_eq!(code(&run("bad.toml")), 2);
    std::fs::write(dir.path().join("typo.toml"), "[solve]\nwrokers = 2\n").unwrap();
    assert_eq!(code(&run("typo.toml")), 2);
    std::fs::write(dir.path().join("good.toml"), "[solve]\nseed = 5\ntime_limit = 60.0\n").unwrap();
    assert_eq!(code(&run("good.toml")), 0);
}

#[test]
fn export_render_and_sweep_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    solve_cell(d);
    let out = fronthaul(d, &["export-lp", "case_study", "model.lp", "--ratio", "16"]);
    assert_eq!(code(&out), 0);
    let lp = std::fs::read_to_string(d.join("model.lp")).unwrap();
    assert!(lp.contains("Minimize") && lp.contains("Binaries") && lp.trim_end().ends_with("End"));

    let mut args = vec!["render", "case_study", "plan.json", "map.svg"];
    args.extend(CELL);
    assert_eq!(code(&fronthaul(d, &args)), 0);
    let svg = std::fs::read_to_string(d.join("map.svg")).unwrap();
    assert_eq!(svg.matches("class=\"distribution\"").count(), 34);

    std::fs::write(
        d.join("grid.json"),
        r#"{"delay_thresholds_us": [30, 50], "split_ratios": [16]}"#,
    )
    .unwrap();
    let out = fronthaul(d, &["sweep", "case_study", "--grid-file", "grid.json", "--json", "sweep.json"]);
    assert_eq!(code(&out), 0, "{}", text(&out.stderr));
    let csv = std::fs::read_to_string(d.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(text(&out.stdout).contains("DelayMonotonicity"));
    assert!(d.join("sweep.json").exists());
}
