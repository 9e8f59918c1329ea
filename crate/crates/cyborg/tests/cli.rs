use std::path::Path;
use std::process::{Command, Output};

use cyborg::pipeline::CalibrationFile;

fn cyborg(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyborg")).args(args).arg("--out").arg(out).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn flips_without_scores_is_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyborg(dir.path(), &["flips"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("daily_scores.csv"), "{}", stderr(&o));
}

#[test]
fn missing_input_archive_is_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyborg(dir.path(), &["ingest", "--input", "/nonexistent/archive.jsonl"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("/nonexistent/archive.jsonl"));
}

#[test]
fn ingest_without_inputs_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyborg(dir.path(), &["ingest"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("input.paths"), "{}", stderr(&o));
}

#[test]
fn bad_config_values_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[thresholds]\nbot_threshold = \"high\"\n", "thresholds.bot_threshold"),
        ("[thresholds]\nbot_threshold = 1.5\n", "thresholds.bot_threshold"),
        ("[topics]\nk = 0\n", "topics.k"),
        ("[stance]\nlexicon_path = \"x\"\n", "stance"),
        ("[cohort]\nanalysis_date = \"July\"\n", "cohort.analysis_date"),
    ];
    for (i, (text, field)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("c{i}.toml"));
        std::fs::write(&path, text).unwrap();
        let o = cyborg(dir.path(), &["report", "--config", path.to_str().unwrap()]);
        assert_eq!(code(&o), 1, "{text}: {}", stderr(&o));
        assert!(stderr(&o).contains(field), "{text}: {}", stderr(&o));
    }
}

#[test]
fn bad_flag_values_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = cyborg(dir.path(), &["calibrate", "--percentile", "100"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("thresholds.percentile"));
    let o = cyborg(dir.path(), &["flips", "--min-flips", "0"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("thresholds.min_flips"));
}

#[test]
fn usage_errors_and_help() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&cyborg(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&cyborg(dir.path(), &["--help"])), 0);
}

#[test]
fn missing_suspension_list_is_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    for stage in ["synth", "ingest", "score", "flips", "classify"] {
        let o = cyborg(out, &[stage, "--agents", "200", "--input", out.join("synth/archive.jsonl").to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{stage}: {}", stderr(&o));
    }
    let o = cyborg(out, &["cohort", "--suspensions", out.join("nope.csv").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nope.csv"));
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for stage in std::fs::read_dir(dir).unwrap() {
        let stage = stage.unwrap().path();
        if !stage.is_dir() {
            continue;
        }
        for f in std::fs::read_dir(&stage).unwrap() {
            let f = f.unwrap().path();
            files.push((f.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&f).unwrap()));
        }
    }
    files.sort();
    files
}

#[test]
fn staged_run_on_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let archive = out.join("synth/archive.jsonl");
    let input = ["--input", archive.to_str().unwrap()];
    let stages = ["synth", "ingest", "score", "flips", "calibrate", "classify"];
    for stage in stages {
        let o = cyborg(out, &[&[stage, "--percentile", "75"][..], &input].concat());
        assert_eq!(code(&o), 0, "{stage}: {}", stderr(&o));
    }

    let cal: CalibrationFile =
        serde_json::from_str(&std::fs::read_to_string(out.join("calibrate/calibration.json")).unwrap()).unwrap();
    assert_eq!(cal.min_flips, 3);
    assert!((cal.min_mean_delta - 0.10).abs() <= 0.05);
    let first: f64 = cal.flip_table.first().unwrap().cumulative;
    assert!((first - 0.4968).abs() < 0.005, "{first}");

    for (name, bytes) in snapshot(out) {
        if name.ends_with(".csv") {
            let text = String::from_utf8(bytes).unwrap();
            let header = text.lines().next().unwrap_or_default();
            assert!(header.starts_with("agent_id,") || header.starts_with("class,"), "{name}: {header:?}");
        }
    }

    let before = snapshot(out);
    for stage in &stages[1..] {
        assert_eq!(code(&cyborg(out, &[&[*stage, "--jobs", "3"][..], &input].concat())), 0);
    }
    assert!(before == snapshot(out), "rerunning stages changed their output");

    let o = cyborg(out, &["classify", "--use-calibration"]);
    assert_eq!(code(&o), 0);
    let t = std::fs::read_to_string(out.join("classify/thresholds.json")).unwrap();
    assert!(t.contains("\"source\": \"calibration\""), "{t}");

    let o = cyborg(out, &["classify", "--bot-threshold", "0.8"]);
    assert_eq!(code(&o), 3, "flip stats computed at another threshold must not be reused");
}
