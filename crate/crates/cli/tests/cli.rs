use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etimd-lab")).args(args).current_dir(dir).output().unwrap()
}

fn ok(out: &Output) -> &Output {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

const SMALL: [&str; 4] = ["--width", "32", "--height", "32"];

#[test]
fn run_writes_a_schema_one_json_report_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run", "--input", "ui", "--tool", "timd"];
    args.extend(SMALL);
    let out = lab(&args, dir.path());
    let v: serde_json::Value = serde_json::from_slice(&ok(&out).stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["config"]["tool"], "timd");
    assert_eq!(v["frames"][0]["blocks"].as_array().unwrap().len(), 16);
}

#[test]
fn csv_format_follows_the_output_extension() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run", "--input", "icons", "-o", "r.csv"];
    args.extend(SMALL);
    ok(&lab(&args, dir.path()));
    let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("exp.toml"),
        "input = \"spreadsheet\"\nwidth = 24\nheight = 16\ntool = \"intratmp\"\nsearch_range = 8\nclosed_loop = 6\n",
    )
    .unwrap();
    let out = lab(&["run", "--config", "exp.toml", "--tool", "etimd", "--closed-loop", "0", "--print-config"], dir.path());
    let text = String::from_utf8(ok(&out).stdout.clone()).unwrap();
    assert!(text.contains("tool = \"etimd\""), "{text}");
    assert!(text.contains("search_range = 8"), "{text}");
    assert!(!text.contains("closed_loop"), "{text}");

    let out = lab(&["run", "--config", "exp.toml"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&ok(&out).stdout).unwrap();
    assert_eq!(v["config"]["closed_loop"], 6);
    assert_eq!(v["aggregates"]["blocks"], 6);
}

#[test]
fn compare_reports_b_relative_to_a() {
    let dir = tempfile::tempdir().unwrap();
    for (tool, name) in [("timd", "a.json"), ("etimd", "b.json")] {
        let mut args = vec!["run", "--input", "glyph-tile", "--tool", tool, "-o", name];
        args.extend(SMALL);
        ok(&lab(&args, dir.path()));
    }
    let out = lab(&["compare", "a.json", "b.json", "--summary"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&ok(&out).stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["blocks"], 16);
    assert!(v["per_block"].as_array().unwrap().is_empty());
    assert!(v["tool_sad"]["b"].as_f64() <= v["tool_sad"]["a"].as_f64());

    let out = lab(&["compare", "a.json", "a.json"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&ok(&out).stdout).unwrap();
    assert_eq!(v["tool"]["ties"], 16);
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab(&["run", "--block-size", "7"], dir.path()).status.code(), Some(2));
    assert_eq!(lab(&["run", "--tool", "nope"], dir.path()).status.code(), Some(2));
    assert_eq!(lab(&["run", "--input", "no-such-pattern"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.toml"), "colour = 3\n").unwrap();
    assert_eq!(lab(&["run", "--config", "bad.toml"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.json"), "{}").unwrap();
    assert_eq!(lab(&["compare", "bad.json", "bad.json"], dir.path()).status.code(), Some(2));
    // a short YUV file
    std::fs::write(dir.path().join("clip.yuv"), [0u8; 10]).unwrap();
    let out = lab(&["run", "--input", "clip.yuv", "--format", "yuv-planar", "--width", "16", "--height", "16"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mismatched_runs_do_not_compare() {
    let dir = tempfile::tempdir().unwrap();
    ok(&lab(&["run", "--input", "ui", "--width", "16", "--height", "16", "-o", "a.json"], dir.path()));
    ok(&lab(&["run", "--input", "ui", "--width", "24", "--height", "16", "-o", "b.json"], dir.path()));
    assert_eq!(lab(&["compare", "a.json", "b.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn missing_files_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab(&["run", "--config", "absent.toml"], dir.path()).status.code(), Some(3));
    assert_eq!(lab(&["run", "--input", "absent.pgm", "--format", "pgm"], dir.path()).status.code(), Some(3));
    assert_eq!(lab(&["compare", "x.json", "y.json"], dir.path()).status.code(), Some(3));
    let out = lab(&["run", "--input", "ui", "--width", "16", "--height", "16", "-o", "no/such/dir/r.json"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}
