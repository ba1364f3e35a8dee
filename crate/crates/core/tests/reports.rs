use etimd_core::harness::{Aggregates, InputFormat, Report, RunConfig, Timing, CSV_HEADER, SCHEMA_VERSION};
use etimd_core::pixel_io::{load_frame, read_report, write_pgm, write_report, FrameFormat, ReportFormat};
use etimd_core::{run_experiment, Tool};

fn empty_report() -> Report {
    Report {
        schema: SCHEMA_VERSION,
        config: RunConfig::default(),
        aggregates: Aggregates::compute(&[], 8),
        timing: Timing::default(),
        frames: Vec::new(),
    }
}

#[test]
fn empty_run_csv_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_report(&empty_report(), &path, ReportFormat::Csv).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert_eq!(text.trim_end(), CSV_HEADER.join(","));
}

#[test]
fn three_blocks_give_three_rows_and_stable_bytes() {
    let cfg = RunConfig { input: "ui".into(), width: 24, height: 8, tool: Tool::Timd, ..RunConfig::default() };
    let report = run_experiment(&cfg).unwrap().without_timing();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_report(&report, &a, ReportFormat::Csv).unwrap();
    write_report(&run_experiment(&cfg).unwrap().without_timing(), &b, ReportFormat::Csv).unwrap();
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    assert_eq!(rdr.records().count(), 3);
}

#[test]
fn json_report_round_trips() {
    let cfg = RunConfig { input: "icons".into(), width: 32, height: 32, ..RunConfig::default() };
    let report = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    write_report(&report, &path, ReportFormat::Json).unwrap();
    assert_eq!(read_report(&path).unwrap(), report);
}

#[test]
fn pgm_file_runs_like_synthetic_input() {
    let dir = tempfile::tempdir().unwrap();
    let synthetic = RunConfig { input: "spreadsheet".into(), width: 48, height: 32, ..RunConfig::default() };
    let frame = synthetic.load_frames().unwrap().remove(0).1;
    let path = dir.path().join("f.pgm");
    write_pgm(&frame, &path).unwrap();
    assert_eq!(load_frame(&path, FrameFormat::Pgm, 0, 0, 8, 0).unwrap(), frame);
    let from_file = RunConfig {
        input: path.to_string_lossy().into_owned(),
        format: InputFormat::Pgm,
        width: 0,
        height: 0,
        ..synthetic.clone()
    };
    let a = run_experiment(&synthetic).unwrap();
    let b = run_experiment(&from_file).unwrap();
    assert_eq!(a.frames, b.frames);
}

#[test]
fn ten_bit_yuv_input_reads_luma_only() {
    let (w, h) = (16usize, 8usize);
    let mut bytes = Vec::new();
    for frame in 0..2u16 {
        for i in 0..(w * h) as u16 {
            // high bits set on purpose; they must be masked away
            bytes.extend_from_slice(&(0xFC00 | ((i * 7 + frame) % 1024)).to_le_bytes());
        }
        bytes.extend(std::iter::repeat_n(0xAAu8, 2 * 2 * (w / 2) * (h / 2)));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clip.yuv");
    std::fs::write(&path, &bytes).unwrap();
    let f = load_frame(&path, FrameFormat::YuvPlanar, w, h, 10, 1).unwrap();
    assert_eq!(f.get(3, 0), 3 * 7 + 1);
    assert!(f.samples.iter().all(|&s| s < 1024));
    let cfg = RunConfig {
        input: path.to_string_lossy().into_owned(),
        format: InputFormat::YuvPlanar,
        width: w,
        height: h,
        bit_depth: 10,
        frame_count: 2,
        ..RunConfig::default()
    };
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.frames.len(), 2);
    assert_eq!(r.frames[1].frame_index, 1);
}
