//! Experiment runner: configuration, per-block records, aggregates and A/B
//! comparison of two runs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::block_grid::BLOCK_SIZES;
pub use crate::encoder::{CodedTool, Tool};
use crate::encoder::{replay, BlockResult, EncodeError, EncoderParams, FrameContext};
use crate::etimd::ModeKind;
use crate::fixtures::{generate, Pattern};
use crate::hog::HogWeighting;
use crate::cost::Metric;
use crate::pixel_io::{load_frame, Frame, FrameFormat, IoError};
use crate::tmp::BlockVector;
use crate::transform::TransformClass;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    YuvPlanar,
    Pgm,
    /// `input` names a generated pattern; `seed + frame` seeds each frame.
    #[default]
    Synthetic,
}

impl FromStr for InputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "synthetic" => Ok(InputFormat::Synthetic),
            other => match other.parse::<FrameFormat>() {
                Ok(FrameFormat::Pgm) => Ok(InputFormat::Pgm),
                Ok(FrameFormat::YuvPlanar) => Ok(InputFormat::YuvPlanar),
                Err(e) => Err(e.to_string()),
            },
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::YuvPlanar => "yuv-planar",
            InputFormat::Pgm => "pgm",
            InputFormat::Synthetic => "synthetic",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// File path, or a pattern name for synthetic input.
    pub input: String,
    pub format: InputFormat,
    /// Frame geometry; for PGM, zero takes it from the header.
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
    pub frame_start: usize,
    pub frame_count: usize,
    pub block_size: usize,
    pub tool: Tool,
    pub bv_list: bool,
    pub ar_bv: bool,
    pub hog_transform: bool,
    pub hog_weighting: HogWeighting,
    /// Quantiser step for closed-loop reconstruction; absent means open loop.
    pub closed_loop: Option<u16>,
    pub metric: Metric,
    pub search_range: usize,
    pub template_thickness: usize,
    pub max_candidates: usize,
    pub intratmp_competition: bool,
    pub seed: u64,
    /// Encode frames on separate threads. Records are unaffected.
    pub parallel: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = EncoderParams::default();
        RunConfig {
            input: "text".into(),
            format: InputFormat::Synthetic,
            width: 256,
            height: 256,
            bit_depth: 8,
            frame_start: 0,
            frame_count: 1,
            block_size: 8,
            tool: p.tool,
            bv_list: p.bv_list,
            ar_bv: p.ar_bv,
            hog_transform: p.hog_transform,
            hog_weighting: p.hog_weighting,
            closed_loop: p.closed_loop,
            metric: p.metric,
            search_range: p.search_range,
            template_thickness: p.template_thickness,
            max_candidates: p.max_candidates,
            intratmp_competition: p.intratmp_competition,
            seed: 0,
            parallel: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("runs are not comparable: {0}")]
    GridMismatch(String),
}

impl HarnessError {
    /// Process exit code: 2 for bad input or configuration, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::GridMismatch(_) => 2,
            HarnessError::Io(IoError::Format(_) | IoError::Truncated { .. } | IoError::Json(_)) => 2,
            HarnessError::Io(_) => 3,
            HarnessError::Encode(_) => 1,
        }
    }
}

impl RunConfig {
    pub fn encoder_params(&self) -> EncoderParams {
        EncoderParams {
            tool: self.tool,
            bv_list: self.bv_list,
            ar_bv: self.ar_bv,
            hog_transform: self.hog_transform,
            hog_weighting: self.hog_weighting,
            closed_loop: self.closed_loop,
            metric: self.metric,
            search_range: self.search_range,
            template_thickness: self.template_thickness,
            max_candidates: self.max_candidates,
            intratmp_competition: self.intratmp_competition,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !BLOCK_SIZES.contains(&self.block_size) {
            return bad(format!("block_size {} not in {:?}", self.block_size, BLOCK_SIZES));
        }
        if !(8..=16).contains(&self.bit_depth) {
            return bad(format!("bit_depth {} outside 8..=16", self.bit_depth));
        }
        if self.frame_count == 0 {
            return bad("frame_count must be at least 1".into());
        }
        if !(1..=16).contains(&self.template_thickness) {
            return bad(format!("template_thickness {} outside 1..=16", self.template_thickness));
        }
        if self.max_candidates == 0 {
            return bad("max_candidates must be at least 1".into());
        }
        if self.closed_loop == Some(0) {
            return bad("closed_loop step must be positive".into());
        }
        let needs_dims = self.format != InputFormat::Pgm;
        if needs_dims && (self.width == 0 || self.height == 0) {
            return bad("width and height must be positive".into());
        }
        match self.format {
            InputFormat::Synthetic => {
                self.input.parse::<Pattern>().map_err(HarnessError::Config)?;
            }
            InputFormat::Pgm if self.frame_start != 0 || self.frame_count != 1 => {
                return bad("pgm input holds exactly one frame".into());
            }
            _ if self.input.is_empty() => return bad("input path is empty".into()),
            _ => {}
        }
        Ok(())
    }

    pub fn load_frames(&self) -> Result<Vec<(usize, Frame)>, HarnessError> {
        (self.frame_start..self.frame_start + self.frame_count)
            .map(|i| {
                let frame = match self.format {
                    InputFormat::Synthetic => {
                        let pattern: Pattern = self.input.parse().map_err(HarnessError::Config)?;
                        generate(pattern, self.width, self.height, self.bit_depth, self.seed.wrapping_add(i as u64))
                    }
                    InputFormat::Pgm => {
                        load_frame(Path::new(&self.input), FrameFormat::Pgm, self.width, self.height, self.bit_depth, i)?
                    }
                    InputFormat::YuvPlanar => load_frame(
                        Path::new(&self.input),
                        FrameFormat::YuvPlanar,
                        self.width,
                        self.height,
                        self.bit_depth,
                        i,
                    )?,
                };
                Ok((i, frame))
            })
            .collect()
    }
}

/// PSNR in dB; perfect predictions serialize as the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Psnr(pub f64);

impl Psnr {
    /// PSNR of a summed squared error over `count` samples, scaled to the
    /// 8-bit range.
    pub fn from_sse(sse: u64, count: usize, bit_depth: u8) -> Psnr {
        if sse == 0 || count == 0 {
            return Psnr(f64::INFINITY);
        }
        let scale = 4f64.powi(bit_depth as i32 - 8);
        let mse = sse as f64 / count as f64 / scale;
        Psnr(10.0 * (255.0 * 255.0 / mse).log10())
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl Serialize for Psnr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Psnr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Psnr(v)),
            Raw::Str(s) if s == "inf" => Ok(Psnr(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("invalid psnr '{s}'"))),
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{:.4}", self.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub scan_index: usize,
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
    pub tool: CodedTool,
    /// Template-derived fusion set (empty when no derivation ran).
    pub modes: Vec<String>,
    pub weights: Vec<f64>,
    pub costs: Vec<u64>,
    pub tmp_bv: Option<BlockVector>,
    pub tmp_cost: Option<u64>,
    pub bv_list_len: usize,
    pub bv_primary: usize,
    pub bv_relocated: usize,
    /// A block vector entered the derived fusion set.
    pub bv_replaced: bool,
    pub tool_sad: u64,
    pub sad: u64,
    pub satd: u64,
    pub sse: u64,
    pub transform_modes: Vec<String>,
    pub transform_class: Option<TransformClass>,
    pub hog_substituted: bool,
    pub compaction: Option<f64>,
    pub compaction_dc0: Option<f64>,
}

pub const CSV_HEADER: [&str; 26] = [
    "frame",
    "scan_index",
    "x0",
    "y0",
    "w",
    "h",
    "tool",
    "modes",
    "weights",
    "costs",
    "tmp_bv",
    "tmp_cost",
    "bv_list_len",
    "bv_primary",
    "bv_relocated",
    "bv_replaced",
    "tool_sad",
    "sad",
    "satd",
    "sse",
    "transform_modes",
    "transform_class",
    "hog_substituted",
    "compaction",
    "compaction_dc0",
    "primary_cost",
];

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|v| v.to_string()).unwrap_or_default()
}

impl BlockRecord {
    pub fn from_result(r: &BlockResult) -> BlockRecord {
        let (modes, weights, costs) = match &r.derived {
            Some(f) => (
                f.modes().iter().map(|m| m.kind.to_string()).collect(),
                f.weights().to_vec(),
                f.modes().iter().map(|m| m.cost.0).collect(),
            ),
            None => Default::default(),
        };
        let t = r.transform.as_ref();
        BlockRecord {
            scan_index: r.block.scan_index,
            x0: r.block.x0,
            y0: r.block.y0,
            w: r.block.w,
            h: r.block.h,
            tool: r.coded,
            modes,
            weights,
            costs,
            tmp_bv: r.tmp.map(|m| m.bv),
            tmp_cost: r.tmp.map(|m| m.cost.0),
            bv_list_len: r.list.len,
            bv_primary: r.list.primary,
            bv_relocated: r.list.relocated,
            bv_replaced: r.derived.as_ref().is_some_and(|f| f.has_bv()),
            tool_sad: r.tool_sad.0,
            sad: r.sad.0,
            satd: r.satd.0,
            sse: r.sse,
            transform_modes: t.map(|t| t.modes.iter().map(|m| m.to_string()).collect()).unwrap_or_default(),
            transform_class: t.map(|t| t.class),
            hog_substituted: t.is_some_and(|t| t.substituted),
            compaction: t.map(|t| t.compaction),
            compaction_dc0: t.map(|t| t.compaction_dc0),
        }
    }

    /// Template cost of the primary derived mode.
    pub fn primary_cost(&self) -> Option<u64> {
        self.costs.first().copied()
    }

    /// Primary derived mode with block vectors collapsed to `"BV"`.
    pub fn primary_label(&self) -> Option<&str> {
        self.modes.first().map(|m| if m.starts_with("BV") { "BV" } else { m.as_str() })
    }

    pub fn csv_row(&self, frame: usize) -> Vec<String> {
        vec![
            frame.to_string(),
            self.scan_index.to_string(),
            self.x0.to_string(),
            self.y0.to_string(),
            self.w.to_string(),
            self.h.to_string(),
            self.tool.name().to_string(),
            join(&self.modes),
            join(&self.weights),
            join(&self.costs),
            opt(&self.tmp_bv),
            opt(&self.tmp_cost),
            self.bv_list_len.to_string(),
            self.bv_primary.to_string(),
            self.bv_relocated.to_string(),
            self.bv_replaced.to_string(),
            self.tool_sad.to_string(),
            self.sad.to_string(),
            self.satd.to_string(),
            self.sse.to_string(),
            join(&self.transform_modes),
            opt(&self.transform_class),
            self.hog_substituted.to_string(),
            opt(&self.compaction),
            opt(&self.compaction_dc0),
            opt(&self.primary_cost()),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub frame_index: usize,
    pub psnr: Psnr,
    /// Blocks where the replay pass disagreed with the encoder.
    pub replay_mismatches: Vec<usize>,
    pub blocks: Vec<BlockRecord>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub blocks: usize,
    pub mean_template_cost: f64,
    pub mean_tool_sad: f64,
    pub mean_sad: f64,
    pub mean_satd: f64,
    pub psnr: Psnr,
    pub mode_usage: BTreeMap<String, u64>,
    pub tool_usage: BTreeMap<String, u64>,
    /// Share of derived fusion sets that contain a block vector.
    pub bv_replacement_rate: f64,
    pub mean_compaction: f64,
}

impl Aggregates {
    pub fn compute(frames: &[FrameReport], bit_depth: u8) -> Aggregates {
        let blocks = || frames.iter().flat_map(|f| &f.blocks);
        let mut mode_usage = BTreeMap::new();
        let mut tool_usage = BTreeMap::new();
        for b in blocks() {
            if let Some(label) = b.primary_label() {
                *mode_usage.entry(label.to_string()).or_insert(0) += 1;
            }
            *tool_usage.entry(b.tool.name().to_string()).or_insert(0) += 1;
        }
        let derived = blocks().filter(|b| !b.modes.is_empty()).count();
        let replaced = blocks().filter(|b| b.bv_replaced).count();
        let sse: u64 = blocks().map(|b| b.sse).sum();
        let area: usize = blocks().map(|b| b.w * b.h).sum();
        Aggregates {
            blocks: blocks().count(),
            mean_template_cost: mean(blocks().filter_map(|b| b.primary_cost()).map(|c| c as f64)),
            mean_tool_sad: mean(blocks().map(|b| b.tool_sad as f64)),
            mean_sad: mean(blocks().map(|b| b.sad as f64)),
            mean_satd: mean(blocks().map(|b| b.satd as f64)),
            psnr: Psnr::from_sse(sse, area, bit_depth),
            mode_usage,
            tool_usage,
            bv_replacement_rate: if derived == 0 { 0.0 } else { replaced as f64 / derived as f64 },
            mean_compaction: mean(blocks().filter_map(|b| b.compaction)),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub encode_ms: f64,
    /// Replay (decoder-side re-derivation) time.
    pub decode_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub config: RunConfig,
    pub aggregates: Aggregates,
    pub timing: Timing,
    pub frames: Vec<FrameReport>,
}

impl Report {
    pub fn blocks(&self) -> impl Iterator<Item = &BlockRecord> {
        self.frames.iter().flat_map(|f| &f.blocks)
    }

    /// Copy with wall-clock fields zeroed, for determinism checks.
    pub fn without_timing(&self) -> Report {
        Report { timing: Timing::default(), ..self.clone() }
    }
}

struct FrameRun {
    report: FrameReport,
    encode_ms: f64,
    decode_ms: f64,
}

fn run_frame(index: usize, frame: Frame, config: &RunConfig) -> Result<FrameRun, HarnessError> {
    let params = config.encoder_params();
    let bit_depth = frame.bit_depth;
    let area = frame.width * frame.height;
    let start = Instant::now();
    let mut ctx = FrameContext::new(frame, config.block_size, params)?;
    let results = ctx.encode_all()?;
    let encode_ms = start.elapsed().as_secs_f64() * 1e3;
    let recon = ctx.reconstruction();
    let start = Instant::now();
    let outcome = replay(&results, &recon, config.block_size, &params)?;
    let decode_ms = start.elapsed().as_secs_f64() * 1e3;
    let sse: u64 = results.iter().map(|r| r.sse).sum();
    Ok(FrameRun {
        report: FrameReport {
            frame_index: index,
            psnr: Psnr::from_sse(sse, area, bit_depth),
            replay_mismatches: outcome.mismatches,
            blocks: results.iter().map(BlockRecord::from_result).collect(),
        },
        encode_ms,
        decode_ms,
    })
}

/// Encodes every configured frame and replays it. Apart from `timing`, the
/// report depends only on the configuration.
pub fn run_experiment(config: &RunConfig) -> Result<Report, HarnessError> {
    config.validate()?;
    let frames = config.load_frames()?;
    let bit_depth = frames.first().map_or(config.bit_depth, |(_, f)| f.bit_depth);
    let runs: Vec<FrameRun> = if config.parallel && frames.len() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> =
                frames.into_iter().map(|(i, f)| s.spawn(move || run_frame(i, f, config))).collect();
            handles.into_iter().map(|h| h.join().expect("frame worker panicked")).collect::<Result<_, _>>()
        })?
    } else {
        frames.into_iter().map(|(i, f)| run_frame(i, f, config)).collect::<Result<_, _>>()?
    };
    let timing = Timing {
        encode_ms: runs.iter().map(|r| r.encode_ms).sum(),
        decode_ms: runs.iter().map(|r| r.decode_ms).sum(),
    };
    let frames: Vec<FrameReport> = runs.into_iter().map(|r| r.report).collect();
    Ok(Report {
        schema: SCHEMA_VERSION,
        config: config.clone(),
        aggregates: Aggregates::compute(&frames, bit_depth),
        timing,
        frames,
    })
}

/// Win/lose/tie counts of run b against run a on one per-block measure
/// (lower is better).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    pub win_rate: f64,
    pub lose_rate: f64,
    pub tie_rate: f64,
}

impl Outcome {
    fn tally(pairs: impl Iterator<Item = (u64, u64)>) -> Outcome {
        let mut o = Outcome::default();
        for (a, b) in pairs {
            match b.cmp(&a) {
                std::cmp::Ordering::Less => o.wins += 1,
                std::cmp::Ordering::Greater => o.losses += 1,
                std::cmp::Ordering::Equal => o.ties += 1,
            }
        }
        let n = (o.wins + o.losses + o.ties) as f64;
        if n > 0.0 {
            o.win_rate = 100.0 * o.wins as f64 / n;
            o.lose_rate = 100.0 * o.losses as f64 / n;
            o.tie_rate = 100.0 * o.ties as f64 / n;
        }
        o
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanChange {
    pub a: f64,
    pub b: f64,
    /// `100 * (b - a) / a`; absent when a is zero and b is not.
    pub change_pct: Option<f64>,
}

impl MeanChange {
    fn new(a: f64, b: f64) -> MeanChange {
        let change_pct = if a != 0.0 {
            Some(100.0 * (b - a) / a)
        } else if b == 0.0 {
            Some(0.0)
        } else {
            None
        };
        MeanChange { a, b, change_pct }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDelta {
    pub frame_index: usize,
    pub scan_index: usize,
    pub tool_sad: i64,
    pub sad: i64,
    pub satd: i64,
    pub primary_cost: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta {
    pub schema: u32,
    pub blocks: usize,
    pub tool_sad: MeanChange,
    pub sad: MeanChange,
    pub satd: MeanChange,
    /// Outcome on the configured tools' own predictions.
    pub tool: Outcome,
    /// Outcome on the final predictions (after IntraTMP competition).
    pub final_prediction: Outcome,
    /// `100 * T_b / T_a` for encoding; absent when T_a is zero and T_b is not.
    pub encode_time_ratio_pct: Option<f64>,
    /// The same ratio for the replay pass.
    pub decode_time_ratio_pct: Option<f64>,
    pub per_block: Vec<BlockDelta>,
}

fn time_ratio(a: f64, b: f64) -> Option<f64> {
    if a > 0.0 {
        Some(100.0 * b / a)
    } else if b == a {
        Some(100.0)
    } else {
        None
    }
}

/// Per-block and aggregate differences of run `b` relative to run `a`.
pub fn compare_runs(a: &Report, b: &Report) -> Result<Delta, HarnessError> {
    let (ca, cb) = (&a.config, &b.config);
    let source = |c: &RunConfig| (c.input.clone(), c.format, c.width, c.height, c.bit_depth, c.frame_start, c.block_size);
    // synthetic frames also depend on the seed
    if source(ca) != source(cb) || (ca.format == InputFormat::Synthetic && ca.seed != cb.seed) {
        return Err(HarnessError::GridMismatch("runs read different inputs".into()));
    }
    if a.frames.len() != b.frames.len() {
        return Err(HarnessError::GridMismatch(format!("{} vs {} frames", a.frames.len(), b.frames.len())));
    }
    let mut pairs = Vec::new();
    for (fa, fb) in a.frames.iter().zip(&b.frames) {
        let geom = |r: &BlockRecord| (r.x0, r.y0, r.w, r.h);
        if fa.frame_index != fb.frame_index
            || fa.blocks.len() != fb.blocks.len()
            || fa.blocks.iter().zip(&fb.blocks).any(|(x, y)| geom(x) != geom(y))
        {
            return Err(HarnessError::GridMismatch(format!("block grids differ in frame {}", fa.frame_index)));
        }
        pairs.extend(fa.blocks.iter().zip(&fb.blocks).map(|(x, y)| (fa.frame_index, x, y)));
    }
    let per_block = pairs
        .iter()
        .map(|&(frame_index, x, y)| BlockDelta {
            frame_index,
            scan_index: x.scan_index,
            tool_sad: y.tool_sad as i64 - x.tool_sad as i64,
            sad: y.sad as i64 - x.sad as i64,
            satd: y.satd as i64 - x.satd as i64,
            primary_cost: x.primary_cost().zip(y.primary_cost()).map(|(p, q)| q as i64 - p as i64),
        })
        .collect();
    let means = |f: fn(&BlockRecord) -> u64| {
        MeanChange::new(mean(pairs.iter().map(|p| f(p.1) as f64)), mean(pairs.iter().map(|p| f(p.2) as f64)))
    };
    Ok(Delta {
        schema: SCHEMA_VERSION,
        blocks: pairs.len(),
        tool_sad: means(|r| r.tool_sad),
        sad: means(|r| r.sad),
        satd: means(|r| r.satd),
        tool: Outcome::tally(pairs.iter().map(|p| (p.1.tool_sad, p.2.tool_sad))),
        final_prediction: Outcome::tally(pairs.iter().map(|p| (p.1.sad, p.2.sad))),
        encode_time_ratio_pct: time_ratio(a.timing.encode_ms, b.timing.encode_ms),
        decode_time_ratio_pct: time_ratio(a.timing.decode_ms, b.timing.decode_ms),
        per_block,
    })
}

/// Label of a fusion mode kind with block vectors collapsed.
pub fn kind_label(kind: ModeKind) -> String {
    match kind {
        ModeKind::Bv { .. } => "BV".into(),
        k => k.to_string(),
    }
}
