//! WebAssembly bindings for the static demo page in `www/`.
//!
//! The plain functions are usable natively; the `#[wasm_bindgen]` wrappers
//! only convert arguments and results.

use etimd_core::encoder::{EncoderParams, FrameContext};
use etimd_core::etimd::{select_modes_etimd, select_modes_timd, FusionSet, ModeCandidate, ModeKind};
use etimd_core::fixtures::{generate, Pattern};
use etimd_core::harness::{BlockRecord, Tool};
use etimd_core::hog::{build_hog, dominant_mode, HogWeighting};
use etimd_core::intra::IntraMode;
use etimd_core::tmp::BlockVector;
use etimd_core::transform::{apply_transform, energy_compaction, transform_class, TransformClass};
use etimd_core::PixelBlock;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const BLOCK: usize = 8;

/// One encoded fixture frame, kept for pixel and per-block queries.
#[wasm_bindgen]
pub struct Simulation {
    width: usize,
    height: usize,
    original: Vec<u16>,
    prediction: Vec<u16>,
    max_value: u16,
    records: Vec<BlockRecord>,
}

pub fn simulate(pattern: &str, tool: &str, size: usize, seed: u64, bv_list: bool) -> Result<Simulation, String> {
    let pattern: Pattern = pattern.parse()?;
    let tool: Tool = tool.parse()?;
    if !(16..=256).contains(&size) || !size.is_multiple_of(BLOCK) {
        return Err(format!("size must be a multiple of {BLOCK} in 16..=256"));
    }
    let frame = generate(pattern, size, size, 8, seed);
    // a short search keeps the page responsive
    let params = EncoderParams { tool, bv_list, ar_bv: bv_list, search_range: 24, ..EncoderParams::default() };
    let mut ctx = FrameContext::new(frame.clone(), BLOCK, params).map_err(|e| e.to_string())?;
    let results = ctx.encode_all().map_err(|e| e.to_string())?;
    let mut prediction = vec![0u16; size * size];
    for r in &results {
        let b = r.block;
        for y in 0..b.h {
            let row = (b.y0 + y) * size + b.x0;
            prediction[row..row + b.w].copy_from_slice(r.prediction.row(y));
        }
    }
    Ok(Simulation {
        width: size,
        height: size,
        max_value: frame.max_value(),
        original: frame.samples,
        prediction,
        records: results.iter().map(BlockRecord::from_result).collect(),
    })
}

fn grey_rgba(samples: &[u16], max: u16) -> Vec<u8> {
    samples
        .iter()
        .flat_map(|&s| {
            let g = (s as u32 * 255 / max.max(1) as u32) as u8;
            [g, g, g, 255]
        })
        .collect()
}

impl Simulation {
    pub fn records(&self) -> &[BlockRecord] {
        &self.records
    }

    pub fn summary(&self) -> Value {
        let n = self.records.len().max(1) as f64;
        let mean = |f: fn(&BlockRecord) -> u64| self.records.iter().map(f).sum::<u64>() as f64 / n;
        let mut tools = std::collections::BTreeMap::new();
        for r in &self.records {
            *tools.entry(r.tool.name()).or_insert(0usize) += 1;
        }
        json!({
            "blocks": self.records.len(),
            "mean_tool_sad": mean(|r| r.tool_sad),
            "mean_sad": mean(|r| r.sad),
            "bv_replaced": self.records.iter().filter(|r| r.bv_replaced).count(),
            "tools": tools,
        })
    }

    pub fn block_at(&self, x: usize, y: usize) -> Option<&BlockRecord> {
        self.records.iter().find(|r| (r.x0..r.x0 + r.w).contains(&x) && (r.y0..r.y0 + r.h).contains(&y))
    }
}

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(pattern: &str, tool: &str, size: usize, seed: u32, bv_list: bool) -> Result<Simulation, JsError> {
        simulate(pattern, tool, size, seed as u64, bv_list).map_err(|e| JsError::new(&e))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn original_rgba(&self) -> Vec<u8> {
        grey_rgba(&self.original, self.max_value)
    }

    pub fn prediction_rgba(&self) -> Vec<u8> {
        grey_rgba(&self.prediction, self.max_value)
    }

    /// Absolute prediction error: black is exact, red saturates at a quarter
    /// of the sample range.
    pub fn error_rgba(&self) -> Vec<u8> {
        let full = (self.max_value as u32 / 4).max(1);
        self.original
            .iter()
            .zip(&self.prediction)
            .flat_map(|(&a, &b)| {
                let e = (a.abs_diff(b) as u32).min(full) * 255 / full;
                [e as u8, (e / 4) as u8, 0, 255]
            })
            .collect()
    }

    pub fn summary_json(&self) -> String {
        self.summary().to_string()
    }

    /// Record of the block covering pixel (x, y), or an empty string.
    pub fn block_json(&self, x: usize, y: usize) -> String {
        self.block_at(x, y).map(|r| serde_json::to_string(r).unwrap_or_default()).unwrap_or_default()
    }
}

/// Binary stripes across direction `angle_deg` with the given period,
/// offset into a non-negative range.
pub fn stripe_block(size: usize, angle_deg: f64, period: f64, contrast: u16) -> PixelBlock {
    let (s, c) = angle_deg.to_radians().sin_cos();
    PixelBlock::from_fn(size, size, |x, y| {
        let t = (x as f64 * c + y as f64 * s) / period.max(1.0);
        if t.rem_euclid(1.0) < 0.5 { 512 - contrast / 2 } else { 512 + contrast / 2 }
    })
}

pub fn explore_hog(size: usize, angle_deg: f64, period: f64, magnitude: bool) -> Result<Value, String> {
    if ![4, 8, 16, 32].contains(&size) {
        return Err("size must be 4, 8, 16 or 32".into());
    }
    let block = stripe_block(size, angle_deg, period, 200);
    let weighting = if magnitude { HogWeighting::Magnitude } else { HogWeighting::Frequency };
    let hog = build_hog(block.view(), weighting);
    let dominant = dominant_mode(&hog);
    let class = dominant.map_or(TransformClass::Dc0, transform_class);
    let residual: Vec<i32> = block.data().iter().map(|&v| v as i32 - 512).collect();
    let k = size * size / 4;
    let compaction = |c| apply_transform(&residual, size, size, c).map(|co| energy_compaction(&co, size, size, k));
    Ok(json!({
        "block": block.data(),
        "bins": hog.bins().to_vec(),
        "dominant": dominant.map(|m| m.index()),
        "class": class.to_string(),
        "compaction": compaction(class).map_err(|e| e.to_string())?,
        "compaction_dc0": compaction(TransformClass::Dc0).map_err(|e| e.to_string())?,
    }))
}

#[wasm_bindgen]
pub fn hog_json(size: usize, angle_deg: f64, period: f64, magnitude: bool) -> Result<String, JsError> {
    explore_hog(size, angle_deg, period, magnitude).map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

fn parse_kind(label: &str, next_slot: &mut u16) -> Result<ModeKind, String> {
    let l = label.trim().to_ascii_uppercase();
    match l.as_str() {
        "PLANAR" => Ok(ModeKind::Planar),
        "DC" => Ok(ModeKind::Dc),
        "BV" => {
            let slot = *next_slot;
            *next_slot += 1;
            Ok(ModeKind::Bv { bv: BlockVector::new(-8 * (slot as i32 + 1), 0), slot })
        }
        _ => l
            .strip_prefix('A')
            .and_then(|n| n.parse::<u8>().ok())
            .and_then(IntraMode::angular)
            .map(|m| ModeKind::Angular(m.index()))
            .ok_or_else(|| format!("unknown mode '{label}' (use A2..A66, PLANAR, DC or BV)")),
    }
}

fn describe(set: Option<FusionSet>) -> Value {
    match set {
        None => Value::Null,
        Some(s) => json!({
            "modes": s.modes().iter().map(|m| m.kind.to_string()).collect::<Vec<_>>(),
            "costs": s.modes().iter().map(|m| m.cost.0).collect::<Vec<_>>(),
            "weights": s.weights(),
        }),
    }
}

/// Parses `label:cost` pairs separated by commas or newlines and runs both
/// selection rules on them.
pub fn explore_fusion(table: &str) -> Result<Value, String> {
    let mut slot = 0;
    let mut candidates = Vec::new();
    for item in table.split([',', '\n']).map(str::trim).filter(|s| !s.is_empty()) {
        let (label, cost) = item.split_once(':').ok_or_else(|| format!("expected label:cost, got '{item}'"))?;
        let cost: u64 = cost.trim().parse().map_err(|_| format!("bad cost in '{item}'"))?;
        let kind = parse_kind(label, &mut slot)?;
        if candidates.iter().any(|c: &ModeCandidate| c.kind == kind) {
            return Err(format!("{label} listed twice"));
        }
        candidates.push(ModeCandidate::new(kind, cost));
    }
    let timd: Vec<ModeCandidate> = candidates.iter().copied().filter(|c| c.kind.bv().is_none()).collect();
    Ok(json!({
        "etimd": describe(select_modes_etimd(&candidates)),
        "timd": describe(select_modes_timd(&timd)),
    }))
}

#[wasm_bindgen]
pub fn fusion_json(table: &str) -> Result<String, JsError> {
    explore_fusion(table).map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}
