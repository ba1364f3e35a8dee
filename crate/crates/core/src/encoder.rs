//! Per-block encoding loop and the decoder-side replay pass.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block_grid::{BlockRef, GridError, ReconBuffer};
use crate::bvlist::{build_bv_list, BvList, BvListParams, BvStore, CodingRecord, Provenance, RecordTool, StoredBv};
use crate::cost::{sad, satd, Cost, Metric};
use crate::etimd::{
    evaluate_candidates, fuse, fusion_predictions, select_modes_etimd, select_modes_timd, FusionSet, ModeCandidate,
    ModeKind,
};
use crate::hog::{transform_modes, HogWeighting};
use crate::intra::{build_reference_samples, predict_dc, IntraMode};
use crate::pixel_io::Frame;
use crate::plane::PixelBlock;
use crate::tmp::{bv_predict, extract_template, tmp_search, GammaTemplate, TmpMatch};
use crate::transform::{apply_transform, energy_compaction, transform_class, TransformClass};

/// Derivation tool configured for a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tool {
    Timd,
    #[default]
    Etimd,
    Intratmp,
    DcOnly,
}

impl Tool {
    pub const ALL: [Tool; 4] = [Tool::Timd, Tool::Etimd, Tool::Intratmp, Tool::DcOnly];

    pub fn name(self) -> &'static str {
        match self {
            Tool::Timd => "timd",
            Tool::Etimd => "etimd",
            Tool::Intratmp => "intratmp",
            Tool::DcOnly => "dc-only",
        }
    }
}

impl fmt::Display for Tool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tool {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tool::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| format!("unknown tool '{s}'"))
    }
}

/// What actually produced a block's prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodedTool {
    Timd,
    Etimd,
    Intratmp,
    Dc,
    /// Template-based tool configured but the block has no template.
    DcFallback,
}

impl CodedTool {
    pub fn name(self) -> &'static str {
        match self {
            CodedTool::Timd => "timd",
            CodedTool::Etimd => "etimd",
            CodedTool::Intratmp => "intratmp",
            CodedTool::Dc => "dc",
            CodedTool::DcFallback => "dc-fallback",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderParams {
    pub tool: Tool,
    pub bv_list: bool,
    pub ar_bv: bool,
    pub hog_transform: bool,
    pub hog_weighting: HogWeighting,
    /// Residual quantiser step; `None` reconstructs with the original samples.
    pub closed_loop: Option<u16>,
    pub metric: Metric,
    pub search_range: usize,
    pub template_thickness: usize,
    pub max_candidates: usize,
    /// Let IntraTMP compete with the template-derived prediction.
    pub intratmp_competition: bool,
}

impl Default for EncoderParams {
    fn default() -> Self {
        EncoderParams {
            tool: Tool::Etimd,
            bv_list: true,
            ar_bv: true,
            hog_transform: true,
            hog_weighting: HogWeighting::Frequency,
            closed_loop: None,
            metric: Metric::Satd,
            search_range: 64,
            template_thickness: 4,
            max_candidates: crate::bvlist::DEFAULT_MAX_CANDIDATES,
            intratmp_competition: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("frame is {0}x{1} but the buffer is {2}x{3}")]
    Geometry(usize, usize, usize, usize),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListStats {
    pub len: usize,
    pub primary: usize,
    pub relocated: usize,
}

impl ListStats {
    fn of(list: &BvList) -> Self {
        ListStats {
            len: list.len(),
            primary: list.count(Provenance::Primary),
            relocated: list.count(Provenance::AutoRelocated),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformInfo {
    pub modes: Vec<IntraMode>,
    pub class: TransformClass,
    /// A block vector among the first two modes was replaced by its HoG direction.
    pub substituted: bool,
    pub compaction: f64,
    pub compaction_dc0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockResult {
    pub block: BlockRef,
    pub coded: CodedTool,
    /// Set derived by the configured template tool, if it ran.
    pub derived: Option<FusionSet>,
    pub list: ListStats,
    pub tmp: Option<TmpMatch>,
    /// SAD of the configured tool's own prediction.
    pub tool_sad: Cost,
    pub prediction: PixelBlock,
    pub sad: Cost,
    pub satd: Cost,
    pub sse: u64,
    pub transform: Option<TransformInfo>,
}

/// Template-side derivation shared by encoder and replay.
struct Derivation {
    fusion: Option<FusionSet>,
    list: ListStats,
}

fn derive(buf: &ReconBuffer, store: &BvStore, block: &BlockRef, template: &GammaTemplate, p: &EncoderParams) -> Derivation {
    let list = if p.tool == Tool::Etimd && p.bv_list {
        let params = BvListParams { max_candidates: p.max_candidates, auto_relocate: p.ar_bv };
        build_bv_list(store, buf, block, &template.shape, params)
    } else {
        BvList::empty()
    };
    let candidates = evaluate_candidates(buf, block, template, &list, p.metric);
    let fusion = match p.tool {
        Tool::Timd => select_modes_timd(&candidates),
        _ => select_modes_etimd(&candidates),
    };
    Derivation { fusion, list: ListStats::of(&list) }
}

fn dc_prediction(buf: &ReconBuffer, block: &BlockRef) -> PixelBlock {
    let refs = build_reference_samples(buf, block.rect());
    predict_dc(&refs, block.w, block.h).expect("references sized for block")
}

fn sse(a: &PixelBlock, b: &PixelBlock) -> u64 {
    a.data().iter().zip(b.data()).map(|(&x, &y)| (x as i64 - y as i64).pow(2) as u64).sum()
}

/// Quantised reconstruction: `pred + round(res / step) * step`, clipped.
pub fn reconstruct(original: &PixelBlock, prediction: &PixelBlock, step: u16, max_value: u16) -> PixelBlock {
    let s = step.max(1) as i64;
    PixelBlock::from_fn(original.width(), original.height(), |x, y| {
        let p = prediction.get(x, y) as i64;
        let r = original.get(x, y) as i64 - p;
        let q = (r.abs() + s / 2) / s * r.signum();
        (p + q * s).clamp(0, max_value as i64) as u16
    })
}

/// Encoder state for one frame.
pub struct FrameContext {
    original: Frame,
    buf: ReconBuffer,
    store: BvStore,
    params: EncoderParams,
}

impl FrameContext {
    pub fn new(original: Frame, block_size: usize, params: EncoderParams) -> Result<Self, EncodeError> {
        let buf = ReconBuffer::for_frame(&original, block_size)?;
        let store = BvStore::new(original.width, original.height);
        Ok(FrameContext { original, buf, store, params })
    }

    /// Enables read tracking on the reconstruction buffer.
    pub fn tracked(mut self) -> Self {
        self.buf = self.buf.with_tracking();
        self
    }

    pub fn buffer(&self) -> &ReconBuffer {
        &self.buf
    }

    pub fn store(&self) -> &BvStore {
        &self.store
    }

    pub fn original(&self) -> &Frame {
        &self.original
    }

    pub fn params(&self) -> &EncoderParams {
        &self.params
    }

    pub fn remaining(&self) -> usize {
        self.buf.blocks().len() - self.buf.next_index()
    }

    /// Encodes the next block in scan order; `None` once the frame is done.
    pub fn encode_next(&mut self) -> Option<Result<BlockResult, EncodeError>> {
        let block = *self.buf.blocks().get(self.buf.next_index())?;
        Some(encode_block(self, &block))
    }

    pub fn encode_all(&mut self) -> Result<Vec<BlockResult>, EncodeError> {
        let mut out = Vec::with_capacity(self.remaining());
        while let Some(r) = self.encode_next() {
            out.push(r?);
        }
        Ok(out)
    }

    pub fn reconstruction(&self) -> Frame {
        self.buf.to_frame()
    }
}

fn sad_of(a: &PixelBlock, b: &PixelBlock) -> Cost {
    sad(a.view(), b.view()).expect("block shapes")
}

/// Runs the configured tool on `block`, commits its reconstruction and
/// records its coding record.
pub fn encode_block(ctx: &mut FrameContext, block: &BlockRef) -> Result<BlockResult, EncodeError> {
    let p = ctx.params;
    let buf = &ctx.buf;
    let orig = ctx.original.block(block.x0, block.y0, block.w, block.h);
    let template = extract_template(buf, block, p.template_thickness);

    let mut derived = None;
    let mut list = ListStats::default();
    let mut tmp = None;
    let (mut coded, mut fusion, mut prediction) = match p.tool {
        Tool::DcOnly => (CodedTool::Dc, FusionSet::single(ModeCandidate::new(ModeKind::Dc, 0)), dc_prediction(buf, block)),
        _ if template.is_empty() => {
            (CodedTool::DcFallback, FusionSet::single(ModeCandidate::new(ModeKind::Dc, 0)), dc_prediction(buf, block))
        }
        Tool::Intratmp => {
            tmp = tmp_search(buf, block, &template, p.search_range, p.metric);
            match tmp {
                Some(m) => {
                    let kind = ModeKind::Bv { bv: m.bv, slot: 0 };
                    (CodedTool::Intratmp, FusionSet::single(ModeCandidate { kind, cost: m.cost }), bv_predict(buf, block, m.bv)?)
                }
                None => (CodedTool::DcFallback, FusionSet::single(ModeCandidate::new(ModeKind::Dc, 0)), dc_prediction(buf, block)),
            }
        }
        Tool::Timd | Tool::Etimd => {
            let d = derive(buf, &ctx.store, block, &template, &p);
            list = d.list;
            let f = d.fusion.expect("non-empty template yields candidates");
            let preds = fusion_predictions(buf, block, &f);
            let pred = fuse(&preds, f.weights(), buf.max_value()).expect("block shapes");
            derived = Some(f.clone());
            let coded = if p.tool == Tool::Timd { CodedTool::Timd } else { CodedTool::Etimd };
            (coded, f, pred)
        }
    };
    let tool_sad = sad_of(&orig, &prediction);

    if derived.is_some() && p.intratmp_competition {
        tmp = tmp_search(buf, block, &template, p.search_range, p.metric);
        if let Some(m) = tmp {
            let copy = bv_predict(buf, block, m.bv)?;
            if sad_of(&orig, &copy) < tool_sad {
                coded = CodedTool::Intratmp;
                fusion = FusionSet::single(ModeCandidate { kind: ModeKind::Bv { bv: m.bv, slot: 0 }, cost: m.cost });
                prediction = copy;
            }
        }
    }

    let transform = transform_info(buf, block, &fusion, &orig, &prediction, &p);
    let recon = match p.closed_loop {
        Some(step) => reconstruct(&orig, &prediction, step, buf.max_value()),
        None => orig.clone(),
    };
    let result = BlockResult {
        block: *block,
        coded,
        derived,
        list,
        tmp,
        tool_sad,
        sad: sad_of(&orig, &prediction),
        satd: satd(orig.view(), prediction.view()).expect("block shapes"),
        sse: sse(&orig, &prediction),
        prediction,
        transform,
    };
    ctx.buf.commit_block(block, &recon)?;
    ctx.store.insert(coding_record(&result));
    Ok(result)
}

/// Coding record a block leaves for later blocks' candidate lists.
pub fn coding_record(result: &BlockResult) -> CodingRecord {
    let integer = |bvs: Vec<_>| bvs.into_iter().map(StoredBv::integer).collect();
    match result.coded {
        CodedTool::Intratmp => CodingRecord {
            block: result.block,
            tool: RecordTool::IntraTmpCoded,
            bvs: integer(result.tmp.map(|m| m.bv).into_iter().collect()),
        },
        CodedTool::Etimd => CodingRecord {
            block: result.block,
            tool: RecordTool::Etimd,
            bvs: integer(result.derived.as_ref().map(|f| f.bvs().collect()).unwrap_or_default()),
        },
        _ => CodingRecord::other(result.block),
    }
}

fn transform_info(
    buf: &ReconBuffer,
    block: &BlockRef,
    fusion: &FusionSet,
    orig: &PixelBlock,
    prediction: &PixelBlock,
    p: &EncoderParams,
) -> Option<TransformInfo> {
    let sizes = crate::transform::TRANSFORM_SIZES;
    if !sizes.contains(&block.w) || !sizes.contains(&block.h) {
        return None;
    }
    let lead = &fusion.modes()[..fusion.len().min(2)];
    let has_bv = lead.iter().any(|m| m.kind.bv().is_some());
    let modes = if p.hog_transform {
        let preds: Vec<PixelBlock> = lead.iter().map(|m| crate::etimd::predict_candidate(buf, block, m.kind)).collect();
        transform_modes(fusion, &preds, p.hog_weighting)
    } else {
        lead.iter().map(|m| m.kind.intra_mode().unwrap_or(IntraMode::PLANAR)).collect()
    };
    let residual: Vec<i32> =
        orig.data().iter().zip(prediction.data()).map(|(&o, &q)| o as i32 - q as i32).collect();
    let class = transform_class(modes[0]);
    let k = block.w * block.h / 4;
    let compaction_of = |c: TransformClass| {
        let coeffs = apply_transform(&residual, block.w, block.h, c).expect("checked size");
        energy_compaction(&coeffs, block.w, block.h, k)
    };
    Some(TransformInfo {
        modes,
        class,
        substituted: p.hog_transform && has_bv,
        compaction: compaction_of(class),
        compaction_dc0: compaction_of(TransformClass::Dc0),
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub blocks: usize,
    /// Blocks whose re-derived fusion set or prediction differs from the encoder's.
    pub mismatches: Vec<usize>,
}

/// Decoder-side re-derivation: walks the blocks again over the encoder's
/// reconstruction, re-deriving template-based fusion sets and reusing the
/// recorded vectors of IntraTMP blocks without searching.
pub fn replay(
    results: &[BlockResult],
    reconstruction: &Frame,
    block_size: usize,
    params: &EncoderParams,
) -> Result<ReplayOutcome, EncodeError> {
    let mut buf = ReconBuffer::for_frame(reconstruction, block_size)?;
    let mut store = BvStore::new(reconstruction.width, reconstruction.height);
    let mut out = ReplayOutcome { blocks: results.len(), mismatches: Vec::new() };
    for r in results {
        let b = &r.block;
        let template = extract_template(&buf, b, params.template_thickness);
        let prediction = match r.coded {
            CodedTool::Intratmp => {
                let bv = r.tmp.expect("IntraTMP blocks carry their vector").bv;
                if let Some(derived) = &r.derived {
                    if derive(&buf, &store, b, &template, params).fusion.as_ref() != Some(derived) {
                        out.mismatches.push(b.scan_index);
                    }
                }
                bv_predict(&buf, b, bv)?
            }
            CodedTool::Timd | CodedTool::Etimd => {
                let fusion = derive(&buf, &store, b, &template, params).fusion;
                match fusion {
                    Some(f) if Some(&f) == r.derived.as_ref() => {
                        let preds = fusion_predictions(&buf, b, &f);
                        fuse(&preds, f.weights(), buf.max_value()).expect("block shapes")
                    }
                    _ => {
                        out.mismatches.push(b.scan_index);
                        r.prediction.clone()
                    }
                }
            }
            CodedTool::Dc | CodedTool::DcFallback => dc_prediction(&buf, b),
        };
        if prediction != r.prediction && out.mismatches.last() != Some(&b.scan_index) {
            out.mismatches.push(b.scan_index);
        }
        buf.commit_block(b, &reconstruction.block(b.x0, b.y0, b.w, b.h))?;
        store.insert(coding_record(r));
    }
    Ok(out)
}
