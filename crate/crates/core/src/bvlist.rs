//! Candidate block-vector list construction.
//!
//! Candidates are harvested from the coding records of already coded blocks
//! at fixed sampling points: five adjacent positions around the current
//! block and two rings of non-adjacent positions further out. Each sampled
//! vector may spawn auto-relocated candidates by chaining through the
//! record of the block it points at. The final list keeps first occurrences,
//! drops anything the current block cannot legally use, and is capped.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::block_grid::{BlockRef, ReconBuffer};
use crate::tmp::{bv_is_valid, BlockVector, TemplateShape};

pub const DEFAULT_MAX_CANDIDATES: usize = 20;

/// Which tool produced a coding record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordTool {
    IntraTmpCoded,
    Etimd,
    Other,
}

/// Precision a stored vector was signalled with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BvPrecision {
    Integer,
    /// 1/16-sample units.
    Sixteenth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredBv {
    pub raw: BlockVector,
    pub precision: BvPrecision,
}

impl StoredBv {
    pub fn integer(bv: BlockVector) -> Self {
        StoredBv { raw: bv, precision: BvPrecision::Integer }
    }

    pub fn normalized(&self) -> BlockVector {
        normalize_bv(self.raw, self.precision)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodingRecord {
    pub block: BlockRef,
    pub tool: RecordTool,
    pub bvs: Vec<StoredBv>,
}

impl CodingRecord {
    pub fn other(block: BlockRef) -> Self {
        CodingRecord { block, tool: RecordTool::Other, bvs: Vec::new() }
    }

    pub fn uses_bvs(&self) -> bool {
        !self.bvs.is_empty()
    }
}

/// Integer-pel normalisation: sub-pel sources are floor-shifted by 4 bits.
pub fn normalize_bv(raw: BlockVector, precision: BvPrecision) -> BlockVector {
    match precision {
        BvPrecision::Integer => raw,
        BvPrecision::Sixteenth => BlockVector::new(raw.dx >> 4, raw.dy >> 4),
    }
}

/// Per-pixel index of the coding record covering each committed pixel.
#[derive(Clone, Debug)]
pub struct BvStore {
    width: usize,
    height: usize,
    owner: Vec<u32>,
    records: Vec<CodingRecord>,
}

const NONE: u32 = u32::MAX;

impl BvStore {
    pub fn new(width: usize, height: usize) -> Self {
        BvStore { width, height, owner: vec![NONE; width * height], records: Vec::new() }
    }

    pub fn insert(&mut self, record: CodingRecord) {
        let id = self.records.len() as u32;
        let b = record.block;
        for y in b.y0..(b.y0 + b.h).min(self.height) {
            let start = y * self.width + b.x0;
            let end = y * self.width + (b.x0 + b.w).min(self.width);
            self.owner[start..end].iter_mut().for_each(|o| *o = id);
        }
        self.records.push(record);
    }

    fn record_id(&self, x: i32, y: i32) -> Option<u32> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return None;
        }
        let id = self.owner[y as usize * self.width + x as usize];
        (id != NONE).then_some(id)
    }

    pub fn record_at(&self, x: i32, y: i32) -> Option<&CodingRecord> {
        self.record_id(x, y).map(|id| &self.records[id as usize])
    }

    pub fn records(&self) -> &[CodingRecord] {
        &self.records
    }
}

/// Relative sampling positions around a `w`×`h` block, in visiting order.
///
/// The adjacent set is left, above, above-right, below-left and above-left;
/// each non-adjacent ring `k` moves those points outward by `k·w`
/// horizontally and `k·h` vertically.
pub fn sampling_positions(w: usize, h: usize) -> Vec<(i32, i32)> {
    let (w, h) = (w as i32, h as i32);
    let base = [
        ((-1, h - 1), (-1, 0)),
        ((w - 1, -1), (0, -1)),
        ((w, -1), (1, -1)),
        ((-1, h), (-1, 1)),
        ((-1, -1), (-1, -1)),
    ];
    (0..=2)
        .flat_map(|k| base.iter().map(move |&((x, y), (dx, dy))| (x + dx * k * w, y + dy * k * h)))
        .collect()
}

/// Vectors of the records found at the sampling points. A record reached
/// from several points contributes once.
pub fn sample_spatial_bvs(store: &BvStore, block: &BlockRef) -> Vec<BlockVector> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (rx, ry) in sampling_positions(block.w, block.h) {
        let Some(id) = store.record_id(block.x0 as i32 + rx, block.y0 as i32 + ry) else { continue };
        if seen.insert(id) {
            out.extend(store.records[id as usize].bvs.iter().map(StoredBv::normalized));
        }
    }
    out
}

/// Auto-relocated vectors: each primary plus every vector recorded by the
/// block covering the primary's reference top-left pixel. One level only.
pub fn derive_ar_bvs(store: &BvStore, primaries: &[BlockVector], block: &BlockRef) -> Vec<BlockVector> {
    let mut out = Vec::new();
    for &v in primaries {
        let Some(rec) = store.record_at(block.x0 as i32 + v.dx, block.y0 as i32 + v.dy) else { continue };
        if rec.uses_bvs() {
            out.extend(rec.bvs.iter().map(|s| v + s.normalized()));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Primary,
    AutoRelocated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BvEntry {
    pub bv: BlockVector,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BvList {
    entries: Vec<BvEntry>,
}

impl BvList {
    pub fn empty() -> Self {
        BvList::default()
    }

    pub fn entries(&self) -> &[BvEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn vectors(&self) -> impl Iterator<Item = BlockVector> + '_ {
        self.entries.iter().map(|e| e.bv)
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.entries.iter().filter(|e| e.provenance == provenance).count()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BvListParams {
    pub max_candidates: usize,
    pub auto_relocate: bool,
}

impl Default for BvListParams {
    fn default() -> Self {
        BvListParams { max_candidates: DEFAULT_MAX_CANDIDATES, auto_relocate: true }
    }
}

/// Primaries in sampling order, then auto-relocated vectors in derivation
/// order; first occurrence wins, unusable vectors are dropped, and the
/// result is truncated to `max_candidates`.
pub fn build_bv_list(
    store: &BvStore,
    buf: &ReconBuffer,
    block: &BlockRef,
    shape: &TemplateShape,
    params: BvListParams,
) -> BvList {
    let primaries = sample_spatial_bvs(store, block);
    let relocated = if params.auto_relocate { derive_ar_bvs(store, &primaries, block) } else { Vec::new() };
    let mut seen = HashSet::new();
    let entries = primaries
        .into_iter()
        .map(|bv| BvEntry { bv, provenance: Provenance::Primary })
        .chain(relocated.into_iter().map(|bv| BvEntry { bv, provenance: Provenance::AutoRelocated }))
        .filter(|e| seen.insert(e.bv))
        .filter(|e| bv_is_valid(buf, block, shape, e.bv))
        .take(params.max_candidates)
        .collect();
    BvList { entries }
}
