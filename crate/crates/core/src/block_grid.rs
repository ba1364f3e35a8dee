//! Fixed-size raster block grid and the causal reconstruction buffer.
//!
//! Every predictor reads reconstructed samples exclusively through
//! [`ReconBuffer`], which refuses to hand out a pixel that has not been
//! committed yet. Because blocks are committed in raster order on a fixed
//! grid, the committed region is always a staircase made of complete block
//! rows plus a prefix of the current block row; rectangle availability is
//! therefore an O(1) test.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pixel_io::Frame;
use crate::plane::{BlockView, PixelBlock, Rect};

pub const BLOCK_SIZES: [usize; 5] = [4, 8, 16, 32, 64];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("unsupported block size {0}")]
    BlockSize(usize),
    #[error("causality violation: {0} is not fully reconstructed")]
    Causality(Rect),
    #[error("out-of-order commit: expected block {expected}, got {got}")]
    OutOfOrder { expected: usize, got: usize },
    #[error("block {0} has the wrong sample count")]
    SampleCount(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRef {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
    pub scan_index: usize,
}

impl BlockRef {
    pub fn rect(&self) -> Rect {
        Rect::new(self.x0 as i32, self.y0 as i32, self.w, self.h)
    }
}

/// Raster-order grid; right and bottom edge blocks are clipped to the frame.
pub fn partition(frame_w: usize, frame_h: usize, block_size: usize) -> Result<Vec<BlockRef>, GridError> {
    if !BLOCK_SIZES.contains(&block_size) {
        return Err(GridError::BlockSize(block_size));
    }
    let mut blocks = Vec::new();
    for y0 in (0..frame_h).step_by(block_size) {
        for x0 in (0..frame_w).step_by(block_size) {
            blocks.push(BlockRef {
                x0,
                y0,
                w: block_size.min(frame_w - x0),
                h: block_size.min(frame_h - y0),
                scan_index: blocks.len(),
            });
        }
    }
    Ok(blocks)
}

/// Records every region read while tracking is enabled and checks it against
/// the committed set using the grid geometry directly, independent of the
/// buffer's own availability bookkeeping.
#[derive(Clone, Debug, Default)]
pub struct AccessLog {
    pub reads: u64,
    pub pixels: u64,
    pub violations: Vec<(Rect, usize)>,
}

#[derive(Clone, Debug)]
pub struct ReconBuffer {
    width: usize,
    height: usize,
    bit_depth: u8,
    block_size: usize,
    blocks: Vec<BlockRef>,
    samples: Vec<u16>,
    available: Vec<bool>,
    next: usize,
    tracker: Option<RefCell<AccessLog>>,
}

impl ReconBuffer {
    pub fn new(width: usize, height: usize, bit_depth: u8, block_size: usize) -> Result<Self, GridError> {
        let blocks = partition(width, height, block_size)?;
        Ok(ReconBuffer {
            width,
            height,
            bit_depth,
            block_size,
            blocks,
            samples: vec![0; width * height],
            available: vec![false; width * height],
            next: 0,
            tracker: None,
        })
    }

    pub fn for_frame(frame: &Frame, block_size: usize) -> Result<Self, GridError> {
        Self::new(frame.width, frame.height, frame.bit_depth, block_size)
    }

    pub fn with_tracking(mut self) -> Self {
        self.tracker = Some(RefCell::new(AccessLog::default()));
        self
    }

    pub fn access_log(&self) -> Option<AccessLog> {
        self.tracker.as_ref().map(|t| t.borrow().clone())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn blocks(&self) -> &[BlockRef] {
        &self.blocks
    }

    /// Index of the next block to be committed (== number committed so far).
    pub fn next_index(&self) -> usize {
        self.next
    }

    pub fn max_value(&self) -> u16 {
        crate::pixel_io::sample_mask(self.bit_depth)
    }

    pub fn default_sample(&self) -> u16 {
        1 << (self.bit_depth - 1)
    }

    /// Availability of a single pixel according to the per-pixel flags.
    pub fn flag(&self, x: usize, y: usize) -> bool {
        self.available[y * self.width + x]
    }

    pub fn is_pixel_available(&self, x: i32, y: i32) -> bool {
        self.is_available(Rect::new(x, y, 1, 1))
    }

    /// O(1) test that every pixel of `r` is in frame and committed.
    pub fn is_available(&self, r: Rect) -> bool {
        if r.is_empty() {
            return true;
        }
        if r.x < 0 || r.y < 0 || r.right() > self.width as i64 || r.bottom() > self.height as i64 {
            return false;
        }
        let Some(cur) = self.blocks.get(self.next) else {
            // everything committed
            return true;
        };
        let row_top = cur.y0 as i64;
        let row_bottom = (cur.y0 + cur.h) as i64;
        r.bottom() <= row_top || (r.bottom() <= row_bottom && r.right() <= cur.x0 as i64)
    }

    fn track(&self, r: Rect) {
        let Some(tracker) = &self.tracker else { return };
        let mut log = tracker.borrow_mut();
        log.reads += 1;
        log.pixels += r.area() as u64;
        let cols = self.width.div_ceil(self.block_size);
        let outside = r.x < 0
            || r.y < 0
            || r.right() > self.width as i64
            || r.bottom() > self.height as i64;
        let bad = outside
            || (r.y as usize..r.bottom() as usize).any(|y| {
                (r.x as usize..r.right() as usize).any(|x| {
                    let covering = (y / self.block_size) * cols + x / self.block_size;
                    covering >= self.next
                })
            });
        if bad {
            log.violations.push((r, self.next));
        }
    }

    /// Borrowed view of a committed region; errors if any pixel is unavailable.
    pub fn region(&self, r: Rect) -> Result<BlockView<'_>, GridError> {
        if r.is_empty() {
            return Ok(BlockView::new(&[], 0, r.w, r.h));
        }
        self.track(r);
        if !self.is_available(r) {
            return Err(GridError::Causality(r));
        }
        let start = r.y as usize * self.width + r.x as usize;
        Ok(BlockView::new(&self.samples[start..], self.width, r.w, r.h))
    }

    /// Owned copy of a committed region.
    pub fn read_region(&self, x: i32, y: i32, w: usize, h: usize) -> Result<PixelBlock, GridError> {
        self.region(Rect::new(x, y, w, h)).map(|v| v.to_block())
    }

    pub fn sample(&self, x: i32, y: i32) -> Result<u16, GridError> {
        self.region(Rect::new(x, y, 1, 1)).map(|v| v.get(0, 0))
    }

    /// Stores the reconstruction of `block`, which must be next in scan order.
    pub fn commit_block(&mut self, block: &BlockRef, recon: &PixelBlock) -> Result<(), GridError> {
        if block.scan_index != self.next || self.blocks.get(self.next) != Some(block) {
            return Err(GridError::OutOfOrder { expected: self.next, got: block.scan_index });
        }
        if recon.width() != block.w || recon.height() != block.h {
            return Err(GridError::SampleCount(block.scan_index));
        }
        for y in 0..block.h {
            let start = (block.y0 + y) * self.width + block.x0;
            self.samples[start..start + block.w].copy_from_slice(recon.row(y));
            self.available[start..start + block.w].iter_mut().for_each(|f| *f = true);
        }
        self.next += 1;
        Ok(())
    }

    /// Reconstructed plane so far (uncommitted samples read as zero).
    pub fn to_frame(&self) -> Frame {
        Frame { width: self.width, height: self.height, bit_depth: self.bit_depth, samples: self.samples.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corners(blocks: &[BlockRef]) -> Vec<(usize, usize)> {
        blocks.iter().map(|b| (b.x0, b.y0)).collect()
    }

    #[test]
    fn partition_is_raster_ordered() {
        let b = partition(16, 16, 8).unwrap();
        assert_eq!(corners(&b), vec![(0, 0), (8, 0), (0, 8), (8, 8)]);
        assert_eq!(b.iter().map(|b| b.scan_index).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn partition_clips_the_right_column() {
        let b = partition(20, 16, 8).unwrap();
        assert_eq!(b.len(), 6);
        assert_eq!((b[2].x0, b[2].w, b[2].h), (16, 4, 8));
        assert_eq!((b[5].x0, b[5].w), (16, 4));
    }

    #[test]
    fn partition_counts() {
        assert_eq!(partition(64, 64, 16).unwrap().len(), 16);
        assert_eq!(partition(64, 64, 7), Err(GridError::BlockSize(7)));
    }

    fn filled_buffer(w: usize, h: usize, bs: usize, upto: usize) -> ReconBuffer {
        let mut buf = ReconBuffer::new(w, h, 8, bs).unwrap();
        let blocks = buf.blocks().to_vec();
        for b in &blocks[..upto] {
            let block = PixelBlock::from_fn(b.w, b.h, |x, y| ((b.x0 + x) + 3 * (b.y0 + y)) as u16);
            buf.commit_block(b, &block).unwrap();
        }
        buf
    }

    #[test]
    fn read_region_inside_committed_area() {
        let buf = filled_buffer(16, 16, 8, 3);
        let r = buf.read_region(2, 9, 3, 2).unwrap();
        assert_eq!(r.data(), &[2 + 27, 3 + 27, 4 + 27, 2 + 30, 3 + 30, 4 + 30]);
    }

    #[test]
    fn read_region_overlapping_current_block_is_a_causality_error() {
        let buf = filled_buffer(16, 16, 8, 3);
        assert!(matches!(buf.read_region(7, 7, 2, 2), Err(GridError::Causality(_))));
        assert!(matches!(buf.read_region(-1, 0, 2, 2), Err(GridError::Causality(_))));
    }

    #[test]
    fn zero_area_region_is_empty() {
        let buf = filled_buffer(16, 16, 8, 0);
        assert_eq!(buf.read_region(5, 5, 0, 3).unwrap().data(), &[] as &[u16]);
    }

    #[test]
    fn commit_order_is_enforced() {
        let mut buf = ReconBuffer::new(16, 16, 8, 8).unwrap();
        let blocks = buf.blocks().to_vec();
        let px = PixelBlock::filled(8, 8, 1);
        assert_eq!(
            buf.commit_block(&blocks[1], &px),
            Err(GridError::OutOfOrder { expected: 0, got: 1 })
        );
        buf.commit_block(&blocks[0], &px).unwrap();
        assert_eq!(
            buf.commit_block(&blocks[0], &px),
            Err(GridError::OutOfOrder { expected: 1, got: 0 })
        );
    }

    #[test]
    fn tracker_flags_reads_outside_committed_blocks() {
        let buf = filled_buffer(16, 16, 8, 1).with_tracking();
        let _ = buf.read_region(0, 0, 8, 8);
        let _ = buf.read_region(4, 4, 8, 2);
        let log = buf.access_log().unwrap();
        assert_eq!(log.reads, 2);
        assert_eq!(log.violations.len(), 1);
    }

    proptest! {
        #[test]
        fn partition_tiles_the_frame(w in 1usize..80, h in 1usize..80, bs in prop::sample::select(BLOCK_SIZES.to_vec())) {
            let blocks = partition(w, h, bs).unwrap();
            let mut cover = vec![0u8; w * h];
            for b in &blocks {
                prop_assert!(b.x0 + b.w <= w && b.y0 + b.h <= h);
                for y in b.y0..b.y0 + b.h {
                    for x in b.x0..b.x0 + b.w {
                        cover[y * w + x] += 1;
                    }
                }
            }
            prop_assert!(cover.iter().all(|&c| c == 1));
        }

        #[test]
        fn availability_matches_flags(
            w in 4usize..40, h in 4usize..40,
            bs in prop::sample::select(vec![4usize, 8, 16]),
            frac in 0.0f64..1.0,
            rx in -5i32..45, ry in -5i32..45, rw in 1usize..12, rh in 1usize..12,
        ) {
            let total = partition(w, h, bs).unwrap().len();
            let upto = ((total as f64) * frac) as usize;
            let buf = filled_buffer(w, h, bs, upto);
            // flags are set for exactly blocks 0..upto
            for b in buf.blocks() {
                let committed = b.scan_index < upto;
                for y in b.y0..b.y0 + b.h {
                    for x in b.x0..b.x0 + b.w {
                        prop_assert_eq!(buf.flag(x, y), committed);
                    }
                }
            }
            let r = Rect::new(rx, ry, rw, rh);
            let by_flags = r.x >= 0 && r.y >= 0 && r.right() <= w as i64 && r.bottom() <= h as i64
                && (ry..ry + rh as i32).all(|y| (rx..rx + rw as i32).all(|x| buf.flag(x as usize, y as usize)));
            prop_assert_eq!(buf.is_available(r), by_flags);
        }
    }
}
