//! Intra template matching: Γ-shaped templates, windowed search and
//! block-vector copy prediction.

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::block_grid::{BlockRef, GridError, ReconBuffer};
use crate::cost::{Cost, Metric};
use crate::plane::{PixelBlock, Rect};

/// Integer displacement from the current block to its reference block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockVector {
    pub dx: i32,
    pub dy: i32,
}

impl BlockVector {
    pub const fn new(dx: i32, dy: i32) -> Self {
        BlockVector { dx, dy }
    }

    pub fn l1(&self) -> u32 {
        self.dx.unsigned_abs() + self.dy.unsigned_abs()
    }
}

impl Add for BlockVector {
    type Output = BlockVector;
    fn add(self, rhs: BlockVector) -> BlockVector {
        BlockVector::new(self.dx + rhs.dx, self.dy + rhs.dy)
    }
}

impl fmt::Display for BlockVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.dx, self.dy)
    }
}

/// Which template strips exist for a block, in frame coordinates.
///
/// The above strip spans `w + t` columns (corner included) when the left
/// strip is also present, otherwise just the block's `w` columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TemplateShape {
    pub above: Option<Rect>,
    pub left: Option<Rect>,
    pub thickness: usize,
}

impl TemplateShape {
    pub fn of(buf: &ReconBuffer, block: &BlockRef, t: usize) -> TemplateShape {
        let (x0, y0, ti) = (block.x0 as i32, block.y0 as i32, t as i32);
        let left = Rect::new(x0 - ti, y0, t, block.h);
        let left = (t > 0 && buf.is_available(left)).then_some(left);
        let above_core = Rect::new(x0, y0 - ti, block.w, t);
        let above = if t > 0 && buf.is_available(above_core) {
            let with_corner = Rect::new(x0 - ti, y0 - ti, block.w + t, t);
            Some(if left.is_some() && buf.is_available(with_corner) { with_corner } else { above_core })
        } else {
            None
        };
        TemplateShape { above, left, thickness: t }
    }

    pub fn is_empty(&self) -> bool {
        self.above.is_none() && self.left.is_none()
    }

    pub fn strips(&self) -> impl Iterator<Item = Rect> {
        self.above.into_iter().chain(self.left)
    }

    pub fn area(&self) -> usize {
        self.strips().map(|r| r.area()).sum()
    }

    /// Smallest rectangle holding the block and both strips, i.e. the region
    /// a template-side intra prediction has to cover.
    pub fn extended_rect(&self, block: &BlockRef) -> Rect {
        let left_ext = if self.left.is_some() || self.above.is_some_and(|a| a.x < block.x0 as i32) {
            self.thickness
        } else {
            0
        };
        let top_ext = if self.above.is_some() { self.thickness } else { 0 };
        Rect::new(
            block.x0 as i32 - left_ext as i32,
            block.y0 as i32 - top_ext as i32,
            block.w + left_ext,
            block.h + top_ext,
        )
    }
}

/// Samples of a Γ-template. Missing strips are `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaTemplate {
    pub shape: TemplateShape,
    pub above: Option<PixelBlock>,
    pub left: Option<PixelBlock>,
}

impl GammaTemplate {
    pub fn is_empty(&self) -> bool {
        self.above.is_none() && self.left.is_none()
    }

    /// Sum of per-strip costs; strips are tiled independently.
    pub fn cost(&self, other: &GammaTemplate, metric: Metric) -> Cost {
        let strip = |a: &Option<PixelBlock>, b: &Option<PixelBlock>| match (a, b) {
            (Some(a), Some(b)) => metric.cost(a.view(), b.view()).expect("same template geometry"),
            _ => Cost::ZERO,
        };
        strip(&self.above, &other.above) + strip(&self.left, &other.left)
    }
}

pub fn extract_template(buf: &ReconBuffer, block: &BlockRef, t: usize) -> GammaTemplate {
    let shape = TemplateShape::of(buf, block, t);
    let read = |r: Option<Rect>| r.map(|r| buf.region(r).expect("shape is available").to_block());
    GammaTemplate { shape, above: read(shape.above), left: read(shape.left) }
}

/// True when the block displaced by `bv` and its displaced template strips
/// are all reconstructed.
pub fn bv_is_valid(buf: &ReconBuffer, block: &BlockRef, shape: &TemplateShape, bv: BlockVector) -> bool {
    buf.is_available(block.rect().offset(bv.dx, bv.dy))
        && shape.strips().all(|r| buf.is_available(r.offset(bv.dx, bv.dy)))
}

/// The template of the block displaced by `bv`, laid out with the current
/// block's template geometry.
pub fn template_at_bv(
    buf: &ReconBuffer,
    block: &BlockRef,
    shape: &TemplateShape,
    bv: BlockVector,
) -> Result<GammaTemplate, GridError> {
    let displaced = block.rect().offset(bv.dx, bv.dy);
    if !bv_is_valid(buf, block, shape, bv) {
        return Err(GridError::Causality(displaced));
    }
    let read = |r: Option<Rect>| -> Result<Option<PixelBlock>, GridError> {
        r.map(|r| buf.region(r.offset(bv.dx, bv.dy)).map(|v| v.to_block())).transpose()
    };
    Ok(GammaTemplate { shape: *shape, above: read(shape.above)?, left: read(shape.left)? })
}

/// Cost of matching `template` against the template displaced by `bv`,
/// read in place. Returns `None` as soon as the running cost exceeds `bound`.
fn displaced_cost(
    buf: &ReconBuffer,
    template: &GammaTemplate,
    bv: BlockVector,
    metric: Metric,
    bound: Cost,
) -> Option<Cost> {
    let mut total = Cost::ZERO;
    for (rect, strip) in [(template.shape.above, &template.above), (template.shape.left, &template.left)] {
        let (Some(rect), Some(strip)) = (rect, strip) else { continue };
        let view = buf.region(rect.offset(bv.dx, bv.dy)).ok()?;
        total = total + metric.cost(view, strip.view()).expect("same geometry");
        if total > bound {
            return None;
        }
    }
    Some(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmpMatch {
    pub bv: BlockVector,
    pub cost: Cost,
}

/// Search order key: cost, then |dx|+|dy|, then dy, then dx.
fn rank(m: &TmpMatch) -> (Cost, u32, i32, i32) {
    (m.cost, m.bv.l1(), m.bv.dy, m.bv.dx)
}

/// Exhaustive template-matching search over `|dx|, |dy| <= range`.
///
/// Every candidate whose displaced block and template are reconstructed is
/// considered; the winner minimises [`rank`], which is a total order, so the
/// result does not depend on scan order.
pub fn tmp_search(
    buf: &ReconBuffer,
    block: &BlockRef,
    template: &GammaTemplate,
    range: usize,
    metric: Metric,
) -> Option<TmpMatch> {
    if template.is_empty() {
        return None;
    }
    let r = range as i32;
    let mut best: Option<TmpMatch> = None;
    for dy in -r..=r {
        for dx in -r..=r {
            let bv = BlockVector::new(dx, dy);
            if !bv_is_valid(buf, block, &template.shape, bv) {
                continue;
            }
            let bound = best.map_or(Cost::MAX, |b| b.cost);
            let Some(cost) = displaced_cost(buf, template, bv, metric, bound) else { continue };
            let cand = TmpMatch { bv, cost };
            if best.is_none_or(|b| rank(&cand) < rank(&b)) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Copy of the reference block addressed by `bv`.
pub fn bv_predict(buf: &ReconBuffer, block: &BlockRef, bv: BlockVector) -> Result<PixelBlock, GridError> {
    buf.region(block.rect().offset(bv.dx, bv.dy)).map(|v| v.to_block())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::PixelBlock;

    fn committed(frame: impl Fn(usize, usize) -> u16, w: usize, h: usize, bs: usize, upto: usize) -> ReconBuffer {
        let mut buf = ReconBuffer::new(w, h, 8, bs).unwrap();
        for b in buf.blocks().to_vec().iter().take(upto) {
            let px = PixelBlock::from_fn(b.w, b.h, |x, y| frame(b.x0 + x, b.y0 + y));
            buf.commit_block(b, &px).unwrap();
        }
        buf
    }

    fn noise(x: usize, y: usize) -> u16 {
        ((x * 73 + y * 151 + x * y * 17) % 251) as u16
    }

    #[test]
    fn interior_template_geometry() {
        let buf = committed(noise, 32, 32, 8, 5);
        let block = buf.blocks()[5];
        let t = extract_template(&buf, &block, 4);
        assert_eq!(t.shape.above, Some(Rect::new(4, 4, 12, 4)));
        assert_eq!(t.shape.left, Some(Rect::new(4, 8, 4, 8)));
        let above = t.above.unwrap();
        assert_eq!((above.width(), above.height()), (12, 4));
        assert_eq!(above, buf.read_region(4, 4, 12, 4).unwrap());
        assert_eq!(t.left.unwrap(), buf.read_region(4, 8, 4, 8).unwrap());
    }

    #[test]
    fn left_edge_block_has_no_left_strip() {
        let buf = committed(noise, 32, 32, 8, 4);
        let t = extract_template(&buf, &buf.blocks()[4], 4);
        assert!(t.left.is_none());
        assert_eq!(t.shape.above, Some(Rect::new(0, 4, 8, 4)));
        let corner = extract_template(&committed(noise, 32, 32, 8, 0), &BlockRef { x0: 0, y0: 0, w: 8, h: 8, scan_index: 0 }, 4);
        assert!(corner.is_empty());
    }

    /// Block (16, 16) of a 64x64 frame with an 8x8 grid; the first block
    /// with room for displaced templates on both axes.
    fn block18(frame: impl Fn(usize, usize) -> u16) -> (ReconBuffer, BlockRef) {
        let buf = committed(frame, 64, 64, 8, 18);
        let block = buf.blocks()[18];
        assert_eq!((block.x0, block.y0), (16, 16));
        (buf, block)
    }

    #[test]
    fn zero_and_out_of_frame_vectors_are_rejected() {
        let (buf, block) = block18(noise);
        let shape = TemplateShape::of(&buf, &block, 4);
        assert!(template_at_bv(&buf, &block, &shape, BlockVector::new(0, 0)).is_err());
        assert!(template_at_bv(&buf, &block, &shape, BlockVector::new(-13, 0)).is_err());
        assert!(template_at_bv(&buf, &block, &shape, BlockVector::new(0, -40)).is_err());
        assert!(template_at_bv(&buf, &block, &shape, BlockVector::new(-12, 0)).is_ok());
        assert!(template_at_bv(&buf, &block, &shape, BlockVector::new(-4, -8)).is_ok());
    }

    #[test]
    fn periodic_frame_matches_exactly() {
        let period = |x: usize, y: usize| noise(x % 8, y);
        let (buf, block) = block18(period);
        let own = extract_template(&buf, &block, 4);
        let shifted = template_at_bv(&buf, &block, &own.shape, BlockVector::new(-8, 0)).unwrap();
        assert_eq!(shifted.above, own.above);
        assert_eq!(shifted.left, own.left);
        assert_eq!(own.cost(&shifted, Metric::Satd), Cost::ZERO);
        let pred = bv_predict(&buf, &block, BlockVector::new(-8, 0)).unwrap();
        assert_eq!(pred, PixelBlock::from_fn(8, 8, |x, y| period(16 + x, 16 + y)));
    }

    #[test]
    fn constant_frame_search_picks_the_tie_break_winner() {
        let (buf, block) = block18(|_, _| 77);
        let t = extract_template(&buf, &block, 4);
        let m = tmp_search(&buf, &block, &t, 16, Metric::Sad).unwrap();
        assert_eq!(m.cost, Cost::ZERO);
        let mut valid: Vec<BlockVector> = (-16..=16)
            .flat_map(|dy| (-16..=16).map(move |dx| BlockVector::new(dx, dy)))
            .filter(|&bv| bv_is_valid(&buf, &block, &t.shape, bv))
            .collect();
        valid.sort_by_key(|bv| (bv.l1(), bv.dy, bv.dx));
        assert_eq!(m.bv, valid[0]);
        assert_eq!(m.bv, BlockVector::new(0, -8));
    }

    #[test]
    fn zero_range_finds_nothing() {
        let (buf, block) = block18(noise);
        let t = extract_template(&buf, &block, 4);
        assert_eq!(tmp_search(&buf, &block, &t, 0, Metric::Sad), None);
    }

    #[test]
    fn bv_into_current_block_errors() {
        let (buf, block) = block18(noise);
        assert!(bv_predict(&buf, &block, BlockVector::new(-4, 0)).is_err());
        assert_eq!(bv_predict(&buf, &block, BlockVector::new(-8, -8)).unwrap(), buf.read_region(8, 8, 8, 8).unwrap());
    }
}
