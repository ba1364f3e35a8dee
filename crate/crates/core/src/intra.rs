//! Planar, DC and the 65 angular intra predictors.
//!
//! Angular prediction uses the conventional displacement table with
//! 1/32-sample two-tap linear interpolation; there are no smoothing filters,
//! no position-dependent correction and no wide-angle remapping. Reference
//! arrays are long enough (`w + max(w, h)`) that the steepest modes stay
//! inside them for non-square blocks too.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::block_grid::ReconBuffer;
use crate::plane::{PixelBlock, Rect};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntraMode(u8);

impl IntraMode {
    pub const PLANAR: IntraMode = IntraMode(0);
    pub const DC: IntraMode = IntraMode(1);
    pub const DIAG_BOTTOM_LEFT: IntraMode = IntraMode(2);
    pub const HOR: IntraMode = IntraMode(18);
    pub const DIAG_TOP_LEFT: IntraMode = IntraMode(34);
    pub const VER: IntraMode = IntraMode(50);
    pub const DIAG_TOP_RIGHT: IntraMode = IntraMode(66);
    pub const COUNT: u8 = 67;

    pub fn new(index: u8) -> Option<IntraMode> {
        (index < Self::COUNT).then_some(IntraMode(index))
    }

    pub fn angular(index: u8) -> Option<IntraMode> {
        (2..Self::COUNT).contains(&index).then_some(IntraMode(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn is_angular(self) -> bool {
        self.0 >= 2
    }

    pub fn all_angular() -> impl Iterator<Item = IntraMode> {
        (2..Self::COUNT).map(IntraMode)
    }

    /// Displacement per row/column in 1/32 sample; `None` for Planar/DC.
    pub fn angle(self) -> Option<i32> {
        self.is_angular().then(|| PRED_ANGLE[self.0 as usize - 2])
    }

    pub fn is_vertical_class(self) -> bool {
        self.0 >= 34
    }
}

impl fmt::Display for IntraMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => f.write_str("PLANAR"),
            1 => f.write_str("DC"),
            m => write!(f, "A{m}"),
        }
    }
}

/// Displacement table for modes 2..=66.
pub const PRED_ANGLE: [i32; 65] = [
    32, 29, 26, 23, 20, 18, 16, 14, 12, 10, 8, 6, 4, 3, 2, 1, // 2..17
    0, // 18
    -1, -2, -3, -4, -6, -8, -10, -12, -14, -16, -18, -20, -23, -26, -29, // 19..33
    -32, // 34
    -29, -26, -23, -20, -18, -16, -14, -12, -10, -8, -6, -4, -3, -2, -1, // 35..49
    0, // 50
    1, 2, 3, 4, 6, 8, 10, 12, 14, 16, 18, 20, 23, 26, 29, 32, // 51..66
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntraError {
    #[error("mode {0} is not angular")]
    NotAngular(u8),
    #[error("reference arrays too short for a {w}x{h} block")]
    ShortReferences { w: usize, h: usize },
}

/// Reference samples around a block.
///
/// `above[0]` is the top-left corner and `above[1 + i]` sits over column
/// `i`; `left[j]` sits beside row `j`. Both run `w + max(w, h)` (resp.
/// `h + max(w, h)`) samples past the block origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefSamples {
    pub above: Vec<u16>,
    pub left: Vec<u16>,
    /// Number of samples that came from the reconstruction (the rest are padding).
    pub available: usize,
}

impl RefSamples {
    pub fn lengths(w: usize, h: usize) -> (usize, usize) {
        let ext = w.max(h);
        (1 + w + ext, h + ext)
    }

    pub fn filled(w: usize, h: usize, value: u16) -> Self {
        let (na, nl) = Self::lengths(w, h);
        RefSamples { above: vec![value; na], left: vec![value; nl], available: 0 }
    }

    pub fn corner(&self) -> u16 {
        self.above[0]
    }

    fn fits(&self, w: usize, h: usize) -> bool {
        let (na, nl) = Self::lengths(w, h);
        self.above.len() >= na && self.left.len() >= nl
    }
}

/// Gathers the references of `rect` from the reconstruction.
///
/// Unavailable samples are substituted by scanning from the far end of the
/// left column up through the corner and along the above row: a leading run
/// of gaps takes the first available sample, every later gap repeats its
/// predecessor. With nothing available the mid-grey default is used.
pub fn build_reference_samples(buf: &ReconBuffer, rect: Rect) -> RefSamples {
    let (na, nl) = RefSamples::lengths(rect.w, rect.h);
    // unified scan order: left bottom-to-top, corner, above left-to-right
    let positions = (0..nl)
        .rev()
        .map(|j| (rect.x - 1, rect.y + j as i32))
        .chain((0..na).map(|i| (rect.x - 1 + i as i32, rect.y - 1)));
    let mut line: Vec<Option<u16>> = positions
        .map(|(x, y)| buf.is_pixel_available(x, y).then(|| buf.sample(x, y).expect("checked")))
        .collect();
    let available = line.iter().filter(|s| s.is_some()).count();
    let fill = match line.iter().flatten().next() {
        Some(&first) => first,
        None => buf.default_sample(),
    };
    let mut prev = fill;
    for s in line.iter_mut() {
        match s {
            Some(v) => prev = *v,
            None => *s = Some(prev),
        }
    }
    let mut line = line.into_iter().map(|s| s.expect("filled"));
    let mut left: Vec<u16> = line.by_ref().take(nl).collect();
    left.reverse();
    let above: Vec<u16> = line.collect();
    RefSamples { above, left, available }
}

pub fn predict(refs: &RefSamples, mode: IntraMode, w: usize, h: usize) -> Result<PixelBlock, IntraError> {
    match mode {
        IntraMode::PLANAR => predict_planar(refs, w, h),
        IntraMode::DC => predict_dc(refs, w, h),
        m => predict_angular(refs, m, w, h),
    }
}

pub fn predict_planar(refs: &RefSamples, w: usize, h: usize) -> Result<PixelBlock, IntraError> {
    if !refs.fits(w, h) {
        return Err(IntraError::ShortReferences { w, h });
    }
    let top_right = refs.above[w + 1] as u64;
    let bottom_left = refs.left[h] as u64;
    let (wu, hu) = (w as u64, h as u64);
    let denom = 2 * wu * hu;
    Ok(PixelBlock::from_fn(w, h, |x, y| {
        let (xu, yu) = (x as u64, y as u64);
        let hor = (wu - 1 - xu) * refs.left[y] as u64 + (xu + 1) * top_right;
        let ver = (hu - 1 - yu) * refs.above[x + 1] as u64 + (yu + 1) * bottom_left;
        ((hu * hor + wu * ver + wu * hu) / denom) as u16
    }))
}

pub fn predict_dc(refs: &RefSamples, w: usize, h: usize) -> Result<PixelBlock, IntraError> {
    if !refs.fits(w, h) {
        return Err(IntraError::ShortReferences { w, h });
    }
    let sum: u64 = refs.above[1..=w].iter().chain(&refs.left[..h]).map(|&v| v as u64).sum();
    let n = (w + h) as u64;
    Ok(PixelBlock::filled(w, h, ((sum + n / 2) / n) as u16))
}

pub fn predict_angular(refs: &RefSamples, mode: IntraMode, w: usize, h: usize) -> Result<PixelBlock, IntraError> {
    let angle = mode.angle().ok_or(IntraError::NotAngular(mode.index()))?;
    if !refs.fits(w, h) {
        return Err(IntraError::ShortReferences { w, h });
    }
    let vertical = mode.is_vertical_class();
    // (main, side): main runs along the prediction axis, side supplies the
    // projected extension for negative angles. Both start at the corner.
    let (main_len, along, across) = if vertical { (w, w, h) } else { (h, h, w) };
    let side_sample = |s: usize| -> u16 {
        if s == 0 {
            refs.corner()
        } else if vertical {
            refs.left[(s - 1).min(refs.left.len() - 1)]
        } else {
            refs.above[s.min(refs.above.len() - 1)]
        }
    };
    let main_sample = |i: usize| -> u16 {
        if i == 0 {
            refs.corner()
        } else if vertical {
            refs.above[i]
        } else {
            refs.left[i - 1]
        }
    };

    let ext = if angle < 0 { (-(((across as i32) * angle) >> 5)) as usize } else { 0 };
    let span = main_len + w.max(h) + 1;
    let mut reference = vec![0u16; ext + span + 1];
    for i in 0..span {
        reference[ext + i] = main_sample(i);
    }
    reference[ext + span] = reference[ext + span - 1];
    if angle < 0 {
        let inv = (16384.0 / (-angle) as f64).round() as usize;
        for k in 1..=ext {
            reference[ext - k] = side_sample((k * inv + 256) >> 9);
        }
    }

    let mut out = PixelBlock::filled(w, h, 0);
    for j in 0..across {
        let pos = (j as i32 + 1) * angle;
        let idx = pos >> 5;
        let fact = (pos & 31) as u32;
        for i in 0..along {
            let base = (ext as i32 + i as i32 + idx + 1) as usize;
            let a = reference[base] as u32;
            let v = if fact == 0 {
                a
            } else {
                let b = reference[base + 1] as u32;
                ((32 - fact) * a + fact * b + 16) >> 5
            };
            let (x, y) = if vertical { (i, j) } else { (j, i) };
            out.set(x, y, v as u16);
        }
    }
    Ok(out)
}
