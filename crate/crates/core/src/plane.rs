//! Owned and borrowed 2-D sample blocks.

use std::fmt;

/// Axis-aligned rectangle in frame coordinates. The origin is signed so that
/// displaced candidates may point outside the frame; such rectangles are
/// simply never available.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: i32,
    pub y: i32,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub const fn new(x: i32, y: i32, w: usize, h: usize) -> Self {
        Rect { x, y, w, h }
    }

    pub fn is_empty(&self) -> bool {
        self.w == 0 || self.h == 0
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn offset(&self, dx: i32, dy: i32) -> Rect {
        Rect { x: self.x + dx, y: self.y + dy, ..*self }
    }

    pub fn right(&self) -> i64 {
        self.x as i64 + self.w as i64
    }

    pub fn bottom(&self) -> i64 {
        self.y as i64 + self.h as i64
    }

    pub fn contains(&self, x: i32, y: i32) -> bool {
        x >= self.x && y >= self.y && (x as i64) < self.right() && (y as i64) < self.bottom()
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}@({},{})", self.w, self.h, self.x, self.y)
    }
}

/// An owned, densely packed block of samples in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelBlock {
    width: usize,
    height: usize,
    data: Vec<u16>,
}

impl PixelBlock {
    pub fn new(width: usize, height: usize, data: Vec<u16>) -> Self {
        assert_eq!(data.len(), width * height, "block data length mismatch");
        PixelBlock { width, height, data }
    }

    pub fn filled(width: usize, height: usize, value: u16) -> Self {
        PixelBlock { width, height, data: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u16) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        PixelBlock { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u16> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u16) {
        self.data[y * self.width + x] = v;
    }

    pub fn row(&self, y: usize) -> &[u16] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn view(&self) -> BlockView<'_> {
        BlockView { data: &self.data, stride: self.width, width: self.width, height: self.height }
    }

    /// Copy of the sub-rectangle at `(x, y)` of size `w`×`h`.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> PixelBlock {
        PixelBlock::from_fn(w, h, |cx, cy| self.get(x + cx, y + cy))
    }

    pub fn transposed(&self) -> PixelBlock {
        PixelBlock::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }

    pub fn min_max(&self) -> Option<(u16, u16)> {
        let min = self.data.iter().copied().min()?;
        let max = self.data.iter().copied().max()?;
        Some((min, max))
    }
}

/// Borrowed strided view over a block of samples.
#[derive(Clone, Copy, Debug)]
pub struct BlockView<'a> {
    data: &'a [u16],
    stride: usize,
    width: usize,
    height: usize,
}

impl<'a> BlockView<'a> {
    pub fn new(data: &'a [u16], stride: usize, width: usize, height: usize) -> Self {
        if height > 0 && width > 0 {
            assert!(
                stride >= width && data.len() >= (height - 1) * stride + width,
                "view exceeds backing slice"
            );
        }
        BlockView { data, stride, width, height }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn row(&self, y: usize) -> &'a [u16] {
        let start = y * self.stride;
        &self.data[start..start + self.width]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.stride + x]
    }

    pub fn sub(&self, x: usize, y: usize, w: usize, h: usize) -> BlockView<'a> {
        assert!(x + w <= self.width && y + h <= self.height, "sub-view out of range");
        if w == 0 || h == 0 {
            return BlockView { data: &[], stride: 0, width: w, height: h };
        }
        BlockView { data: &self.data[y * self.stride + x..], stride: self.stride, width: w, height: h }
    }

    pub fn to_block(&self) -> PixelBlock {
        PixelBlock::from_fn(self.width, self.height, |x, y| self.get(x, y))
    }
}
