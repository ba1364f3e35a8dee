//! Seeded synthetic frames: screen-content layouts, directional textures
//! and noise.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::pixel_io::Frame;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    Constant,
    Noise,
    HStripes,
    VStripes,
    Diagonal,
    Checkerboard,
    /// One random 8×8 glyph repeated over the whole frame.
    GlyphTile,
    /// Block-aligned text: words from a small vocabulary over a glyph alphabet.
    Text,
    /// Text on a 6×9 cell pitch, so glyphs straddle block edges.
    TextOffset,
    /// Rows of labelled buttons.
    Ui,
    /// Grid of repeated icons.
    Icons,
    /// Table with ruled cells and digits.
    Spreadsheet,
    /// Indented source listing with coloured keywords.
    Code,
}

impl Pattern {
    pub const ALL: [Pattern; 13] = [
        Pattern::Constant,
        Pattern::Noise,
        Pattern::HStripes,
        Pattern::VStripes,
        Pattern::Diagonal,
        Pattern::Checkerboard,
        Pattern::GlyphTile,
        Pattern::Text,
        Pattern::TextOffset,
        Pattern::Ui,
        Pattern::Icons,
        Pattern::Spreadsheet,
        Pattern::Code,
    ];

    /// Screen-content layouts used for the TIMD/E-TIMD comparison.
    pub const AB_SET: [Pattern; 5] =
        [Pattern::TextOffset, Pattern::Ui, Pattern::Icons, Pattern::Spreadsheet, Pattern::GlyphTile];

    pub fn name(self) -> &'static str {
        match self {
            Pattern::Constant => "constant",
            Pattern::Noise => "noise",
            Pattern::HStripes => "h-stripes",
            Pattern::VStripes => "v-stripes",
            Pattern::Diagonal => "diagonal",
            Pattern::Checkerboard => "checkerboard",
            Pattern::GlyphTile => "glyph-tile",
            Pattern::Text => "text",
            Pattern::TextOffset => "text-offset",
            Pattern::Ui => "ui",
            Pattern::Icons => "icons",
            Pattern::Spreadsheet => "spreadsheet",
            Pattern::Code => "code",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pattern {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown synthetic pattern '{s}'"))
    }
}

/// Binary glyph bitmap, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Glyph {
    pub w: usize,
    pub h: usize,
    pub bits: Vec<bool>,
}

impl Glyph {
    /// Stroke-like random glyph: a few horizontal and vertical bars plus
    /// scattered dots, leaving a one-pixel margin on the right and bottom.
    pub fn random(rng: &mut impl Rng, w: usize, h: usize) -> Glyph {
        let mut bits = vec![false; w * h];
        let (iw, ih) = (w - 1, h - 1);
        for _ in 0..rng.gen_range(2..=4) {
            if rng.gen_bool(0.5) {
                let y = rng.gen_range(0..ih);
                let (a, b) = (rng.gen_range(0..iw), rng.gen_range(0..iw));
                (a.min(b)..=a.max(b)).for_each(|x| bits[y * w + x] = true);
            } else {
                let x = rng.gen_range(0..iw);
                let (a, b) = (rng.gen_range(0..ih), rng.gen_range(0..ih));
                (a.min(b)..=a.max(b)).for_each(|y| bits[y * w + x] = true);
            }
        }
        for _ in 0..rng.gen_range(1..=3) {
            bits[rng.gen_range(0..ih) * w + rng.gen_range(0..iw)] = true;
        }
        Glyph { w, h, bits }
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.w + x]
    }
}

fn colors(rng: &mut impl Rng) -> (u16, u16) {
    let dark = rng.gen_bool(0.5);
    let (bg, fg) = (rng.gen_range(200..=245), rng.gen_range(10..=60));
    if dark { (fg, bg) } else { (bg, fg) }
}

/// 8-bit canvas later scaled to the requested depth.
struct Canvas {
    w: usize,
    h: usize,
    px: Vec<u16>,
}

impl Canvas {
    fn new(w: usize, h: usize, v: u16) -> Self {
        Canvas { w, h, px: vec![v; w * h] }
    }

    fn put(&mut self, x: usize, y: usize, v: u16) {
        if x < self.w && y < self.h {
            self.px[y * self.w + x] = v;
        }
    }

    fn fill(&mut self, x: usize, y: usize, w: usize, h: usize, v: u16) {
        for yy in y..y + h {
            for xx in x..x + w {
                self.put(xx, yy, v);
            }
        }
    }

    fn glyph(&mut self, g: &Glyph, x: usize, y: usize, fg: u16) {
        for gy in 0..g.h {
            for gx in 0..g.w {
                if g.get(gx, gy) {
                    self.put(x + gx, y + gy, fg);
                }
            }
        }
    }

    fn into_frame(self, bit_depth: u8) -> Frame {
        let shift = bit_depth.saturating_sub(8);
        let Canvas { w, h, px } = self;
        Frame::new(w, h, bit_depth, px.into_iter().map(|v| v.min(255) << shift).collect())
            .expect("canvas geometry")
    }
}

/// Generates `pattern` at `width`×`height`. Identical arguments give
/// identical frames.
pub fn generate(pattern: Pattern, width: usize, height: usize, bit_depth: u8, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Canvas::new(width, height, 128);
    match pattern {
        Pattern::Constant => c.px.fill(rng.gen_range(16..240)),
        Pattern::Noise => c.px.iter_mut().for_each(|p| *p = rng.gen_range(0..256)),
        Pattern::HStripes | Pattern::VStripes | Pattern::Diagonal => {
            let period = rng.gen_range(3..=8);
            let phase = rng.gen_range(0..period);
            let (lo, hi) = (rng.gen_range(0..100), rng.gen_range(150..256));
            let profile: Vec<u16> = (0..period).map(|i| if i * 2 < period { lo } else { hi }).collect();
            for y in 0..height {
                for x in 0..width {
                    let t = match pattern {
                        Pattern::HStripes => y,
                        Pattern::VStripes => x,
                        _ => x + y,
                    };
                    c.px[y * width + x] = profile[(t + phase) % period];
                }
            }
        }
        Pattern::Checkerboard => {
            let cell = rng.gen_range(2..=8);
            let (a, b) = colors(&mut rng);
            for y in 0..height {
                for x in 0..width {
                    c.px[y * width + x] = if (x / cell + y / cell) % 2 == 0 { a } else { b };
                }
            }
        }
        Pattern::GlyphTile => {
            let tile: Vec<u16> = (0..64).map(|_| rng.gen_range(0..256)).collect();
            for y in 0..height {
                for x in 0..width {
                    c.px[y * width + x] = tile[(y % 8) * 8 + x % 8];
                }
            }
        }
        Pattern::Text | Pattern::TextOffset => {
            let (cw, ch) = if pattern == Pattern::Text { (8, 8) } else { (6, 9) };
            let alphabet: Vec<Glyph> = (0..16).map(|_| Glyph::random(&mut rng, cw, ch)).collect();
            let words: Vec<Vec<usize>> = (0..12)
                .map(|_| (0..rng.gen_range(2..=6)).map(|_| rng.gen_range(0..alphabet.len())).collect())
                .collect();
            let (bg, fg) = colors(&mut rng);
            c.px.fill(bg);
            // words separated by one blank cell, wrapping across lines
            let (cols, rows) = (width.div_ceil(cw), height.div_ceil(ch));
            let mut cells = Vec::with_capacity(cols * rows);
            while cells.len() < cols * rows {
                cells.extend(words[rng.gen_range(0..words.len())].iter().map(|&g| Some(g)));
                cells.push(None);
            }
            for (i, cell) in cells.into_iter().take(cols * rows).enumerate() {
                if let Some(g) = cell {
                    c.glyph(&alphabet[g], (i % cols) * cw, (i / cols) * ch, fg);
                }
            }
        }
        Pattern::Ui => {
            let (bg, fg) = colors(&mut rng);
            let alphabet: Vec<Glyph> = (0..10).map(|_| Glyph::random(&mut rng, 6, 8)).collect();
            let face = rng.gen_range(150..200);
            c.px.fill(bg);
            let (bw, bh) = (40, 16);
            for by in (2..height).step_by(bh + 4) {
                for bx in (2..width).step_by(bw + 4) {
                    c.fill(bx, by, bw, bh, fg);
                    c.fill(bx + 1, by + 1, bw - 2, bh - 2, face);
                    for k in 0..5 {
                        let g = &alphabet[rng.gen_range(0..alphabet.len())];
                        c.glyph(g, bx + 5 + k * 6, by + 4, fg);
                    }
                }
            }
        }
        Pattern::Icons => {
            let (bg, _) = colors(&mut rng);
            c.px.fill(bg);
            let icons: Vec<Vec<u16>> = (0..4)
                .map(|_| {
                    let g = Glyph::random(&mut rng, 16, 16);
                    let (a, b) = (rng.gen_range(0..256), rng.gen_range(0..256));
                    (0..256).map(|i| if g.bits[i] { a } else { b }).collect()
                })
                .collect();
            for by in (0..height).step_by(20) {
                for bx in (0..width).step_by(20) {
                    let icon = &icons[rng.gen_range(0..icons.len())];
                    for y in 0..16 {
                        for x in 0..16 {
                            c.put(bx + x, by + y, icon[y * 16 + x]);
                        }
                    }
                }
            }
        }
        Pattern::Spreadsheet => {
            let (bg, fg) = colors(&mut rng);
            let digits: Vec<Glyph> = (0..10).map(|_| Glyph::random(&mut rng, 5, 7)).collect();
            c.px.fill(bg);
            let (cw, ch) = (32, 12);
            for y in (0..height).step_by(ch) {
                c.fill(0, y, width, 1, fg);
            }
            for x in (0..width).step_by(cw) {
                c.fill(x, 0, 1, height, fg);
            }
            for cy in (0..height).step_by(ch) {
                for cx in (0..width).step_by(cw) {
                    let n = rng.gen_range(2..=5);
                    for k in 0..n {
                        let g = &digits[rng.gen_range(0..digits.len())];
                        c.glyph(g, cx + cw - 2 - (n - k) * 5, cy + 3, fg);
                    }
                }
            }
        }
        Pattern::Code => {
            let bg = rng.gen_range(20..=40);
            let inks: Vec<u16> = (0..3).map(|_| rng.gen_range(120..=250)).collect();
            let alphabet: Vec<Glyph> = (0..20).map(|_| Glyph::random(&mut rng, 6, 9)).collect();
            let words: Vec<(Vec<usize>, u16)> = (0..10)
                .map(|i| {
                    let w = (0..rng.gen_range(2..=7)).map(|_| rng.gen_range(0..alphabet.len())).collect();
                    (w, inks[i % inks.len()])
                })
                .collect();
            c.px.fill(bg);
            let mut indent = 0usize;
            for line in 0..height / 11 {
                indent = match rng.gen_range(0..4) {
                    0 => indent.saturating_sub(1),
                    1 if indent < 4 => indent + 1,
                    _ => indent,
                };
                let mut col = indent * 4;
                for _ in 0..rng.gen_range(1..=6) {
                    let (w, ink) = &words[rng.gen_range(0..words.len())];
                    for &g in w {
                        c.glyph(&alphabet[g], col * 6, line * 11 + 1, *ink);
                        col += 1;
                    }
                    col += 1;
                }
            }
        }
    }
    c.into_frame(bit_depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_seed_sensitive() {
        for p in Pattern::ALL {
            let a = generate(p, 64, 48, 8, 7);
            assert_eq!(a, generate(p, 64, 48, 8, 7), "{p}");
            assert_eq!((a.width, a.height), (64, 48));
        }
        assert_ne!(generate(Pattern::Text, 64, 64, 8, 1), generate(Pattern::Text, 64, 64, 8, 2));
    }

    #[test]
    fn names_round_trip() {
        for p in Pattern::ALL {
            assert_eq!(p.name().parse::<Pattern>(), Ok(p));
        }
        assert!("wallpaper".parse::<Pattern>().is_err());
    }

    #[test]
    fn ten_bit_scales_samples() {
        let a = generate(Pattern::Noise, 16, 16, 8, 3);
        let b = generate(Pattern::Noise, 16, 16, 10, 3);
        assert!(a.samples.iter().zip(&b.samples).all(|(&x, &y)| y == x << 2));
    }

    #[test]
    fn glyph_tile_is_periodic() {
        let f = generate(Pattern::GlyphTile, 32, 32, 8, 9);
        for y in 0..32 {
            for x in 8..32 {
                assert_eq!(f.get(x, y), f.get(x - 8, y));
            }
        }
    }
}
