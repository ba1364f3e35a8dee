//! Histogram of gradients over a predictor block and its dominant
//! prediction direction.

use serde::{Deserialize, Serialize};

use crate::etimd::FusionSet;
use crate::intra::{IntraMode, PRED_ANGLE};
use crate::plane::{BlockView, PixelBlock};

/// 3×3 Sobel responses centred on `(x, y)`: horizontal and vertical
/// derivative, with y growing downwards.
pub fn sobel_window(block: BlockView<'_>, x: usize, y: usize) -> (i32, i32) {
    let p = |dx: usize, dy: usize| block.get(x + dx - 1, y + dy - 1) as i32;
    let gh = (p(2, 0) + 2 * p(2, 1) + p(2, 2)) - (p(0, 0) + 2 * p(0, 1) + p(0, 2));
    let gv = (p(0, 2) + 2 * p(1, 2) + p(2, 2)) - (p(0, 0) + 2 * p(1, 0) + p(2, 0));
    (gh, gv)
}

/// Direction of an angular mode's prediction line as an integer vector.
fn mode_direction(m: u8) -> (i64, i64) {
    let a = PRED_ANGLE[(m - 2) as usize] as i64;
    if m >= 34 {
        (a, -32)
    } else {
        (-32, a)
    }
}

/// Angular mode whose prediction line is closest to the edge through a
/// gradient `(gh, gv)`. The edge runs perpendicular to the gradient. Equal
/// distances go to the lower mode index.
pub fn orientation_to_mode(gh: i32, gv: i32) -> Option<IntraMode> {
    if gh == 0 && gv == 0 {
        return None;
    }
    let (ex, ey) = (-(gv as i64), gh as i64);
    // minimise sin² = cross² / (|e|²|d|²); |e| is common, so compare
    // cross²/|d|² by cross-multiplication
    let score = |m: u8| {
        let (dx, dy) = mode_direction(m);
        let cross = (ex * dy - ey * dx) as i128;
        (cross * cross, (dx * dx + dy * dy) as i128)
    };
    let mut best = 2u8;
    let (mut bn, mut bd) = score(2);
    for m in 3..=66u8 {
        let (n, d) = score(m);
        if n * bd < bn * d {
            best = m;
            (bn, bd) = (n, d);
        }
    }
    IntraMode::angular(best)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HogWeighting {
    /// One count per window.
    #[default]
    Frequency,
    /// `|gh| + |gv|` per window.
    Magnitude,
}

impl std::str::FromStr for HogWeighting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frequency" => Ok(HogWeighting::Frequency),
            "magnitude" => Ok(HogWeighting::Magnitude),
            other => Err(format!("unknown HoG weighting '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hog {
    bins: [u64; 65],
}

impl Default for Hog {
    fn default() -> Self {
        Hog { bins: [0; 65] }
    }
}

impl Hog {
    pub fn bin(&self, mode: IntraMode) -> u64 {
        if mode.is_angular() { self.bins[(mode.index() - 2) as usize] } else { 0 }
    }

    pub fn add(&mut self, mode: IntraMode, amount: u64) {
        self.bins[(mode.index() - 2) as usize] += amount;
    }

    pub fn bins(&self) -> &[u64; 65] {
        &self.bins
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }
}

/// Slides the Sobel window over every interior position (stride 1).
pub fn build_hog(block: BlockView<'_>, weighting: HogWeighting) -> Hog {
    let mut hog = Hog::default();
    let (w, h) = (block.width(), block.height());
    if w < 3 || h < 3 {
        return hog;
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let (gh, gv) = sobel_window(block, x, y);
            if let Some(m) = orientation_to_mode(gh, gv) {
                let amount = match weighting {
                    HogWeighting::Frequency => 1,
                    HogWeighting::Magnitude => (gh.unsigned_abs() + gv.unsigned_abs()) as u64,
                };
                hog.add(m, amount);
            }
        }
    }
    hog
}

/// Peak bin, lowest mode on ties; `None` for an empty histogram.
pub fn dominant_mode(hog: &Hog) -> Option<IntraMode> {
    let (i, &peak) = hog.bins.iter().enumerate().rev().max_by_key(|(_, &v)| v)?;
    (peak > 0).then(|| IntraMode::angular(i as u8 + 2).expect("bin index"))
}

/// The (up to two) modes driving transform selection: the first two fusion
/// modes, with block vectors replaced by the dominant HoG direction of their
/// predictor (Planar when it has no gradient).
///
/// `predictions` holds each fusion mode's block prediction in set order.
pub fn transform_modes(fusion: &FusionSet, predictions: &[PixelBlock], weighting: HogWeighting) -> Vec<IntraMode> {
    fusion
        .modes()
        .iter()
        .zip(predictions)
        .take(2)
        .map(|(m, pred)| match m.kind.intra_mode() {
            Some(mode) => mode,
            None => dominant_mode(&build_hog(pred.view(), weighting)).unwrap_or(IntraMode::PLANAR),
        })
        .collect()
}
