//! SAD and Hadamard SATD kernels.
//!
//! SATD tiles the difference with 8×8 Hadamard blocks when both dimensions
//! are at least 8, then covers what is left with 4×4 blocks, and finally
//! with plain absolute differences for strips thinner than 4. Coefficient
//! sums are normalised by 2 (4×4) or 4 (8×8) with rounding.

use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plane::BlockView;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cost(pub u64);

impl Cost {
    pub const ZERO: Cost = Cost(0);
    pub const MAX: Cost = Cost(u64::MAX);
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0.saturating_add(rhs.0))
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("shape mismatch: {0:?} vs {1:?}")]
pub struct ShapeMismatch(pub (usize, usize), pub (usize, usize));

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Sad,
    #[default]
    Satd,
}

impl Metric {
    pub fn cost(self, a: BlockView<'_>, b: BlockView<'_>) -> Result<Cost, ShapeMismatch> {
        match self {
            Metric::Sad => sad(a, b),
            Metric::Satd => satd(a, b),
        }
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sad" => Ok(Metric::Sad),
            "satd" => Ok(Metric::Satd),
            other => Err(format!("unknown metric '{other}'")),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Sad => "sad",
            Metric::Satd => "satd",
        })
    }
}

fn check(a: &BlockView<'_>, b: &BlockView<'_>) -> Result<(), ShapeMismatch> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(ShapeMismatch((a.width(), a.height()), (b.width(), b.height())));
    }
    Ok(())
}

pub fn sad(a: BlockView<'_>, b: BlockView<'_>) -> Result<Cost, ShapeMismatch> {
    check(&a, &b)?;
    Ok(Cost(sad_unchecked(a, b)))
}

fn sad_unchecked(a: BlockView<'_>, b: BlockView<'_>) -> u64 {
    let mut total = 0u64;
    for y in 0..a.height() {
        total += a
            .row(y)
            .iter()
            .zip(b.row(y))
            .map(|(&p, &q)| (p as i32 - q as i32).unsigned_abs() as u64)
            .sum::<u64>();
    }
    total
}

pub fn satd(a: BlockView<'_>, b: BlockView<'_>) -> Result<Cost, ShapeMismatch> {
    check(&a, &b)?;
    Ok(Cost(satd_region(a, b)))
}

fn satd_region(a: BlockView<'_>, b: BlockView<'_>) -> u64 {
    let (w, h) = (a.width(), a.height());
    if w == 0 || h == 0 {
        return 0;
    }
    let n = if w >= 8 && h >= 8 {
        8
    } else if w >= 4 && h >= 4 {
        4
    } else {
        return sad_unchecked(a, b);
    };
    let (wt, ht) = (w - w % n, h - h % n);
    let mut total = 0u64;
    for ty in (0..ht).step_by(n) {
        for tx in (0..wt).step_by(n) {
            total += if n == 8 {
                hadamard_8x8(a.sub(tx, ty, 8, 8), b.sub(tx, ty, 8, 8))
            } else {
                hadamard_4x4(a.sub(tx, ty, 4, 4), b.sub(tx, ty, 4, 4))
            };
        }
    }
    // right strip beside the tiled area, then the full-width bottom strip
    total += satd_region(a.sub(wt, 0, w - wt, ht), b.sub(wt, 0, w - wt, ht));
    total += satd_region(a.sub(0, ht, w, h - ht), b.sub(0, ht, w, h - ht));
    total
}

#[inline]
fn butterfly4(v: [i32; 4]) -> [i32; 4] {
    let (s0, d0) = (v[0] + v[1], v[0] - v[1]);
    let (s1, d1) = (v[2] + v[3], v[2] - v[3]);
    [s0 + s1, d0 + d1, s0 - s1, d0 - d1]
}

fn hadamard_4x4(a: BlockView<'_>, b: BlockView<'_>) -> u64 {
    let mut m = [[0i32; 4]; 4];
    for (y, row) in m.iter_mut().enumerate() {
        let (ra, rb) = (a.row(y), b.row(y));
        *row = butterfly4([
            ra[0] as i32 - rb[0] as i32,
            ra[1] as i32 - rb[1] as i32,
            ra[2] as i32 - rb[2] as i32,
            ra[3] as i32 - rb[3] as i32,
        ]);
    }
    let mut sum = 0u64;
    for x in 0..4 {
        let col = butterfly4([m[0][x], m[1][x], m[2][x], m[3][x]]);
        sum += col.iter().map(|c| c.unsigned_abs() as u64).sum::<u64>();
    }
    (sum + 1) >> 1
}

#[inline]
fn butterfly8(v: [i32; 8]) -> [i32; 8] {
    let lo = butterfly4([v[0] + v[4], v[1] + v[5], v[2] + v[6], v[3] + v[7]]);
    let hi = butterfly4([v[0] - v[4], v[1] - v[5], v[2] - v[6], v[3] - v[7]]);
    [lo[0], lo[1], lo[2], lo[3], hi[0], hi[1], hi[2], hi[3]]
}

fn hadamard_8x8(a: BlockView<'_>, b: BlockView<'_>) -> u64 {
    let mut m = [[0i32; 8]; 8];
    for (y, row) in m.iter_mut().enumerate() {
        let (ra, rb) = (a.row(y), b.row(y));
        let mut d = [0i32; 8];
        for x in 0..8 {
            d[x] = ra[x] as i32 - rb[x] as i32;
        }
        *row = butterfly8(d);
    }
    let mut sum = 0u64;
    for x in 0..8 {
        let col = butterfly8([m[0][x], m[1][x], m[2][x], m[3][x], m[4][x], m[5][x], m[6][x], m[7][x]]);
        sum += col.iter().map(|c| c.unsigned_abs() as u64).sum::<u64>();
    }
    (sum + 2) >> 2
}
