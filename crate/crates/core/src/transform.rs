//! Mode-class separable transforms used to measure energy compaction.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intra::IntraMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kernel {
    Dct2,
    Dst7,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TransformClass {
    Dc0,
    H,
    D,
    V,
}

impl TransformClass {
    /// (horizontal, vertical) kernels.
    pub fn kernels(self) -> (Kernel, Kernel) {
        match self {
            TransformClass::Dc0 => (Kernel::Dct2, Kernel::Dct2),
            TransformClass::H => (Kernel::Dst7, Kernel::Dct2),
            TransformClass::D => (Kernel::Dst7, Kernel::Dst7),
            TransformClass::V => (Kernel::Dct2, Kernel::Dst7),
        }
    }

    pub const ALL: [TransformClass; 4] = [TransformClass::Dc0, TransformClass::H, TransformClass::D, TransformClass::V];
}

impl fmt::Display for TransformClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformClass::Dc0 => "DC0",
            TransformClass::H => "H",
            TransformClass::D => "D",
            TransformClass::V => "V",
        })
    }
}

pub fn transform_class(mode: IntraMode) -> TransformClass {
    match mode.index() {
        0 | 1 => TransformClass::Dc0,
        2..=33 => TransformClass::H,
        34 => TransformClass::D,
        _ => TransformClass::V,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("unsupported transform size {0}x{1}")]
    Size(usize, usize),
    #[error("residual has {got} samples, expected {expected}")]
    Length { expected: usize, got: usize },
}

pub const TRANSFORM_SIZES: [usize; 4] = [4, 8, 16, 32];

/// Orthonormal `n`×`n` basis, row `k` holding the k-th basis function.
pub fn kernel_matrix(kernel: Kernel, n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut m = vec![0.0; n * n];
    for k in 0..n {
        for i in 0..n {
            let (kf, fi) = (k as f64, i as f64);
            m[k * n + i] = match kernel {
                Kernel::Dct2 => {
                    let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
                    scale * (PI * (2.0 * fi + 1.0) * kf / (2.0 * nf)).cos()
                }
                Kernel::Dst7 => {
                    (4.0 / (2.0 * nf + 1.0)).sqrt() * (PI * (2.0 * fi + 1.0) * (kf + 1.0) / (2.0 * nf + 1.0)).sin()
                }
            };
        }
    }
    m
}

/// Coefficients `Kv · R · Khᵀ` of a `w`×`h` residual (row-major), laid out
/// with horizontal frequency along rows.
pub fn apply_transform(residual: &[i32], w: usize, h: usize, class: TransformClass) -> Result<Vec<f64>, TransformError> {
    if !TRANSFORM_SIZES.contains(&w) || !TRANSFORM_SIZES.contains(&h) {
        return Err(TransformError::Size(w, h));
    }
    if residual.len() != w * h {
        return Err(TransformError::Length { expected: w * h, got: residual.len() });
    }
    let (kh, kv) = class.kernels();
    let (mh, mv) = (kernel_matrix(kh, w), kernel_matrix(kv, h));
    // rows first: T[y][u] = Σx R[y][x] Kh[u][x]
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for u in 0..w {
            tmp[y * w + u] = (0..w).map(|x| residual[y * w + x] as f64 * mh[u * w + x]).sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for v in 0..h {
        for u in 0..w {
            out[v * w + u] = (0..h).map(|y| mv[v * h + y] * tmp[y * w + u]).sum();
        }
    }
    Ok(out)
}

/// Positions `(u, v)` in diagonal scan: by `u + v`, then by `v`.
pub fn diagonal_scan(w: usize, h: usize) -> Vec<(usize, usize)> {
    let mut pos: Vec<(usize, usize)> = (0..h).flat_map(|v| (0..w).map(move |u| (u, v))).collect();
    pos.sort_by_key(|&(u, v)| (u + v, v));
    pos
}

/// Share of energy in the first `k` coefficients of the diagonal scan; 1
/// for an all-zero block.
pub fn energy_compaction(coeffs: &[f64], w: usize, h: usize, k: usize) -> f64 {
    let total: f64 = coeffs.iter().map(|c| c * c).sum();
    if total == 0.0 {
        return 1.0;
    }
    let head: f64 = diagonal_scan(w, h).into_iter().take(k).map(|(u, v)| coeffs[v * w + u].powi(2)).sum();
    head / total
}
