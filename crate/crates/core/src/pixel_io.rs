//! Raw frame input (binary PGM and planar YUV 4:2:0) and report output.
//!
//! Only the luma plane is kept. Chroma planes of YUV input are skipped by
//! offset arithmetic and never decoded.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::Report;
use crate::plane::{BlockView, PixelBlock};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("truncated input: need {needed} bytes, file has {available}")]
    Truncated { needed: u64, available: u64 },
    #[error("format error: {0}")]
    Format(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl IoError {
    fn io(path: &Path, source: io::Error) -> Self {
        IoError::Io { path: path.display().to_string(), source }
    }
}

/// A single luma plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u8,
    pub samples: Vec<u16>,
}

impl Frame {
    /// Builds a frame, masking every sample to `bit_depth` bits.
    pub fn new(width: usize, height: usize, bit_depth: u8, mut samples: Vec<u16>) -> Result<Self, IoError> {
        if !(8..=16).contains(&bit_depth) {
            return Err(IoError::Format(format!("unsupported bit depth {bit_depth}")));
        }
        if samples.len() != width * height {
            return Err(IoError::Format(format!(
                "sample count {} does not match {width}x{height}",
                samples.len()
            )));
        }
        let mask = sample_mask(bit_depth);
        samples.iter_mut().for_each(|s| *s &= mask);
        Ok(Frame { width, height, bit_depth, samples })
    }

    pub fn from_fn(width: usize, height: usize, bit_depth: u8, mut f: impl FnMut(usize, usize) -> u16) -> Self {
        let mask = sample_mask(bit_depth);
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y) & mask);
            }
        }
        Frame { width, height, bit_depth, samples }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.samples[y * self.width + x]
    }

    pub fn max_value(&self) -> u16 {
        sample_mask(self.bit_depth)
    }

    pub fn view(&self) -> BlockView<'_> {
        BlockView::new(&self.samples, self.width, self.width, self.height)
    }

    pub fn block(&self, x: usize, y: usize, w: usize, h: usize) -> PixelBlock {
        self.view().sub(x, y, w, h).to_block()
    }
}

pub fn sample_mask(bit_depth: u8) -> u16 {
    ((1u32 << bit_depth) - 1) as u16
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameFormat {
    YuvPlanar,
    Pgm,
}

impl FromStr for FrameFormat {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "yuv-planar" | "yuv" | "yuv420p" => Ok(FrameFormat::YuvPlanar),
            "pgm" => Ok(FrameFormat::Pgm),
            other => Err(IoError::Format(format!("unsupported format tag '{other}'"))),
        }
    }
}

impl fmt::Display for FrameFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameFormat::YuvPlanar => "yuv-planar",
            FrameFormat::Pgm => "pgm",
        })
    }
}

/// Size in bytes of one 4:2:0 frame (luma plus both chroma planes).
pub fn yuv420_frame_bytes(width: usize, height: usize, bit_depth: u8) -> u64 {
    let bytes_per_sample = if bit_depth > 8 { 2 } else { 1 };
    let chroma = width.div_ceil(2) * height.div_ceil(2);
    ((width * height + 2 * chroma) * bytes_per_sample) as u64
}

/// Loads the luma plane of frame `frame_index` from `path`.
///
/// PGM files carry their own geometry; when `width`/`height` are non-zero
/// they must agree with the header. Samples are masked to `bit_depth` for
/// both formats, so stray high bits in 16-bit containers never leak out.
pub fn load_frame(
    path: &Path,
    format: FrameFormat,
    width: usize,
    height: usize,
    bit_depth: u8,
    frame_index: usize,
) -> Result<Frame, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::io(path, e))?;
    match format {
        FrameFormat::YuvPlanar => decode_yuv420_luma(&bytes, width, height, bit_depth, frame_index),
        FrameFormat::Pgm => {
            if frame_index != 0 {
                return Err(IoError::Format("pgm input holds a single frame".into()));
            }
            let frame = decode_pgm(&bytes, bit_depth)?;
            if (width != 0 && width != frame.width) || (height != 0 && height != frame.height) {
                return Err(IoError::Format(format!(
                    "pgm is {}x{}, expected {width}x{height}",
                    frame.width, frame.height
                )));
            }
            Ok(frame)
        }
    }
}

pub fn decode_yuv420_luma(
    bytes: &[u8],
    width: usize,
    height: usize,
    bit_depth: u8,
    frame_index: usize,
) -> Result<Frame, IoError> {
    if width == 0 || height == 0 {
        return Err(IoError::Format("yuv input needs explicit non-zero dimensions".into()));
    }
    let frame_bytes = yuv420_frame_bytes(width, height, bit_depth);
    let offset = frame_index as u64 * frame_bytes;
    let needed = offset + frame_bytes;
    if (bytes.len() as u64) < needed {
        return Err(IoError::Truncated { needed, available: bytes.len() as u64 });
    }
    let luma = &bytes[offset as usize..];
    let n = width * height;
    let samples: Vec<u16> = if bit_depth > 8 {
        luma[..2 * n].chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect()
    } else {
        luma[..n].iter().map(|&b| b as u16).collect()
    };
    Frame::new(width, height, bit_depth, samples)
}

/// Parses a binary (P5) PGM. Maxval above 255 means big-endian 16-bit samples.
pub fn decode_pgm(bytes: &[u8], bit_depth: u8) -> Result<Frame, IoError> {
    let mut pos = 0usize;
    let mut fields = [0usize; 3];
    let magic = next_token(bytes, &mut pos).ok_or_else(|| IoError::Format("empty pgm".into()))?;
    if magic != b"P5" {
        return Err(IoError::Format("not a binary pgm (P5)".into()));
    }
    for field in fields.iter_mut() {
        let tok = next_token(bytes, &mut pos).ok_or_else(|| IoError::Format("short pgm header".into()))?;
        *field = std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| IoError::Format("bad pgm header field".into()))?;
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 65535 {
        return Err(IoError::Format(format!("bad pgm maxval {maxval}")));
    }
    let wide = maxval > 255;
    let n = width * height;
    let needed = (pos + if wide { 2 * n } else { n }) as u64;
    if (bytes.len() as u64) < needed {
        return Err(IoError::Truncated { needed, available: bytes.len() as u64 });
    }
    let raster = &bytes[pos..];
    let samples: Vec<u16> = if wide {
        raster[..2 * n].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        raster[..n].iter().map(|&b| b as u16).collect()
    };
    Frame::new(width, height, bit_depth, samples)
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

pub fn encode_pgm(frame: &Frame) -> Vec<u8> {
    let maxval = frame.max_value();
    let mut out = format!("P5\n{} {}\n{}\n", frame.width, frame.height, maxval).into_bytes();
    if maxval > 255 {
        out.extend(frame.samples.iter().flat_map(|s| s.to_be_bytes()));
    } else {
        out.extend(frame.samples.iter().map(|&s| s as u8));
    }
    out
}

pub fn write_pgm(frame: &Frame, path: &Path) -> Result<(), IoError> {
    fs::write(path, encode_pgm(frame)).map_err(|e| IoError::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(IoError::Format(format!("unsupported report format '{other}'"))),
        }
    }
}

/// Serializes a report. JSON holds the full report; CSV holds one row per
/// block. Field order is fixed by the record types, so identical reports
/// always produce identical bytes.
pub fn write_report(report: &Report, path: &Path, format: ReportFormat) -> Result<(), IoError> {
    let bytes = render_report(report, format)?;
    fs::write(path, bytes).map_err(|e| IoError::io(path, e))
}

pub fn render_report(report: &Report, format: ReportFormat) -> Result<Vec<u8>, IoError> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report)?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(crate::harness::CSV_HEADER)?;
            for frame in &report.frames {
                for rec in &frame.blocks {
                    w.write_record(rec.csv_row(frame.frame_index))?;
                }
            }
            w.flush().map_err(|e| IoError::Io { path: "<buffer>".into(), source: e })?;
            w.into_inner().map_err(|e| IoError::Format(e.to_string()))
        }
    }
}

pub fn read_report(path: &Path) -> Result<Report, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_two_by_two_is_a_direct_byte_copy() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0, 255, 10, 20]);
        let f = decode_pgm(&bytes, 8).unwrap();
        assert_eq!((f.width, f.height, f.bit_depth), (2, 2, 8));
        assert_eq!(f.samples, vec![0, 255, 10, 20]);
    }

    #[test]
    fn pgm_header_comments_are_skipped() {
        let mut bytes = b"P5 # made by hand\n2 1\n# maxval follows\n255\n".to_vec();
        bytes.extend([7, 9]);
        assert_eq!(decode_pgm(&bytes, 8).unwrap().samples, vec![7, 9]);
    }

    #[test]
    fn yuv_frame_offsets_follow_the_420_layout() {
        // Hand layout for 16x16: luma 256 + 2 chroma planes of 8x8 = 384
        // bytes per 8-bit frame, 768 per 10-bit frame; odd sizes round the
        // chroma plane up.
        let table = [
            (16, 16, 8, 384u64),
            (16, 16, 10, 768),
            (2, 2, 8, 6),
            (3, 3, 8, 9 + 2 * 4),
            (20, 16, 8, 320 + 2 * 80),
        ];
        for (w, h, d, expected) in table {
            assert_eq!(yuv420_frame_bytes(w, h, d), expected, "{w}x{h}@{d}");
        }

        let mut bytes = vec![0u8; 384 * 2];
        for (i, b) in bytes[384..384 + 256].iter_mut().enumerate() {
            *b = (i % 251) as u8;
        }
        let f = decode_yuv420_luma(&bytes, 16, 16, 8, 1).unwrap();
        assert_eq!(f.samples[0], 0);
        assert_eq!(f.samples[255], (255 % 251) as u16);
    }

    #[test]
    fn frame_index_past_eof_is_truncated() {
        let bytes = vec![0u8; 384];
        let err = decode_yuv420_luma(&bytes, 16, 16, 8, 1).unwrap_err();
        assert!(matches!(err, IoError::Truncated { needed: 768, available: 384 }));
    }

    #[test]
    fn ten_bit_samples_are_masked() {
        let n = 4;
        let mut bytes = vec![0u8; yuv420_frame_bytes(2, 2, 10) as usize];
        for i in 0..n {
            bytes[2 * i..2 * i + 2].copy_from_slice(&0xffffu16.to_le_bytes());
        }
        bytes[0..2].copy_from_slice(&0x0123u16.to_le_bytes());
        let f = decode_yuv420_luma(&bytes, 2, 2, 10, 0).unwrap();
        assert_eq!(f.samples, vec![0x123, 0x3ff, 0x3ff, 0x3ff]);
    }

    #[test]
    fn unknown_format_tag_is_rejected() {
        assert!(matches!("mp4".parse::<FrameFormat>(), Err(IoError::Format(_))));
        assert_eq!("pgm".parse::<FrameFormat>().unwrap(), FrameFormat::Pgm);
    }

    #[test]
    fn pgm_geometry_mismatch_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.pgm");
        let frame = Frame::from_fn(4, 3, 8, |x, y| (x * 10 + y) as u16);
        write_pgm(&frame, &path).unwrap();
        assert_eq!(load_frame(&path, FrameFormat::Pgm, 4, 3, 8, 0).unwrap(), frame);
        assert_eq!(load_frame(&path, FrameFormat::Pgm, 0, 0, 8, 0).unwrap(), frame);
        assert!(matches!(load_frame(&path, FrameFormat::Pgm, 5, 3, 8, 0), Err(IoError::Format(_))));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_frame(Path::new("/nonexistent/x.pgm"), FrameFormat::Pgm, 0, 0, 8, 0).unwrap_err();
        assert!(matches!(err, IoError::Io { .. }));
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pgm_round_trips(w in 1usize..12, h in 1usize..12, depth in prop::sample::select(vec![8u8, 10]), seed in any::<u64>()) {
                let mask = sample_mask(depth) as u64;
                let frame = Frame::from_fn(w, h, depth, |x, y| {
                    ((seed.wrapping_mul(31).wrapping_add((x * 131 + y * 7) as u64)) & mask) as u16
                });
                let back = decode_pgm(&encode_pgm(&frame), depth).unwrap();
                prop_assert_eq!(back, frame);
            }

            #[test]
            fn loaded_samples_respect_the_mask(raw in prop::collection::vec(any::<u8>(), 12)) {
                // 2x2 10-bit frame with arbitrary (possibly malformed) high bytes
                let f = decode_yuv420_luma(&raw, 2, 2, 10, 0).unwrap();
                prop_assert!(f.samples.iter().all(|&s| s < 1024));
            }
        }
    }
}
