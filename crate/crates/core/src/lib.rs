//! Luma intra-prediction laboratory for template-based intra mode
//! derivation (TIMD), intra template matching (IntraTMP), and the enhanced
//! derivation (E-TIMD) that admits block-vector candidates into the fused
//! mode set.
//!
//! The crate is organised bottom-up:
//!
//! * [`pixel_io`]: raw frame loading and report serialization.
//! * [`block_grid`]: fixed-size raster partitioning and the causal
//!   reconstruction buffer every predictor reads from.
//! * [`intra`]: Planar, DC and the 65 angular predictors.
//! * [`cost`]: SAD and Hadamard SATD.
//! * [`tmp`]: Γ-shaped templates, template-matching search and BV copy.
//! * [`bvlist`]: spatial BV sampling and auto-relocated candidates.
//! * [`etimd`]: candidate costing, mode selection, weights and fusion.
//! * [`encoder`]: the per-block driver and the decoder-side replay.
//! * [`hog`] and [`transform`]: gradient-histogram transform selection.
//! * [`harness`]: experiment configuration, reports and A/B comparison.

pub mod block_grid;
pub mod bvlist;
pub mod cost;
pub mod encoder;
pub mod etimd;
pub mod fixtures;
pub mod harness;
pub mod hog;
pub mod intra;
pub mod pixel_io;
pub mod plane;
pub mod tmp;
pub mod transform;

pub use block_grid::{partition, BlockRef, GridError, ReconBuffer};
pub use bvlist::{BvList, BvStore, CodingRecord};
pub use cost::{Cost, Metric};
pub use etimd::{FusionSet, ModeCandidate, ModeKind};
pub use harness::{compare_runs, run_experiment, Report, RunConfig, Tool};
pub use intra::IntraMode;
pub use pixel_io::Frame;
pub use plane::{BlockView, PixelBlock, Rect};
pub use tmp::BlockVector;
