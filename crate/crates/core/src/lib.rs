//! Intra-frame image coding with online-learned separable path graph transforms.
//!
//! Blocks are predicted with the four 16×16 intra predictors and their
//! residuals are coded with either a fixed DCT-II or a graph-based transform
//! (GBT) whose vertical and horizontal path graphs are learned on the fly.
//! Learning happens per cluster of similar blocks: a sequential K-means bank
//! groups blocks by their L-shaped template of previously reconstructed
//! pixels, and every cluster keeps running mean-square differences from which
//! path edge weights follow in closed form. The decoder replays the exact same
//! learning loop from reconstructed pixels, so the only side information is a
//! single flag bit per block.
//!
//! Module map:
//!
//! * [`transforms`]: path-graph Laplacians, deterministic eigensolvers, DCT/DST/KLT
//!   bases and separable 2D transforms.
//! * [`learning`]: templates, per-cluster statistics and the cluster bank.
//! * [`codec`]: prediction, quantization, entropy coding and the bitstream.
//! * [`eval`]: GMRF sampling, power spectral entropy, image metrics, BD-rate,
//!   GLNU and synthetic textures.
//! * [`image`]: 8-bit grayscale planes and binary PGM I/O.

pub mod codec;
pub mod error;
pub mod eval;
pub mod image;
pub mod learning;
pub mod transforms;

pub use error::{Error, Result};
