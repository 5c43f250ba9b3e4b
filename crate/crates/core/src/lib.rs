//! A desk-scale RGB 4:4:4 block codec with per-channel perceptual quantization.
//!
//! Samples are carried as planar G, B, R arrays. Every coding unit holds three
//! co-located coding blocks, one per channel, and each block may be quantized
//! at its own QP. Three quantization modes are supported:
//!
//! * [`Mode::AnchorFlat`]: the frame QP on every block.
//! * [`Mode::AnchorAdaptiveQp`]: a G-activity driven offset applied to the whole CU.
//! * [`Mode::SpectralPq`]: channel-asymmetric offsets driven by sub-block
//!   variance of each channel and by motion-vector magnitude.
//!
//! The bitstream is a self-describing exp-Golomb container (see
//! `docs/bitstream.md`), so rates measured by the [`bench`] harness are
//! the exact number of emitted bits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod colorimetry;
pub mod entropy;
pub mod error;
pub mod frame;
pub mod metrics;
pub mod motion;
pub mod perceptual;
pub mod pipeline;
pub mod quantizer;
pub mod transform;

pub use error::{Error, Result};
pub use frame::{BlockTree, Channel, Frame, Plane};
pub use pipeline::{decode_sequence, encode_sequence, EncoderConfig, Mode};
