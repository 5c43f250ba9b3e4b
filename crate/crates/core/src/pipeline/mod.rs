//! Closed-loop encoder and decoder.
//!
//! Frames are coded IPPP: frame 0 and every `gop`-th frame after it are intra
//! (DC prediction per CB), the rest are predicted from the previous
//! reconstruction with one full-pel vector per CU found on the G plane. Each CB
//! is transformed, quantized at its own QP, exp-Golomb coded, and
//! reconstructed exactly as the decoder will reconstruct it.

mod container;
mod decoder;
mod encoder;

pub use container::{SequenceHeader, MAGIC};
pub use decoder::{decode_sequence, decode_sequence_detailed, DecodedFrame, DecodedSequence};
pub use encoder::{encode_sequence, EncodeOutput, FrameStats};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frame::{validate_grid, Plane};
use crate::perceptual::PerceptualConstants;
use crate::quantizer::{QuantParams, MAX_QP};
use crate::transform::{self, TransformSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Frame QP on every CB.
    AnchorFlat,
    /// G-activity offset applied to all three CBs of a CU.
    AnchorAdaptiveQp,
    /// Per-channel spatial, temporal and spectral offsets.
    SpectralPq,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::AnchorFlat, Mode::AnchorAdaptiveQp, Mode::SpectralPq];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::AnchorFlat => "anchor-flat",
            Mode::AnchorAdaptiveQp => "anchor-adaptiveqp",
            Mode::SpectralPq => "spectral-pq",
        }
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            Mode::AnchorFlat => 0,
            Mode::AnchorAdaptiveQp => 1,
            Mode::SpectralPq => 2,
        }
    }

    pub(crate) fn from_code(code: u64) -> Option<Mode> {
        match code {
            0 => Some(Mode::AnchorFlat),
            1 => Some(Mode::AnchorAdaptiveQp),
            2 => Some(Mode::SpectralPq),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    pub base_qp: i32,
    pub mode: Mode,
    pub rdoq: bool,
    /// Intra period; frame `i` is intra when `i % gop == 0`.
    pub gop: usize,
    pub ctu_size: usize,
    pub cu_size: usize,
    pub search_range: i32,
    pub fps: f64,
    pub constants: PerceptualConstants,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            base_qp: 27,
            mode: Mode::SpectralPq,
            rdoq: true,
            gop: 30,
            ctu_size: 64,
            cu_size: 32,
            search_range: 16,
            fps: 30.0,
            constants: PerceptualConstants::default(),
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0..=MAX_QP).contains(&self.base_qp) {
            return Err(Error::Config(format!(
                "base QP {} outside [0, {MAX_QP}]",
                self.base_qp
            )));
        }
        if self.gop == 0 || self.gop > u16::MAX as usize {
            return Err(Error::Config(format!("gop length {} invalid", self.gop)));
        }
        if self.ctu_size > 1 << 15 {
            return Err(Error::Config(format!(
                "ctu size {} too large",
                self.ctu_size
            )));
        }
        validate_grid(self.ctu_size, self.cu_size)?;
        if self.search_range < 0 {
            return Err(Error::Config("search range must be non-negative".into()));
        }
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return Err(Error::Config(format!("fps {} must be positive", self.fps)));
        }
        Ok(())
    }

    pub fn is_intra(&self, frame_index: usize) -> bool {
        frame_index.is_multiple_of(self.gop)
    }
}

/// DC intra prediction: the rounded mean of the reconstructed row above and
/// column left of the block, or mid-grey when neither exists.
pub fn intra_predict_dc(
    recon: &Plane,
    x: usize,
    y: usize,
    size: usize,
    bit_depth: u32,
) -> Vec<u16> {
    let mut sum = 0u64;
    let mut count = 0u64;
    if y > 0 {
        sum += recon.row(y - 1)[x..x + size]
            .iter()
            .map(|&v| v as u64)
            .sum::<u64>();
        count += size as u64;
    }
    if x > 0 {
        sum += (y..y + size)
            .map(|r| recon.get(x - 1, r) as u64)
            .sum::<u64>();
        count += size as u64;
    }
    let dc = (sum + count / 2)
        .checked_div(count)
        .unwrap_or(1u64 << (bit_depth - 1));
    vec![dc as u16; size * size]
}

/// Motion-compensated prediction: the reference block displaced by `-v`.
pub(crate) fn inter_predict(
    reference: &Plane,
    x: usize,
    y: usize,
    size: usize,
    vx: i32,
    vy: i32,
) -> Option<Vec<u16>> {
    let rx = x as i64 - vx as i64;
    let ry = y as i64 - vy as i64;
    if rx < 0
        || ry < 0
        || rx as usize + size > reference.width
        || ry as usize + size > reference.height
    {
        return None;
    }
    Some(reference.block(rx as usize, ry as usize, size))
}

/// Inverse quantization, inverse transform, and clipping to sample range.
/// Shared by encoder and decoder so both produce identical samples.
pub(crate) fn reconstruct(
    pred: &[u16],
    levels: &[i32],
    params: &QuantParams,
    spec: &TransformSpec,
    max_sample: u16,
) -> Result<Vec<u16>> {
    if levels.iter().all(|&l| l == 0) {
        return Ok(pred.to_vec());
    }
    let coeffs: Vec<i32> = levels.iter().map(|&l| params.dequantize(l)).collect();
    let residual = transform::inverse(&coeffs, spec)?;
    Ok(pred
        .iter()
        .zip(&residual)
        .map(|(&p, &r)| (p as i32 + r).clamp(0, max_sample as i32) as u16)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_without_neighbours_is_mid_level() {
        let p = Plane::new(16, 16);
        assert!(intra_predict_dc(&p, 0, 0, 8, 8).iter().all(|&v| v == 128));
        assert!(intra_predict_dc(&p, 0, 0, 8, 10).iter().all(|&v| v == 512));
    }

    #[test]
    fn dc_is_mean_of_top_and_left() {
        let mut p = Plane::new(16, 16);
        for x in 0..16 {
            p.set(x, 7, 100);
        }
        for y in 0..16 {
            p.set(7, y, 60);
        }
        // top row at y=7 spans x 8..16 (all 100), left column at x=7 spans y 8..16 (60)
        assert!(intra_predict_dc(&p, 8, 8, 8, 8).iter().all(|&v| v == 80));
    }

    #[test]
    fn dc_on_constant_neighbourhood() {
        let p = Plane::filled(32, 32, 77);
        let pred = intra_predict_dc(&p, 16, 8, 8, 8);
        assert!(pred.iter().all(|&v| v == 77));
        let src = [77u16; 64];
        assert!(src.iter().zip(&pred).all(|(a, b)| a == b));
    }

    #[test]
    fn mode_parsing() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
            assert_eq!(Mode::from_code(m.code()), Some(m));
        }
        assert!("bogus".parse::<Mode>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(EncoderConfig::default().validate().is_ok());
        let bad = [
            EncoderConfig {
                base_qp: 52,
                ..Default::default()
            },
            EncoderConfig {
                gop: 0,
                ..Default::default()
            },
            EncoderConfig {
                cu_size: 4,
                ..Default::default()
            },
            EncoderConfig {
                fps: 0.0,
                ..Default::default()
            },
            EncoderConfig {
                search_range: -1,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
