use crate::entropy::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::frame::validate_grid;
use crate::quantizer::MAX_QP;

use super::{EncoderConfig, Mode};

pub const MAGIC: &[u8; 4] = b"SPQ1";

/// Bits used for each per-CB QP field.
pub(crate) const QP_BITS: u32 = 6;

/// Fixed-length sequence header that follows the magic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceHeader {
    pub width: usize,
    pub height: usize,
    pub bit_depth: u32,
    pub fps: f64,
    pub ctu_size: usize,
    pub cu_size: usize,
    pub mode: Mode,
    pub base_qp: i32,
    pub gop: usize,
    pub frame_count: usize,
}

impl SequenceHeader {
    pub fn from_config(
        cfg: &EncoderConfig,
        width: usize,
        height: usize,
        bit_depth: u32,
        frame_count: usize,
    ) -> Result<Self> {
        if width > u16::MAX as usize || height > u16::MAX as usize {
            return Err(Error::Config(format!(
                "frame size {width}x{height} exceeds 65535"
            )));
        }
        if frame_count > u16::MAX as usize {
            return Err(Error::Config(format!("{frame_count} frames exceeds 65535")));
        }
        Ok(SequenceHeader {
            width,
            height,
            bit_depth,
            fps: cfg.fps,
            ctu_size: cfg.ctu_size,
            cu_size: cfg.cu_size,
            mode: cfg.mode,
            base_qp: cfg.base_qp,
            gop: cfg.gop,
            frame_count,
        })
    }

    pub fn write(&self, w: &mut BitWriter) {
        for &b in MAGIC {
            w.write_bits(b as u64, 8);
        }
        w.write_bits(self.width as u64, 16);
        w.write_bits(self.height as u64, 16);
        w.write_bits(self.bit_depth as u64, 4);
        w.write_bits(self.fps.to_bits(), 64);
        w.write_bits(self.ctu_size.trailing_zeros() as u64, 4);
        w.write_bits(self.cu_size.trailing_zeros() as u64, 4);
        w.write_bits(self.mode.code(), 2);
        w.write_bits(self.base_qp as u64, QP_BITS);
        w.write_bits(self.gop as u64, 16);
        w.write_bits(self.frame_count as u64, 16);
    }

    pub fn read(r: &mut BitReader<'_>) -> Result<Self> {
        let mut magic = [0u8; 4];
        for b in &mut magic {
            *b = r.read_bits(8)? as u8;
        }
        if &magic != MAGIC {
            return Err(Error::decode(0, format!("bad magic {magic:?}")));
        }
        let at = r.position();
        let width = r.read_bits(16)? as usize;
        let height = r.read_bits(16)? as usize;
        let bit_depth = r.read_bits(4)? as u32;
        let fps = f64::from_bits(r.read_bits(64)?);
        let ctu_size = 1usize << r.read_bits(4)?;
        let cu_size = 1usize << r.read_bits(4)?;
        let mode_code = r.read_bits(2)?;
        let base_qp = r.read_bits(QP_BITS)? as i32;
        let gop = r.read_bits(16)? as usize;
        let frame_count = r.read_bits(16)? as usize;

        let bad = |msg: String| Error::decode(at, msg);
        if width == 0 || height == 0 {
            return Err(bad(format!("invalid frame size {width}x{height}")));
        }
        if bit_depth != 8 && bit_depth != 10 {
            return Err(bad(format!("invalid bit depth {bit_depth}")));
        }
        if !(fps > 0.0) || !fps.is_finite() {
            return Err(bad(format!("invalid fps {fps}")));
        }
        validate_grid(ctu_size, cu_size).map_err(|e| bad(e.to_string()))?;
        let mode =
            Mode::from_code(mode_code).ok_or_else(|| bad(format!("invalid mode {mode_code}")))?;
        if base_qp > MAX_QP {
            return Err(bad(format!("base QP {base_qp} out of range")));
        }
        if gop == 0 {
            return Err(bad("gop length is zero".into()));
        }
        if frame_count == 0 {
            return Err(bad("frame count is zero".into()));
        }
        Ok(SequenceHeader {
            width,
            height,
            bit_depth,
            fps,
            ctu_size,
            cu_size,
            mode,
            base_qp,
            gop,
            frame_count,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let h = SequenceHeader {
            width: 100,
            height: 60,
            bit_depth: 10,
            fps: 29.97,
            ctu_size: 64,
            cu_size: 16,
            mode: Mode::AnchorAdaptiveQp,
            base_qp: 37,
            gop: 8,
            frame_count: 3,
        };
        let mut w = BitWriter::new();
        h.write(&mut w);
        let bytes = w.into_bytes();
        assert_eq!(&bytes[..4], MAGIC);
        assert_eq!(
            SequenceHeader::read(&mut BitReader::new(&bytes)).unwrap(),
            h
        );
    }

    #[test]
    fn corrupt_magic() {
        let mut bytes = vec![0u8; 32];
        bytes[..4].copy_from_slice(b"SPQ2");
        assert!(matches!(
            SequenceHeader::read(&mut BitReader::new(&bytes)),
            Err(Error::Decode { .. })
        ));
    }
}
