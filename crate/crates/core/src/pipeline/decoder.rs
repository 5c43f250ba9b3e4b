use crate::entropy::{decode_block, BitReader};
use crate::error::{Error, Result};
use crate::frame::{max_sample, partition_dims, Channel, Frame};
use crate::motion::MotionVector;
use crate::perceptual::PerceptualConstants;
use crate::quantizer::{quant_params, QuantParams, MAX_QP};
use crate::transform::TransformSpec;

use super::container::{SequenceHeader, QP_BITS};
use super::{inter_predict, intra_predict_dc, reconstruct, Mode};

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedFrame {
    pub intra: bool,
    /// QP per CU as read from the stream, indexed by channel.
    pub qps: Vec<[i32; 3]>,
    /// Motion vector per CU; empty on intra frames.
    pub vectors: Vec<MotionVector>,
    /// Reconstruction cropped to the sequence size.
    pub frame: Frame,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedSequence {
    pub header: SequenceHeader,
    pub frames: Vec<DecodedFrame>,
}

impl DecodedSequence {
    pub fn into_frames(self) -> Vec<Frame> {
        self.frames.into_iter().map(|f| f.frame).collect()
    }

    /// Checks every coded QP against the rules of the header's mode. Returns
    /// the first violation.
    pub fn audit_qps(&self, k: &PerceptualConstants) -> Result<()> {
        let base = self.header.base_qp;
        for (fi, f) in self.frames.iter().enumerate() {
            for (cu, qps) in f.qps.iter().enumerate() {
                let fail =
                    |msg: String| Err(Error::Structural(format!("frame {fi}, CU {cu}: {msg}")));
                match self.header.mode {
                    Mode::AnchorFlat => {
                        if qps.iter().any(|&q| q != base) {
                            return fail(format!("QPs {qps:?} differ from frame QP {base}"));
                        }
                    }
                    Mode::AnchorAdaptiveQp => {
                        let lo = (base - 6).max(0);
                        let hi = (base + 6).min(MAX_QP);
                        if qps[0] != qps[1] || qps[0] != qps[2] || !(lo..=hi).contains(&qps[0]) {
                            return fail(format!("QPs {qps:?} are not one offset in [-6, 6]"));
                        }
                    }
                    Mode::SpectralPq => {
                        for c in Channel::ALL {
                            let (lo, hi) = k.offset_range(c);
                            let q = qps[c.index()];
                            let (lo, hi) = ((base + lo).min(MAX_QP), (base + hi).min(MAX_QP));
                            if !(lo..=hi).contains(&q) {
                                return fail(format!("{} QP {q} outside [{lo}, {hi}]", c.name()));
                            }
                        }
                        if qps[1] < qps[0] || qps[2] < qps[0] {
                            return fail(format!("B or R QP below G in {qps:?}"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Decodes an SPQ1 bitstream into frames.
pub fn decode_sequence(bytes: &[u8]) -> Result<Vec<Frame>> {
    Ok(decode_sequence_detailed(bytes)?.into_frames())
}

/// Decodes an SPQ1 bitstream, keeping the QPs and vectors read for each CU.
pub fn decode_sequence_detailed(bytes: &[u8]) -> Result<DecodedSequence> {
    let mut r = BitReader::new(bytes);
    let header = SequenceHeader::read(&mut r)?;
    let cu_count = header.width.div_ceil(header.ctu_size)
        * header.height.div_ceil(header.ctu_size)
        * (header.ctu_size / header.cu_size).pow(2);
    // every CU costs at least 18 QP bits and three 1-bit blocks
    let min_frame_bits = cu_count * (3 * QP_BITS as usize + 3);
    if r.remaining() / min_frame_bits < header.frame_count {
        return Err(Error::decode(
            r.position(),
            format!(
                "{} bits cannot hold {} frames of {cu_count} CUs",
                r.remaining(),
                header.frame_count,
            ),
        ));
    }
    let tree = partition_dims(header.width, header.height, header.ctu_size, header.cu_size)
        .map_err(|e| Error::decode(r.position(), e.to_string()))?;
    let n = header.cu_size;
    let bd = header.bit_depth;
    let max = max_sample(bd);

    let mut params: Vec<Option<QuantParams>> = vec![None; MAX_QP as usize + 1];
    let intra_spec = TransformSpec::for_block(n, true)?;
    let inter_spec = TransformSpec::for_block(n, false)?;

    let mut frames: Vec<DecodedFrame> = Vec::with_capacity(header.frame_count);
    let mut reference: Option<Frame> = None;

    for fi in 0..header.frame_count {
        let intra = r.read_bit()?;
        if !intra && reference.is_none() {
            return Err(Error::decode(
                r.position() - 1,
                format!("frame {fi} is inter but has no reference"),
            ));
        }
        let spec = if intra { &intra_spec } else { &inter_spec };
        let mut recon = Frame::new(tree.padded_width, tree.padded_height, bd)?;
        let mut qps = Vec::with_capacity(tree.len());
        let mut vectors = Vec::new();

        for cu in &tree.cus {
            let mut cu_qp = [0i32; 3];
            for q in &mut cu_qp {
                let at = r.position();
                *q = r.read_bits(QP_BITS)? as i32;
                if *q > MAX_QP {
                    return Err(Error::decode(at, format!("QP {q} exceeds {MAX_QP}")));
                }
            }
            let mv = if intra {
                MotionVector::ZERO
            } else {
                let v = MotionVector::new(r.read_se()?, r.read_se()?);
                vectors.push(v);
                v
            };
            for c in Channel::ALL {
                let qp = cu_qp[c.index()];
                let p = match &mut params[qp as usize] {
                    Some(p) => *p,
                    slot => *slot.insert(quant_params(qp, n)?),
                };
                let pred = if intra {
                    intra_predict_dc(recon.plane(c), cu.x, cu.y, n, bd)
                } else {
                    let prev = reference.as_ref().expect("checked above");
                    inter_predict(prev.plane(c), cu.x, cu.y, n, mv.vx, mv.vy).ok_or_else(|| {
                        Error::decode(
                            r.position(),
                            format!(
                                "vector ({}, {}) of CU {} leaves the picture",
                                mv.vx, mv.vy, cu.index
                            ),
                        )
                    })?
                };
                let levels = decode_block(&mut r, n)?;
                let rec = reconstruct(&pred, &levels, &p, spec, max)?;
                recon.plane_mut(c).put_block(cu.x, cu.y, n, &rec);
            }
            qps.push(cu_qp);
        }

        frames.push(DecodedFrame {
            intra,
            qps,
            vectors,
            frame: recon.cropped(header.width, header.height),
        });
        reference = Some(recon);
    }

    Ok(DecodedSequence { header, frames })
}
