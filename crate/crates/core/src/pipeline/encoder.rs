use crate::entropy::{encode_block, BitWriter};
use crate::error::{Error, Result};
use crate::frame::{max_sample, partition_dims, BlockTree, Channel, Frame};
use crate::motion::{estimate_field, MotionField, MotionVector};
use crate::perceptual::{derive_adaptiveqp, derive_frame_qps, measure_activity, CbRecord};
use crate::quantizer::{quant_params, rdoq_level, QuantParams, RdoqConfig, MAX_QP};
use crate::transform::{self, TransformSpec};

use super::container::{SequenceHeader, QP_BITS};
use super::{inter_predict, intra_predict_dc, reconstruct, EncoderConfig, Mode};

/// Per-frame accounting from the encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStats {
    pub index: usize,
    pub intra: bool,
    /// Every bit written for this frame.
    pub bits: usize,
    /// Frame type flag, QP fields and motion vectors.
    pub side_bits: usize,
    /// Residual bits per channel.
    pub channel_bits: [usize; 3],
    /// Non-zero levels per channel.
    pub nonzero_levels: [usize; 3],
    /// Coded QP per CU, indexed by channel.
    pub qps: Vec<[i32; 3]>,
    pub motion: Option<MotionField>,
    /// Derivation records; empty unless the mode is spectral-pq.
    pub records: Vec<[CbRecord; 3]>,
}

#[derive(Debug, Clone)]
pub struct EncodeOutput {
    pub header: SequenceHeader,
    pub bitstream: Vec<u8>,
    /// Bits in the sequence header, magic included.
    pub header_bits: usize,
    pub frames: Vec<FrameStats>,
    /// Encoder-side reconstructions, cropped to the source size.
    pub recon: Vec<Frame>,
}

impl EncodeOutput {
    /// Size of the whole bitstream in bits, final byte padding included.
    pub fn total_bits(&self) -> usize {
        self.bitstream.len() * 8
    }

    pub fn channel_bits(&self) -> [usize; 3] {
        let mut out = [0; 3];
        for f in &self.frames {
            for (o, b) in out.iter_mut().zip(f.channel_bits) {
                *o += b;
            }
        }
        out
    }
}

fn check_input(frames: &[Frame]) -> Result<(usize, usize, u32)> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Structural("no frames to encode".into()))?;
    let (w, h, bd) = (first.width, first.height, first.bit_depth);
    if bd != 8 && bd != 10 {
        return Err(Error::Structural(format!("unsupported bit depth {bd}")));
    }
    let max = max_sample(bd);
    for (i, f) in frames.iter().enumerate() {
        if f.width != w || f.height != h || f.bit_depth != bd {
            return Err(Error::Structural(format!(
                "frame {i} is {}x{} at {} bits, expected {w}x{h} at {bd} bits",
                f.width, f.height, f.bit_depth
            )));
        }
        for p in &f.planes {
            if p.width != w || p.height != h || p.data.len() != w * h {
                return Err(Error::Structural(format!(
                    "frame {i} has a malformed plane"
                )));
            }
            if p.data.iter().any(|&s| s > max) {
                return Err(Error::Structural(format!(
                    "frame {i} has samples above {max}"
                )));
            }
        }
    }
    Ok((w, h, bd))
}

/// Per-size quantization context, built once per QP and block size.
struct Quant {
    params: QuantParams,
    rdoq: Option<RdoqConfig>,
}

impl Quant {
    fn new(qp: i32, n: usize, rdoq: bool) -> Result<Self> {
        Ok(Quant {
            params: quant_params(qp, n)?,
            rdoq: if rdoq {
                Some(RdoqConfig::for_qp(qp, n)?)
            } else {
                None
            },
        })
    }

    fn levels(&self, coeffs: &[i32]) -> Vec<i32> {
        match &self.rdoq {
            Some(cfg) => coeffs
                .iter()
                .map(|&x| rdoq_level(x, &self.params, cfg))
                .collect(),
            None => coeffs.iter().map(|&x| self.params.quantize(x)).collect(),
        }
    }
}

type FrameQps = (Vec<[i32; 3]>, Vec<[CbRecord; 3]>);

fn frame_qps(
    cfg: &EncoderConfig,
    index: usize,
    source: &Frame,
    tree: &BlockTree,
    motion: Option<&MotionField>,
) -> Result<FrameQps> {
    match cfg.mode {
        Mode::AnchorFlat => Ok((vec![[cfg.base_qp; 3]; tree.len()], Vec::new())),
        Mode::AnchorAdaptiveQp => {
            let act = measure_activity(source, tree)?;
            Ok((
                derive_adaptiveqp(cfg.base_qp, &act, cfg.constants.b_scale),
                Vec::new(),
            ))
        }
        Mode::SpectralPq => {
            let act = measure_activity(source, tree)?;
            let records = derive_frame_qps(index, cfg.base_qp, &act, motion, &cfg.constants);
            let qps = records.iter().map(|r| r.map(|c| c.pqp)).collect();
            Ok((qps, records))
        }
    }
}

/// Encodes `frames` into an SPQ1 bitstream.
pub fn encode_sequence(frames: &[Frame], cfg: &EncoderConfig) -> Result<EncodeOutput> {
    cfg.validate()?;
    let (width, height, bit_depth) = check_input(frames)?;
    let header = SequenceHeader::from_config(cfg, width, height, bit_depth, frames.len())?;
    let tree = partition_dims(width, height, cfg.ctu_size, cfg.cu_size)?;
    let n = cfg.cu_size;
    let max = max_sample(bit_depth);

    let mut w = BitWriter::new();
    header.write(&mut w);
    let header_bits = w.bit_len();

    let mut quant: Vec<Option<Quant>> = (0..=MAX_QP).map(|_| None).collect();
    let intra_spec = TransformSpec::for_block(n, true)?;
    let inter_spec = TransformSpec::for_block(n, false)?;

    let mut stats = Vec::with_capacity(frames.len());
    let mut recons: Vec<Frame> = Vec::with_capacity(frames.len());
    let mut reference: Option<Frame> = None;

    for (index, src) in frames.iter().enumerate() {
        let source = src.padded_to(cfg.ctu_size);
        let intra = cfg.is_intra(index) || reference.is_none();
        let motion = match (&reference, intra) {
            (Some(r), false) => Some(estimate_field(
                index,
                source.plane(Channel::G),
                r.plane(Channel::G),
                &tree,
                cfg.search_range,
            )?),
            _ => None,
        };
        let (qps, records) = frame_qps(cfg, index, &source, &tree, motion.as_ref())?;

        let start = w.bit_len();
        let mut side_bits = 0;
        let mut channel_bits = [0usize; 3];
        let mut nonzero_levels = [0usize; 3];
        let mut recon = Frame::new(source.width, source.height, bit_depth)?;
        let spec = if intra { &intra_spec } else { &inter_spec };

        let mark = w.bit_len();
        w.write_bit(intra);
        side_bits += w.bit_len() - mark;

        for cu in &tree.cus {
            let mark = w.bit_len();
            for &qp in &qps[cu.index] {
                w.write_bits(qp as u64, QP_BITS);
            }
            let mv = motion
                .as_ref()
                .map_or(MotionVector::ZERO, |m| m.vectors[cu.index]);
            if !intra {
                w.write_se(mv.vx);
                w.write_se(mv.vy);
            }
            side_bits += w.bit_len() - mark;

            for c in Channel::ALL {
                let qp = qps[cu.index][c.index()];
                let q = match &mut quant[qp as usize] {
                    Some(q) => q,
                    slot => slot.insert(Quant::new(qp, n, cfg.rdoq)?),
                };
                let pred = if intra {
                    intra_predict_dc(recon.plane(c), cu.x, cu.y, n, bit_depth)
                } else {
                    let r = reference.as_ref().expect("inter frame has a reference");
                    inter_predict(r.plane(c), cu.x, cu.y, n, mv.vx, mv.vy).ok_or_else(|| {
                        Error::Encode(format!(
                            "motion vector of CU {} leaves the picture",
                            cu.index
                        ))
                    })?
                };
                let orig = source.plane(c).block(cu.x, cu.y, n);
                let residual: Vec<i32> = orig
                    .iter()
                    .zip(&pred)
                    .map(|(&o, &p)| o as i32 - p as i32)
                    .collect();
                let coeffs = transform::forward(&residual, spec)?;
                let levels = q.levels(&coeffs);
                nonzero_levels[c.index()] += levels.iter().filter(|&&l| l != 0).count();
                channel_bits[c.index()] += encode_block(&levels, n, &mut w)?;
                let rec = reconstruct(&pred, &levels, &q.params, spec, max)?;
                recon.plane_mut(c).put_block(cu.x, cu.y, n, &rec);
            }
        }

        stats.push(FrameStats {
            index,
            intra,
            bits: w.bit_len() - start,
            side_bits,
            channel_bits,
            nonzero_levels,
            qps,
            motion,
            records,
        });
        recons.push(recon.cropped(width, height));
        reference = Some(recon);
    }

    Ok(EncodeOutput {
        header,
        bitstream: w.into_bytes(),
        header_bits,
        frames: stats,
        recon: recons,
    })
}
