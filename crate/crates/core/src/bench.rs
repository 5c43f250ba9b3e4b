//! Experiment harness: synthetic corpus, rate arithmetic, and mode sweeps.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::{GrayImage, Luma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{max_sample, Channel, Frame, Plane};
use crate::metrics::{sequence_quality, QualityReport};
use crate::perceptual::CbRecord;
use crate::pipeline::{
    decode_sequence, encode_sequence, EncodeOutput, EncoderConfig, FrameStats, Mode,
};
use crate::quantizer::{quant_params, MAX_QP};

/// The four base QPs of the standard sweep.
pub const SWEEP_QPS: [i32; 4] = [22, 27, 32, 37];

pub fn kbps(total_bits: u64, frame_count: usize, fps: f64) -> Result<f64> {
    if frame_count == 0 {
        return Err(Error::Domain("frame count must be at least 1".into()));
    }
    if !(fps > 0.0) || !fps.is_finite() {
        return Err(Error::Domain(format!("fps must be positive, got {fps}")));
    }
    Ok(total_bits as f64 * fps / (frame_count as f64 * 1000.0))
}

/// Signed change of `test` relative to `reference`, in percent.
pub fn bitrate_reduction(test_kbps: f64, ref_kbps: f64) -> Result<f64> {
    if !(ref_kbps > 0.0) {
        return Err(Error::Domain(format!(
            "reference bitrate must be positive, got {ref_kbps}"
        )));
    }
    Ok((test_kbps - ref_kbps) / ref_kbps * 100.0)
}

/// One-decimal rounding used in reports.
pub fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

// ---------------------------------------------------------------------------
// synthetic corpus

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Synthetic {
    StaticGradient,
    MovingGradient,
    TexturedNoise,
    MovingObject,
}

impl Synthetic {
    pub const ALL: [Synthetic; 4] = [
        Synthetic::StaticGradient,
        Synthetic::MovingGradient,
        Synthetic::TexturedNoise,
        Synthetic::MovingObject,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Synthetic::StaticGradient => "static-gradient",
            Synthetic::MovingGradient => "moving-gradient",
            Synthetic::TexturedNoise => "textured-noise",
            Synthetic::MovingObject => "moving-object",
        }
    }
}

/// A named source sequence.
#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub frames: Vec<Frame>,
}

fn clamp_sample(v: f64, max: u16) -> u16 {
    v.round().clamp(0.0, max as f64) as u16
}

/// Sum of a few random low-frequency plane waves, centred on mid-grey.
struct Waves {
    terms: Vec<(f64, f64, f64, f64)>,
}

impl Waves {
    fn new(rng: &mut ChaCha8Rng, count: usize, amplitude: f64) -> Self {
        let terms = (0..count)
            .map(|_| {
                let angle = rng.gen_range(0.0..2.0 * PI);
                let period = rng.gen_range(12.0..48.0);
                let k = 2.0 * PI / period;
                (
                    k * angle.cos(),
                    k * angle.sin(),
                    rng.gen_range(0.0..2.0 * PI),
                    amplitude / count as f64 * rng.gen_range(0.6..1.4),
                )
            })
            .collect();
        Waves { terms }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(kx, ky, ph, a)| a * (kx * x + ky * y + ph).sin())
            .sum()
    }
}

/// Smoothly interpolated lattice noise. Not periodic within the lattice
/// span, so translated copies only match at the true offset.
struct ValueNoise {
    lattice: Vec<f64>,
    side: usize,
    cell: f64,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, cell: f64) -> Self {
        let side = 128;
        ValueNoise {
            lattice: (0..side * side)
                .map(|_| rng.gen_range(-1.0..=1.0))
                .collect(),
            side,
            cell,
        }
    }

    fn node(&self, i: i64, j: i64) -> f64 {
        let s = self.side as i64;
        self.lattice[(j.rem_euclid(s) * s + i.rem_euclid(s)) as usize]
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        let (fx, fy) = (x / self.cell, y / self.cell);
        let (i, j) = (fx.floor(), fy.floor());
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let (tx, ty) = (smooth(fx - i), smooth(fy - j));
        let (i, j) = (i as i64, j as i64);
        let top = self.node(i, j) * (1.0 - tx) + self.node(i + 1, j) * tx;
        let bottom = self.node(i, j + 1) * (1.0 - tx) + self.node(i + 1, j + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

fn frame_from_fn(
    width: usize,
    height: usize,
    bit_depth: u32,
    mut f: impl FnMut(Channel, usize, usize) -> f64,
) -> Frame {
    let max = max_sample(bit_depth);
    let planes = Channel::ALL.map(|c| {
        let mut p = Plane::new(width, height);
        for y in 0..height {
            for x in 0..width {
                p.set(x, y, clamp_sample(f(c, x, y), max));
            }
        }
        p
    });
    Frame::from_planes(planes, bit_depth).expect("generated samples are in range")
}

/// Per-channel mix of a shared component and an independent one, so the
/// three channels carry related structure of similar strength, as in camera
/// RGB.
struct ChannelMix {
    gain: [f64; 3],
}

impl ChannelMix {
    const OWN: f64 = 0.35;

    fn new(rng: &mut ChaCha8Rng) -> Self {
        ChannelMix {
            gain: std::array::from_fn(|_| rng.gen_range(0.85..1.15)),
        }
    }

    fn at(&self, c: Channel, shared: f64, own: f64) -> f64 {
        self.gain[c.index()] * shared + Self::OWN * own
    }
}

/// Deterministic synthetic sequence.
pub fn synthetic_sequence(
    kind: Synthetic,
    width: usize,
    height: usize,
    frames: usize,
    bit_depth: u32,
    seed: u64,
) -> Result<Vec<Frame>> {
    if width == 0 || height == 0 || frames == 0 {
        return Err(Error::Domain("synthetic sequence must be non-empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (kind as u64).wrapping_mul(0x9e37_79b9));
    let scale = (1u32 << (bit_depth - 8)) as f64;
    let mid = (1u32 << (bit_depth - 1)) as f64;
    let (w, h) = (width as f64, height as f64);
    let mix = ChannelMix::new(&mut rng);

    let out = match kind {
        Synthetic::StaticGradient => {
            let angles: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..2.0 * PI));
            let ramp = |a: f64, x: usize, y: usize| {
                ((x as f64 - w / 2.0) * a.cos() + (y as f64 - h / 2.0) * a.sin()) / w.max(h)
            };
            let grain: Vec<[f64; 4]> = (0..width * height)
                .map(|_| std::array::from_fn(|_| rng.gen_range(-3.0..3.0)))
                .collect();
            let f = frame_from_fn(width, height, bit_depth, |c, x, y| {
                let g = &grain[y * width + x];
                let shared = 150.0 * ramp(angles[3], x, y) + g[3];
                let own = 150.0 * ramp(angles[c.index()], x, y) + g[c.index()];
                mid + scale * mix.at(c, shared, own)
            });
            vec![f; frames]
        }
        Synthetic::MovingGradient => {
            let shared = Waves::new(&mut rng, 3, 80.0);
            let own: [Waves; 3] = std::array::from_fn(|_| Waves::new(&mut rng, 3, 80.0));
            (0..frames)
                .map(|t| {
                    frame_from_fn(width, height, bit_depth, |c, x, y| {
                        let sx = x as f64 - t as f64;
                        let y = y as f64;
                        mid + scale
                            * (0.8 * sx + mix.at(c, shared.at(sx, y), own[c.index()].at(sx, y)))
                    })
                })
                .collect()
        }
        Synthetic::TexturedNoise => {
            let patch = 16;
            let px = width.div_ceil(patch);
            let py = height.div_ceil(patch);
            let amps: Vec<f64> = (0..px * py).map(|_| rng.gen_range(10.0..90.0)).collect();
            let shared = ValueNoise::new(&mut rng, 2.0);
            let own: [ValueNoise; 3] = std::array::from_fn(|_| ValueNoise::new(&mut rng, 2.0));
            let f = frame_from_fn(width, height, bit_depth, |c, x, y| {
                let a = amps[(y / patch) * px + x / patch];
                let (u, v) = (x as f64, y as f64);
                mid + scale * a * mix.at(c, shared.at(u, v), own[c.index()].at(u, v))
            });
            vec![f; frames]
        }
        Synthetic::MovingObject => {
            let side = (width.min(height) * 3 / 8).max(4);
            let bg: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-60.0..60.0));
            let shared = ValueNoise::new(&mut rng, 3.0);
            let own: [ValueNoise; 3] = std::array::from_fn(|_| ValueNoise::new(&mut rng, 3.0));
            let span_x = (width - side) as i64;
            let span_y = (height - side) as i64;
            (0..frames)
                .map(|t| {
                    let ox = bounce(3 * t as i64, span_x) as i64;
                    let oy = bounce(2 * t as i64, span_y) as i64;
                    frame_from_fn(width, height, bit_depth, |c, x, y| {
                        let (lx, ly) = (x as i64 - ox, y as i64 - oy);
                        let v = if (0..side as i64).contains(&lx) && (0..side as i64).contains(&ly)
                        {
                            let (u, v) = (lx as f64, ly as f64);
                            70.0 * mix.at(c, shared.at(u, v), own[c.index()].at(u, v))
                        } else {
                            bg[c.index()]
                        };
                        mid + scale * v
                    })
                })
                .collect()
        }
    };
    Ok(out)
}

fn bounce(pos: i64, span: i64) -> usize {
    if span <= 0 {
        return 0;
    }
    let p = pos % (2 * span);
    (if p > span { 2 * span - p } else { p }) as usize
}

/// Smooth noise texture translating by `(dx, dy)` samples per frame, the content
/// of frame `t` at `(x, y)` being the texture at `(x − t·dx, y − t·dy)`.
///
/// A ring `frame_width` samples wide around the picture stays static, like an
/// overlay over a pan. With a non-zero ring the frame-mean motion falls below
/// the motion of the moving interior.
#[allow(clippy::too_many_arguments)]
pub fn global_translation(
    width: usize,
    height: usize,
    frames: usize,
    motion: (i32, i32),
    frame_width: usize,
    bit_depth: u32,
    seed: u64,
) -> Result<Vec<Frame>> {
    if width == 0 || height == 0 || frames == 0 {
        return Err(Error::Domain("synthetic sequence must be non-empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (1u32 << (bit_depth - 8)) as f64;
    let mid = (1u32 << (bit_depth - 1)) as f64;
    let mix = ChannelMix::new(&mut rng);
    let shared = ValueNoise::new(&mut rng, 8.0);
    let own: [ValueNoise; 3] = std::array::from_fn(|_| ValueNoise::new(&mut rng, 8.0));
    let in_ring = |x: usize, y: usize| {
        x < frame_width || y < frame_width || x + frame_width >= width || y + frame_width >= height
    };
    Ok((0..frames)
        .map(|t| {
            let ox = (t as i64 * motion.0 as i64) as f64;
            let oy = (t as i64 * motion.1 as i64) as f64;
            frame_from_fn(width, height, bit_depth, |c, x, y| {
                // the ring samples a distant patch so it never matches moving content
                let (u, v) = if in_ring(x, y) {
                    (x as f64 + 500.0, y as f64 + 500.0)
                } else {
                    (x as f64 - ox, y as f64 - oy)
                };
                mid + scale * 90.0 * mix.at(c, shared.at(u, v), own[c.index()].at(u, v))
            })
        })
        .collect())
}

/// The standard corpus: one 64×64×30 8-bit sequence of each kind.
pub fn standard_corpus(seed: u64) -> Vec<Sequence> {
    Synthetic::ALL
        .iter()
        .map(|&k| Sequence {
            name: k.name().to_string(),
            frames: synthetic_sequence(k, 64, 64, 30, 8, seed).expect("fixed corpus geometry"),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// experiments

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub sequence: String,
    pub mode: Mode,
    pub base_qp: i32,
    pub frames: usize,
    pub bits: u64,
    pub kbps: f64,
    pub channel_bits: [usize; 3],
    pub quality: Option<QualityReport>,
    /// Percent change against the reference mode at the same sequence and QP.
    pub reduction: Option<f64>,
    pub error: Option<String>,
}

impl ExperimentRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    /// Worker threads; 0 uses rayon's default.
    pub threads: usize,
    /// Mode whose rows anchor the reduction column.
    pub reference_mode: Mode,
    /// Directory for per-cell QP heat maps.
    pub qp_map_dir: Option<PathBuf>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            threads: 0,
            reference_mode: Mode::AnchorFlat,
            qp_map_dir: None,
        }
    }
}

/// Encode, decode-verify and measure one cell.
pub fn run_cell(seq: &Sequence, cfg: &EncoderConfig) -> Result<(EncodeOutput, QualityReport)> {
    let out = encode_sequence(&seq.frames, cfg)?;
    let decoded = decode_sequence(&out.bitstream)?;
    if decoded != out.recon {
        return Err(Error::Encode(format!(
            "{}: decoder output differs from encoder reconstruction",
            seq.name
        )));
    }
    let q = sequence_quality(&seq.frames, &decoded)?;
    Ok((out, q))
}

/// Runs every (sequence, qp, mode) cell. Row order is sequence, then QP,
/// then mode, whatever order the cells finish in. A failing cell yields a
/// row carrying its error.
pub fn run_experiment(
    sequences: &[Sequence],
    qps: &[i32],
    modes: &[Mode],
    base: &EncoderConfig,
    opts: &ExperimentOptions,
) -> Result<Vec<ExperimentRow>> {
    let cells: Vec<(usize, i32, Mode)> = (0..sequences.len())
        .flat_map(|s| {
            qps.iter()
                .flat_map(move |&q| modes.iter().map(move |&m| (s, q, m)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let mut rows: Vec<ExperimentRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(s, qp, mode)| {
                let seq = &sequences[s];
                let cfg = EncoderConfig {
                    base_qp: qp,
                    mode,
                    ..base.clone()
                };
                let mut row = ExperimentRow {
                    sequence: seq.name.clone(),
                    mode,
                    base_qp: qp,
                    frames: seq.frames.len(),
                    bits: 0,
                    kbps: 0.0,
                    channel_bits: [0; 3],
                    quality: None,
                    reduction: None,
                    error: None,
                };
                let result = run_cell(seq, &cfg).and_then(|(out, q)| {
                    if let Some(dir) = &opts.qp_map_dir {
                        let path = dir.join(format!("{}_{}_qp{}.png", seq.name, mode, qp));
                        write_qp_map(&path, &out)?;
                    }
                    Ok((out, q))
                });
                match result {
                    Ok((out, q)) => {
                        row.bits = out.total_bits() as u64;
                        row.channel_bits = out.channel_bits();
                        row.quality = Some(q);
                        match kbps(row.bits, row.frames, cfg.fps) {
                            Ok(k) => row.kbps = k,
                            Err(e) => row.error = Some(e.to_string()),
                        }
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
                row
            })
            .collect()
    });

    for i in 0..rows.len() {
        let anchor = rows
            .iter()
            .find(|r| {
                r.sequence == rows[i].sequence
                    && r.base_qp == rows[i].base_qp
                    && r.mode == opts.reference_mode
                    && r.is_ok()
            })
            .map(|r| r.kbps);
        if rows[i].is_ok() {
            rows[i].reduction = anchor.and_then(|a| bitrate_reduction(rows[i].kbps, a).ok());
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    sequence: &'a str,
    mode: &'a str,
    qp: i32,
    frames: usize,
    bits: u64,
    kbps: String,
    bits_g: usize,
    bits_b: usize,
    bits_r: usize,
    psnr_g: String,
    psnr_b: String,
    psnr_r: String,
    ssim_g: String,
    ssim_b: String,
    ssim_r: String,
    ssim_rgb: String,
    reduction_pct: String,
    note: &'a str,
    error: &'a str,
}

fn fmt_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

pub fn write_report_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        let q = r.quality.as_ref();
        let psnr = |c: usize| q.map_or(String::new(), |q| fmt_psnr(q.psnr[c]));
        let ssim = |c: usize| q.map_or(String::new(), |q| format!("{:.6}", q.ssim[c]));
        w.serialize(CsvRow {
            sequence: &r.sequence,
            mode: r.mode.as_str(),
            qp: r.base_qp,
            frames: r.frames,
            bits: r.bits,
            kbps: format!("{:.3}", r.kbps),
            bits_g: r.channel_bits[0],
            bits_b: r.channel_bits[1],
            bits_r: r.channel_bits[2],
            psnr_g: psnr(0),
            psnr_b: psnr(1),
            psnr_r: psnr(2),
            ssim_g: ssim(0),
            ssim_b: ssim(1),
            ssim_r: ssim(2),
            ssim_rgb: q.map_or(String::new(), |q| format!("{:.6}", q.ssim_mean)),
            reduction_pct: r
                .reduction
                .map_or(String::new(), |v| format!("{:.1}", round1(v))),
            note: q.map_or("", |q| q.annotation()),
            error: r.error.as_deref().unwrap_or(""),
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// One row per coding block: the quantities behind its QP.
pub fn write_cb_records_csv<W: Write>(frames: &[FrameStats], out: W) -> Result<()> {
    #[derive(Serialize)]
    struct Rec<'a> {
        frame: usize,
        cu: usize,
        channel: &'a str,
        g: f64,
        h: f64,
        a: f64,
        d: f64,
        f: f64,
        z: i32,
        offset: i32,
        pqp: i32,
    }
    let mut w = csv::Writer::from_writer(out);
    for r in frames.iter().flat_map(|f| f.records.iter().flatten()) {
        let CbRecord {
            frame,
            cu,
            channel,
            g,
            h,
            a,
            d,
            f,
            z,
            offset,
            pqp,
        } = *r;
        w.serialize(Rec {
            frame,
            cu,
            channel: channel.name(),
            g,
            h,
            a,
            d,
            f,
            z,
            offset,
            pqp,
        })
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-PU motion of every inter frame, with the frame mean.
pub fn write_motion_csv<W: Write>(
    frames: &[FrameStats],
    cu_size: usize,
    width: usize,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frame", "cu", "x", "y", "vx", "vy", "d", "frame_mean"])
        .map_err(csv_err)?;
    let per_row = width.div_ceil(cu_size).max(1);
    for f in frames {
        let Some(m) = &f.motion else { continue };
        for (i, v) in m.vectors.iter().enumerate() {
            w.write_record([
                f.index.to_string(),
                i.to_string(),
                ((i % per_row) * cu_size).to_string(),
                ((i / per_row) * cu_size).to_string(),
                v.vx.to_string(),
                v.vy.to_string(),
                m.magnitude(i).to_string(),
                m.mean_magnitude.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `qp, qstep, m, s` for every QP.
pub fn write_quant_table_csv<W: Write>(out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["qp", "qstep", "m", "s"]).map_err(csv_err)?;
    for qp in 0..=MAX_QP {
        let p = quant_params(qp, 4)?;
        w.write_record([
            qp.to_string(),
            format!("{:.4}", p.qstep),
            p.m.to_string(),
            p.s.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Grey-level map of coded QPs: one row of G, B, R panels per frame, one
/// square per CU, black at QP 0 and white at QP 51.
pub fn write_qp_map(path: &Path, out: &EncodeOutput) -> Result<()> {
    const CELL: u32 = 8;
    const GAP: u32 = 4;
    let h = &out.header;
    let cols = h.width.div_ceil(h.ctu_size) * h.ctu_size / h.cu_size;
    let rows = h.height.div_ceil(h.ctu_size) * h.ctu_size / h.cu_size;
    let panel_w = cols as u32 * CELL;
    let panel_h = rows as u32 * CELL;
    let width = 3 * panel_w + 2 * GAP;
    let height = out.frames.len() as u32 * (panel_h + GAP) - GAP;
    let mut img = GrayImage::from_pixel(width, height, Luma([0]));
    for (fi, f) in out.frames.iter().enumerate() {
        for (cu, qps) in f.qps.iter().enumerate() {
            for (c, &qp) in qps.iter().enumerate() {
                let v = (qp * 255 / MAX_QP) as u8;
                let x0 = c as u32 * (panel_w + GAP) + (cu % cols) as u32 * CELL;
                let y0 = fi as u32 * (panel_h + GAP) + (cu / cols) as u32 * CELL;
                for y in y0..y0 + CELL {
                    for x in x0..x0 + CELL {
                        img.put_pixel(x, y, Luma([v]));
                    }
                }
            }
        }
    }
    img.save(path)
        .map_err(|e| Error::Io(std::io::Error::other(e)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kbps_examples() {
        assert!((kbps(1_000_000, 30, 50.0).unwrap() - 1666.6667).abs() < 1e-3);
        assert_eq!(kbps(0, 30, 50.0).unwrap(), 0.0);
        assert_eq!(
            kbps(12345, 7, 60.0).unwrap(),
            2.0 * kbps(12345, 7, 30.0).unwrap()
        );
        assert!(kbps(1, 0, 30.0).is_err());
        assert!(kbps(1, 1, 0.0).is_err());
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(
            round1(bitrate_reduction(15490.65, 77841.94).unwrap()),
            -80.1
        );
        assert_eq!(round1(bitrate_reduction(2732.45, 14396.51).unwrap()), -81.0);
        assert_eq!(bitrate_reduction(5.0, 5.0).unwrap(), 0.0);
        assert!(bitrate_reduction(5.0, 0.0).is_err());
    }

    #[test]
    fn corpus_is_deterministic() {
        for k in Synthetic::ALL {
            let a = synthetic_sequence(k, 32, 32, 3, 8, 11).unwrap();
            let b = synthetic_sequence(k, 32, 32, 3, 8, 11).unwrap();
            assert_eq!(a, b, "{}", k.name());
            let c = synthetic_sequence(k, 32, 32, 3, 8, 12).unwrap();
            assert_ne!(a, c, "{}", k.name());
        }
    }

    #[test]
    fn ten_bit_corpus_in_range() {
        for k in Synthetic::ALL {
            let s = synthetic_sequence(k, 24, 16, 2, 10, 1).unwrap();
            assert!(s.iter().all(|f| f.bit_depth == 10 && f.width == 24));
        }
    }

    #[test]
    fn translation_moves_content() {
        let s = global_translation(64, 64, 3, (2, -3), 0, 8, 5).unwrap();
        for c in 0..3 {
            for y in 0..58 {
                for x in 0..60 {
                    assert_eq!(s[1].planes[c].get(x + 2, y), s[0].planes[c].get(x, y + 3));
                }
            }
        }
    }

    #[test]
    fn bounce_stays_in_span() {
        for t in 0..100 {
            assert!(bounce(t, 10) <= 10);
        }
        assert_eq!(bounce(12, 10), 8);
        assert_eq!(bounce(5, 0), 0);
    }

    #[test]
    fn empty_mode_list_gives_empty_report() {
        let rows = run_experiment(
            &standard_corpus(1)[..1],
            &[22],
            &[],
            &EncoderConfig::default(),
            &ExperimentOptions::default(),
        )
        .unwrap();
        assert!(rows.is_empty());
        let mut buf = Vec::new();
        write_report_csv(&rows, &mut buf).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn quant_table_dump() {
        let mut buf = Vec::new();
        write_quant_table_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 53);
        assert!(text.contains("\n4,1.0000,16384,64\n"));
    }
}
