//! Per-channel perceptual QP derivation.
//!
//! For every coding block the encoder measures a non-normalized activity
//! `g = 1 + min σ²` over the block's four quadrants, averages it over the
//! picture (`H`), and maps it into `(1/B, B)` with
//! `a = (B·g + H) / (g + B·H)`. The spatial QP term is `round(6·log2 a)`.
//!
//! Temporal masking adds `o/2` (G) or `o` (B, R) when the PU's motion
//! magnitude exceeds the frame mean. The summed offset is clamped to
//! `[o/2, o]` for G and `[o, o_max]` for B and R, so B and R are always
//! quantized at least as coarsely as G and no block drops below the frame QP.
//!
//! [`adaptiveqp_offset`] is the G-only anchor: one offset in `[−6, 6]` for the
//! whole CU.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{subblocks, BlockTree, Channel, Frame};
use crate::motion::MotionField;
use crate::quantizer::MAX_QP;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceptualConstants {
    /// Mean CB-level offset.
    pub o: i32,
    /// Largest CB-level offset.
    pub o_max: i32,
    /// Number of frame-level offsets.
    pub w: i32,
    /// Activity normalization scale.
    pub b_scale: f64,
}

impl Default for PerceptualConstants {
    fn default() -> Self {
        PerceptualConstants {
            o: 6,
            o_max: 12,
            w: 12,
            b_scale: 2.0,
        }
    }
}

impl PerceptualConstants {
    /// Allowed total-offset range for `channel`.
    pub fn offset_range(&self, channel: Channel) -> (i32, i32) {
        match channel {
            Channel::G => (self.o / 2, self.o),
            Channel::B | Channel::R => (self.o, self.o_max),
        }
    }
}

/// Population variance.
pub fn variance<T: Copy + Into<f64>>(samples: &[T]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().map(|&s| s.into()).sum::<f64>() / n;
    samples
        .iter()
        .map(|&s| {
            let d = s.into() - mean;
            d * d
        })
        .sum::<f64>()
        / n
}

/// `g = 1 + min` quadrant variance of a row-major `size`×`size` block.
pub fn cb_activity(cb: &[u16], size: usize) -> Result<f64> {
    let quads = subblocks(cb, size)?;
    let min = quads
        .iter()
        .map(|q| variance(q))
        .fold(f64::INFINITY, f64::min);
    Ok(1.0 + min)
}

/// Mean activity `H` over the coding blocks of one channel.
pub fn frame_mean_activity(activities: &[f64]) -> Result<f64> {
    if activities.is_empty() {
        return Err(Error::Domain("picture has no coding blocks".into()));
    }
    Ok(activities.iter().sum::<f64>() / activities.len() as f64)
}

pub fn normalized_activity(g: f64, h: f64, b_scale: f64) -> f64 {
    (b_scale * g + h) / (g + b_scale * h)
}

/// Temporal masking offset. Strict inequality: `D == F` is not high motion.
pub fn temporal_offset(d: f64, f: f64, channel: Channel, k: &PerceptualConstants) -> i32 {
    if d > f {
        match channel {
            Channel::G => k.o / 2,
            Channel::B | Channel::R => k.o,
        }
    } else {
        0
    }
}

/// `round(6·log2 a)`, halves rounded away from zero.
pub fn spatial_term(a: f64) -> i32 {
    (6.0 * a.log2()).round() as i32
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceptualQp {
    pub channel: Channel,
    pub frame_qp: i32,
    pub temporal: i32,
    pub spatial: i32,
    pub offset: i32,
    pub pqp: i32,
}

pub fn perceptual_qp(
    frame_qp: i32,
    a: f64,
    z: i32,
    channel: Channel,
    k: &PerceptualConstants,
) -> PerceptualQp {
    let spatial = spatial_term(a);
    let (lo, hi) = k.offset_range(channel);
    let offset = (z + spatial).clamp(lo, hi);
    PerceptualQp {
        channel,
        frame_qp,
        temporal: z,
        spatial,
        offset,
        pqp: (frame_qp + offset).clamp(0, MAX_QP),
    }
}

/// Anchor offset from G activity alone, applied to the whole CU.
pub fn adaptiveqp_offset(a_g: f64) -> i32 {
    spatial_term(a_g).clamp(-6, 6)
}

/// Audit record for one coding block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbRecord {
    pub frame: usize,
    pub cu: usize,
    pub channel: Channel,
    pub g: f64,
    pub h: f64,
    pub a: f64,
    /// Motion magnitude of the CU's PU (0 on intra frames).
    pub d: f64,
    /// Frame mean motion magnitude (0 on intra frames).
    pub f: f64,
    pub z: i32,
    pub offset: i32,
    pub pqp: i32,
}

/// Frame-level statistics: activity per CB and channel, and their means.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameActivity {
    /// `g` per CU, indexed by channel.
    pub g: Vec<[f64; 3]>,
    pub h: [f64; 3],
}

/// First pass: activity of every CB of a padded frame.
pub fn measure_activity(frame: &Frame, tree: &BlockTree) -> Result<FrameActivity> {
    let g: Vec<[f64; 3]> = tree
        .cus
        .par_iter()
        .map(|cu| {
            let mut out = [0.0; 3];
            for c in Channel::ALL {
                let block = frame.plane(c).block(cu.x, cu.y, cu.size);
                out[c.index()] = cb_activity(&block, cu.size)?;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut h = [0.0; 3];
    for c in Channel::ALL {
        let col: Vec<f64> = g.iter().map(|v| v[c.index()]).collect();
        h[c.index()] = frame_mean_activity(&col)?;
    }
    Ok(FrameActivity { g, h })
}

/// Second pass: per-CB QPs for every CU. `motion` is `None` on intra frames,
/// which gives `z = 0` everywhere.
pub fn derive_frame_qps(
    frame_index: usize,
    frame_qp: i32,
    activity: &FrameActivity,
    motion: Option<&MotionField>,
    k: &PerceptualConstants,
) -> Vec<[CbRecord; 3]> {
    let f = motion.map_or(0.0, |m| m.mean_magnitude);
    (0..activity.g.len())
        .into_par_iter()
        .map(|cu| {
            let d = motion.map_or(0.0, |m| m.magnitude(cu));
            Channel::ALL.map(|c| {
                let g = activity.g[cu][c.index()];
                let h = activity.h[c.index()];
                let a = normalized_activity(g, h, k.b_scale);
                let z = if motion.is_some() {
                    temporal_offset(d, f, c, k)
                } else {
                    0
                };
                let q = perceptual_qp(frame_qp, a, z, c, k);
                CbRecord {
                    frame: frame_index,
                    cu,
                    channel: c,
                    g,
                    h,
                    a,
                    d,
                    f,
                    z,
                    offset: q.offset,
                    pqp: q.pqp,
                }
            })
        })
        .collect()
}

/// Anchor QPs: the same adapted QP on all three CBs of each CU.
pub fn derive_adaptiveqp(frame_qp: i32, activity: &FrameActivity, b_scale: f64) -> Vec<[i32; 3]> {
    activity
        .g
        .iter()
        .map(|g| {
            let a = normalized_activity(g[0], activity.h[0], b_scale);
            let qp = (frame_qp + adaptiveqp_offset(a)).clamp(0, MAX_QP);
            [qp; 3]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn activity_examples() {
        assert_eq!(cb_activity(&[77u16; 64], 8).unwrap(), 1.0);
        let alt: Vec<u16> = (0..64)
            .map(|i| if (i % 8 + i / 8) % 2 == 0 { 0 } else { 2 })
            .collect();
        assert_eq!(cb_activity(&alt, 8).unwrap(), 2.0);
    }

    #[test]
    fn min_variance_picks_smallest_quadrant() {
        // quadrants with alternating amplitudes 0, 4, 8, 12 → variances 0, 4, 16, 36
        let mut cb = vec![0u16; 64];
        for d in 0..4 {
            let amp = 4 * d as u16;
            let (ox, oy) = ((d % 2) * 4, (d / 2) * 4);
            for y in 0..4 {
                for x in 0..4 {
                    cb[(oy + y) * 8 + ox + x] = if (x + y) % 2 == 0 { 100 } else { 100 + amp };
                }
            }
        }
        assert_eq!(cb_activity(&cb, 8).unwrap(), 1.0);
        // drop the flat quadrant: min variance is then 4
        for y in 0..4 {
            for x in 0..4 {
                cb[y * 8 + x] = if (x + y) % 2 == 0 { 100 } else { 104 };
            }
        }
        assert_eq!(cb_activity(&cb, 8).unwrap(), 5.0);
    }

    #[test]
    fn mean_activity_examples() {
        assert_eq!(frame_mean_activity(&[1.0; 6]).unwrap(), 1.0);
        assert_eq!(frame_mean_activity(&[16.0, 4.0, 4.0, 4.0]).unwrap(), 7.0);
        assert_eq!(frame_mean_activity(&[3.5]).unwrap(), 3.5);
        assert!(frame_mean_activity(&[]).is_err());
    }

    #[test]
    fn normalized_examples() {
        assert_eq!(normalized_activity(5.0, 5.0, 2.0), 1.0);
        assert_eq!(normalized_activity(16.0, 4.0, 2.0), 1.5);
        assert!((normalized_activity(1e12, 4.0, 2.0) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn temporal_examples() {
        let k = PerceptualConstants::default();
        assert_eq!(temporal_offset(7.0, 5.0, Channel::G, &k), 3);
        assert_eq!(temporal_offset(7.0, 5.0, Channel::B, &k), 6);
        assert_eq!(temporal_offset(7.0, 5.0, Channel::R, &k), 6);
        for c in Channel::ALL {
            assert_eq!(temporal_offset(5.0, 5.0, c, &k), 0);
        }
    }

    #[test]
    fn perceptual_qp_examples() {
        let k = PerceptualConstants::default();
        let q = perceptual_qp(22, 1.5, 0, Channel::G, &k);
        assert_eq!((q.spatial, q.offset, q.pqp), (4, 4, 26));
        let q = perceptual_qp(22, 1.5, 0, Channel::B, &k);
        assert_eq!((q.offset, q.pqp), (6, 28));
        let q = perceptual_qp(22, 1.0, 6, Channel::R, &k);
        assert_eq!((q.offset, q.pqp), (6, 28));
        let q = perceptual_qp(22, 1.0, 0, Channel::G, &k);
        assert_eq!((q.offset, q.pqp), (3, 25));
        // absolute QP still clamps at 51
        assert_eq!(perceptual_qp(50, 1.9, 6, Channel::B, &k).pqp, 51);
    }

    #[test]
    fn adaptiveqp_examples() {
        assert_eq!(adaptiveqp_offset(1.0), 0);
        assert_eq!(adaptiveqp_offset(2.0), 6);
        assert_eq!(adaptiveqp_offset(0.7), -3);
        assert_eq!(adaptiveqp_offset(0.5), -6);
    }

    proptest! {
        #[test]
        fn normalized_in_open_interval(g in 1.0f64..1e7, h in 1.0f64..1e7) {
            let a = normalized_activity(g, h, 2.0);
            prop_assert!(a > 0.5 && a < 2.0);
        }

        #[test]
        fn offsets_bounded_and_ordered(a in 0.5f64..2.0, moving: bool, x in 0i32..=51) {
            let k = PerceptualConstants::default();
            let zg = if moving { 3 } else { 0 };
            let zbr = if moving { 6 } else { 0 };
            let g = perceptual_qp(x, a, zg, Channel::G, &k);
            let b = perceptual_qp(x, a, zbr, Channel::B, &k);
            let r = perceptual_qp(x, a, zbr, Channel::R, &k);
            prop_assert!((3..=6).contains(&g.offset));
            prop_assert!((6..=12).contains(&b.offset) && (6..=12).contains(&r.offset));
            prop_assert!(b.offset >= g.offset && b.pqp >= g.pqp);
            prop_assert_eq!(b.pqp, r.pqp);
            prop_assert!(g.pqp >= x);
        }

        #[test]
        fn pqp_monotone(a1 in 0.5f64..2.0, a2 in 0.5f64..2.0, z1 in 0i32..=6, z2 in 0i32..=6) {
            let k = PerceptualConstants::default();
            let (alo, ahi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let (zlo, zhi) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
            for c in Channel::ALL {
                prop_assert!(perceptual_qp(30, alo, zlo, c, &k).pqp <= perceptual_qp(30, ahi, zlo, c, &k).pqp);
                prop_assert!(perceptual_qp(30, alo, zlo, c, &k).pqp <= perceptual_qp(30, alo, zhi, c, &k).pqp);
            }
        }
    }
}
