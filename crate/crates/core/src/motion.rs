//! Full-pel full-search block matching on the G plane.
//!
//! A vector `(vx, vy)` means the current block at `(x, y)` is predicted from
//! the reference block at `(x − vx, y − vy)`: content that moved right by 3
//! samples yields `(3, 0)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{BlockTree, Plane};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MotionVector {
    pub vx: i32,
    pub vy: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { vx: 0, vy: 0 };

    pub fn new(vx: i32, vy: i32) -> Self {
        MotionVector { vx, vy }
    }

    pub fn magnitude(self) -> f64 {
        mv_magnitude(self)
    }
}

/// Euclidean length of a motion vector.
pub fn mv_magnitude(v: MotionVector) -> f64 {
    ((v.vx as f64).powi(2) + (v.vy as f64).powi(2)).sqrt()
}

/// Motion of every PU in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionField {
    pub frame_index: usize,
    /// One vector per CU, in raster order.
    pub vectors: Vec<MotionVector>,
    /// Mean magnitude over all PUs.
    pub mean_magnitude: f64,
}

impl MotionField {
    pub fn new(frame_index: usize, vectors: Vec<MotionVector>) -> Result<Self> {
        let mags: Vec<f64> = vectors.iter().map(|&v| mv_magnitude(v)).collect();
        let mean_magnitude = frame_mean_magnitude(&mags)?;
        Ok(MotionField {
            frame_index,
            vectors,
            mean_magnitude,
        })
    }

    pub fn magnitude(&self, cu: usize) -> f64 {
        mv_magnitude(self.vectors[cu])
    }
}

/// Arithmetic mean of PU motion magnitudes.
pub fn frame_mean_magnitude(magnitudes: &[f64]) -> Result<f64> {
    if magnitudes.is_empty() {
        return Err(Error::Domain("motion field has no prediction units".into()));
    }
    Ok(magnitudes.iter().sum::<f64>() / magnitudes.len() as f64)
}

/// Sum of absolute differences between the `size`×`size` block of `cur` at
/// `(x, y)` and the block of `reference` at `(rx, ry)`.
pub fn sad(
    cur: &Plane,
    x: usize,
    y: usize,
    reference: &Plane,
    rx: usize,
    ry: usize,
    size: usize,
) -> u64 {
    let mut acc = 0u64;
    for r in 0..size {
        let a = &cur.data[(y + r) * cur.width + x..][..size];
        let b = &reference.data[(ry + r) * reference.width + rx..][..size];
        acc += a
            .iter()
            .zip(b)
            .map(|(&p, &q)| (p as i32 - q as i32).unsigned_abs() as u64)
            .sum::<u64>();
    }
    acc
}

/// Ordering key for candidate selection: SAD, then magnitude, then `vy`,
/// then `vx`.
fn candidate_key(cost: u64, v: MotionVector) -> (u64, i64, i32, i32) {
    let mag2 = (v.vx as i64).pow(2) + (v.vy as i64).pow(2);
    (cost, mag2, v.vy, v.vx)
}

/// Exhaustive minimum-SAD search over `[−range, range]²`. Candidates whose
/// reference block would leave the reference plane are skipped.
pub fn estimate_mv(
    cur: &Plane,
    x: usize,
    y: usize,
    size: usize,
    reference: &Plane,
    search_range: i32,
) -> MotionVector {
    let mut best = MotionVector::ZERO;
    let mut best_key = None;
    for vy in -search_range..=search_range {
        let ry = y as i64 - vy as i64;
        if ry < 0 || ry as usize + size > reference.height {
            continue;
        }
        for vx in -search_range..=search_range {
            let rx = x as i64 - vx as i64;
            if rx < 0 || rx as usize + size > reference.width {
                continue;
            }
            let v = MotionVector::new(vx, vy);
            let key = candidate_key(sad(cur, x, y, reference, rx as usize, ry as usize, size), v);
            if best_key.is_none_or(|b| key < b) {
                best_key = Some(key);
                best = v;
            }
        }
    }
    best
}

/// Searches every PU of `tree` (PU = CU) against `reference`. Both planes
/// must already be padded to the tree's dimensions.
pub fn estimate_field(
    frame_index: usize,
    cur: &Plane,
    reference: &Plane,
    tree: &BlockTree,
    search_range: i32,
) -> Result<MotionField> {
    if cur.width != tree.padded_width
        || cur.height != tree.padded_height
        || reference.width != cur.width
        || reference.height != cur.height
    {
        return Err(Error::Structural(
            "motion search planes must match the padded grid".into(),
        ));
    }
    let vectors: Vec<MotionVector> = tree
        .cus
        .par_iter()
        .map(|cu| estimate_mv(cur, cu.x, cu.y, cu.size, reference, search_range))
        .collect();
    MotionField::new(frame_index, vectors)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::frame::partition_dims;

    fn noise(w: usize, h: usize, seed: u64) -> Plane {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Plane::from_vec(w, h, (0..w * h).map(|_| rng.gen_range(0..256)).collect()).unwrap()
    }

    fn shifted(p: &Plane, dx: i32, dy: i32) -> Plane {
        let mut out = Plane::new(p.width, p.height);
        for y in 0..p.height {
            for x in 0..p.width {
                let sx = (x as i32 - dx).clamp(0, p.width as i32 - 1) as usize;
                let sy = (y as i32 - dy).clamp(0, p.height as i32 - 1) as usize;
                out.set(x, y, p.get(sx, sy));
            }
        }
        out
    }

    #[test]
    fn magnitudes() {
        assert_eq!(mv_magnitude(MotionVector::new(3, 4)), 5.0);
        assert_eq!(mv_magnitude(MotionVector::new(-3, 4)), 5.0);
        assert_eq!(mv_magnitude(MotionVector::ZERO), 0.0);
    }

    #[test]
    fn mean_magnitude() {
        assert_eq!(frame_mean_magnitude(&[0.0; 4]).unwrap(), 0.0);
        assert_eq!(frame_mean_magnitude(&[5.0, 0.0, 0.0, 0.0]).unwrap(), 1.25);
        assert_eq!(frame_mean_magnitude(&[2.5]).unwrap(), 2.5);
        assert!(frame_mean_magnitude(&[]).is_err());
    }

    #[test]
    fn identical_frames_give_zero() {
        let p = noise(64, 64, 1);
        assert_eq!(estimate_mv(&p, 16, 16, 16, &p, 8), MotionVector::ZERO);
        let flat = Plane::filled(64, 64, 9);
        // every candidate ties at SAD 0; smallest magnitude wins
        assert_eq!(estimate_mv(&flat, 16, 16, 16, &flat, 8), MotionVector::ZERO);
    }

    #[test]
    fn right_shift_found() {
        let r = noise(96, 96, 2);
        let c = shifted(&r, 3, 0);
        assert_eq!(estimate_mv(&c, 32, 32, 16, &r, 8), MotionVector::new(3, 0));
        let c = shifted(&r, -2, 5);
        assert_eq!(estimate_mv(&c, 32, 32, 16, &r, 8), MotionVector::new(-2, 5));
    }

    #[test]
    fn zero_range_is_zero() {
        let r = noise(64, 64, 3);
        let c = shifted(&r, 4, 4);
        assert_eq!(estimate_mv(&c, 16, 16, 16, &r, 0), MotionVector::ZERO);
    }

    #[test]
    fn chosen_vector_is_sad_optimal() {
        let r = noise(48, 48, 4);
        let c = noise(48, 48, 5);
        let range = 4;
        for (x, y) in [(0, 0), (16, 16), (32, 32), (16, 0)] {
            let v = estimate_mv(&c, x, y, 16, &r, range);
            let best = sad(
                &c,
                x,
                y,
                &r,
                (x as i32 - v.vx) as usize,
                (y as i32 - v.vy) as usize,
                16,
            );
            for vy in -range..=range {
                for vx in -range..=range {
                    let (rx, ry) = (x as i32 - vx, y as i32 - vy);
                    if rx < 0 || ry < 0 || rx + 16 > 48 || ry + 16 > 48 {
                        continue;
                    }
                    assert!(best <= sad(&c, x, y, &r, rx as usize, ry as usize, 16));
                }
            }
        }
    }

    #[test]
    fn translated_frame_interior_magnitudes() {
        let r = noise(128, 128, 6);
        let c = shifted(&r, 2, -3);
        let tree = partition_dims(128, 128, 64, 16).unwrap();
        let field = estimate_field(1, &c, &r, &tree, 4).unwrap();
        for cu in tree.cus.iter().filter(|cu| !tree.is_border(cu)) {
            let d = field.magnitude(cu.index);
            assert!((d - 13f64.sqrt()).abs() < 1e-12, "cu {}", cu.index);
        }
    }
}
