//! Integer DCT-II (4 to 32 points) and the 4×4 DST-VII.
//!
//! Basis rows are scaled so that the DC row is all 64s. The N-point DCT is
//! taken from the 32-point matrix by row subsampling, which reproduces the
//! familiar 4×4 core `[64 64 64 64; 83 36 −36 −83; ...]`.
//!
//! Scaling contract: the forward transform runs two separable stages with
//! right shifts `log2 N − 1` and `log2 N + 6`, the inverse with `7` and `12`.
//! With these shifts a coefficient equals the orthonormal DCT coefficient times
//! `2^(7 − log2 N)`, which is the scale the quantizer's `qbits` assumes.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    Dct,
    Dst,
}

/// `64·√2·cos(π·m/64)` magnitudes for `m = 0..=32`, with the DC entry left
/// out (DC rows use 64).
const COS_TABLE: [i32; 33] = [
    0, 90, 90, 90, 89, 88, 87, 85, 83, 82, 80, 78, 75, 73, 70, 67, 64, 61, 57, 54, 50, 46, 43, 38,
    36, 31, 25, 22, 18, 13, 9, 4, 0,
];

const DST4: [i32; 16] = [
    29, 55, 74, 84, //
    74, 74, 0, -74, //
    84, -29, -74, 55, //
    55, -84, 74, -29,
];

fn dct32_entry(k: usize, n: usize) -> i32 {
    if k == 0 {
        return 64;
    }
    let m = ((2 * n + 1) * k) % 128;
    let m = if m > 64 { 128 - m } else { m };
    if m > 32 {
        -COS_TABLE[64 - m]
    } else {
        COS_TABLE[m]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformSpec {
    pub size: usize,
    pub kind: TransformKind,
    /// Row-major `size`×`size` basis; row `k` is frequency `k`.
    pub basis: Vec<i32>,
    /// Right shifts after the first and second forward stages.
    pub forward_shift: [u32; 2],
    /// Right shifts after the first and second inverse stages.
    pub inverse_shift: [u32; 2],
}

impl TransformSpec {
    pub fn dct(size: usize) -> Result<Self> {
        let log2 = log2_size(size)?;
        let step = 32 / size;
        let mut basis = Vec::with_capacity(size * size);
        for k in 0..size {
            for n in 0..size {
                basis.push(dct32_entry(k * step, n));
            }
        }
        Ok(TransformSpec {
            size,
            kind: TransformKind::Dct,
            basis,
            forward_shift: [log2 - 1, log2 + 6],
            inverse_shift: [7, 12],
        })
    }

    pub fn dst4() -> Self {
        TransformSpec {
            size: 4,
            kind: TransformKind::Dst,
            basis: DST4.to_vec(),
            forward_shift: [1, 8],
            inverse_shift: [7, 12],
        }
    }

    /// DST for 4×4 intra residuals, DCT otherwise.
    pub fn for_block(size: usize, intra: bool) -> Result<Self> {
        if size == 4 && intra {
            Ok(Self::dst4())
        } else {
            Self::dct(size)
        }
    }

    pub fn log2_size(&self) -> u32 {
        self.size.trailing_zeros()
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.size * self.size {
            return Err(Error::Structural(format!(
                "block has {len} samples, transform expects {}x{}",
                self.size, self.size
            )));
        }
        Ok(())
    }
}

fn log2_size(size: usize) -> Result<u32> {
    match size {
        4 | 8 | 16 | 32 => Ok(size.trailing_zeros()),
        _ => Err(Error::Structural(format!(
            "transform size must be 4, 8, 16 or 32, got {size}"
        ))),
    }
}

#[inline]
fn round_shift(v: i64, shift: u32) -> i64 {
    if shift == 0 {
        v
    } else {
        (v + (1 << (shift - 1))) >> shift
    }
}

/// `out[k][j] = round(Σ_n basis[k][n] · src[j][n] >> shift)`: one stage,
/// transposing as it goes.
fn forward_stage(src: &[i64], basis: &[i32], n: usize, shift: u32) -> Vec<i64> {
    let mut out = vec![0i64; n * n];
    for j in 0..n {
        let row = &src[j * n..(j + 1) * n];
        for k in 0..n {
            let b = &basis[k * n..(k + 1) * n];
            let acc: i64 = b.iter().zip(row).map(|(&c, &x)| c as i64 * x).sum();
            out[k * n + j] = round_shift(acc, shift);
        }
    }
    out
}

/// `out[j][n] = round(Σ_k basis[k][n] · src[k][j] >> shift)`.
fn inverse_stage(src: &[i64], basis: &[i32], n: usize, shift: u32) -> Vec<i64> {
    let mut out = vec![0i64; n * n];
    for j in 0..n {
        for m in 0..n {
            let mut acc = 0i64;
            for k in 0..n {
                acc += basis[k * n + m] as i64 * src[k * n + j];
            }
            out[j * n + m] = round_shift(acc, shift);
        }
    }
    out
}

/// Forward 2-D transform of a row-major residual block. The DC coefficient
/// lands at index 0.
pub fn forward(residual: &[i32], spec: &TransformSpec) -> Result<Vec<i32>> {
    spec.check(residual.len())?;
    let n = spec.size;
    let src: Vec<i64> = residual.iter().map(|&v| v as i64).collect();
    // First stage runs along rows and leaves the result transposed, so the
    // second stage again runs along rows.
    let t = forward_stage(&src, &spec.basis, n, spec.forward_shift[0]);
    let c = forward_stage(&t, &spec.basis, n, spec.forward_shift[1]);
    Ok(c.into_iter().map(|v| v as i32).collect())
}

pub fn inverse(coeffs: &[i32], spec: &TransformSpec) -> Result<Vec<i32>> {
    spec.check(coeffs.len())?;
    let n = spec.size;
    let src: Vec<i64> = coeffs.iter().map(|&v| v as i64).collect();
    let t = inverse_stage(&src, &spec.basis, n, spec.inverse_shift[0]);
    let r = inverse_stage(&t, &spec.basis, n, spec.inverse_shift[1]);
    Ok(r.into_iter().map(|v| v as i32).collect())
}

/// Euclidean distance of coefficient `(i, j)` from the DC position.
pub fn coefficient_distance(i: usize, j: usize) -> f64 {
    ((i * i + j * j) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn four_point_core_matrix() {
        let t = TransformSpec::dct(4).unwrap();
        assert_eq!(
            t.basis,
            vec![64, 64, 64, 64, 83, 36, -36, -83, 64, -64, -64, 64, 36, -83, 83, -36]
        );
    }

    #[test]
    fn thirtytwo_point_first_row() {
        let t = TransformSpec::dct(32).unwrap();
        assert_eq!(
            &t.basis[32..48],
            &[90, 90, 88, 85, 82, 78, 73, 67, 61, 54, 46, 38, 31, 22, 13, 4]
        );
        assert_eq!(&t.basis[48..52], &[-4, -13, -22, -31]);
    }

    #[test]
    fn ac_rows_sum_to_zero_and_near_orthogonal() {
        for n in [4, 8, 16, 32] {
            let t = TransformSpec::dct(n).unwrap();
            for k in 1..n {
                let s: i32 = t.basis[k * n..(k + 1) * n].iter().sum();
                assert_eq!(s, 0, "row {k} of {n}-point");
            }
            let scale = (64 * 64 * n) as f64;
            for a in 0..n {
                for b in 0..n {
                    let dot: i64 = (0..n)
                        .map(|i| t.basis[a * n + i] as i64 * t.basis[b * n + i] as i64)
                        .sum();
                    let expect = if a == b { scale } else { 0.0 };
                    assert!(
                        (dot as f64 - expect).abs() <= 0.02 * scale,
                        "n={n} ({a},{b}) dot={dot}"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_and_constant_blocks() {
        for n in [4, 8, 16, 32] {
            let t = TransformSpec::dct(n).unwrap();
            assert!(forward(&vec![0; n * n], &t)
                .unwrap()
                .iter()
                .all(|&c| c == 0));
            assert!(inverse(&vec![0; n * n], &t)
                .unwrap()
                .iter()
                .all(|&c| c == 0));
            let c = forward(&vec![37; n * n], &t).unwrap();
            assert_ne!(c[0], 0);
            assert!(c[1..].iter().all(|&v| v == 0), "n={n}");
        }
    }

    #[test]
    fn dc_only_inverse_is_constant() {
        for n in [4, 8, 16, 32] {
            let t = TransformSpec::dct(n).unwrap();
            let mut c = vec![0; n * n];
            c[0] = 1000;
            let r = inverse(&c, &t).unwrap();
            let (lo, hi) = (r.iter().min().unwrap(), r.iter().max().unwrap());
            assert!(hi - lo <= 1);
        }
    }

    /// Row-sum norm of `I − G/k`, where `G` is the Gram matrix of the basis
    /// (rows against rows when `rows` is set, columns otherwise) and `k` its
    /// nominal scale.
    fn basis_deviation(t: &TransformSpec, rows: bool) -> f64 {
        let n = t.size;
        let k = (4096 * n) as f64;
        let b = |r: usize, c: usize| t.basis[r * n + c] as f64;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let g: f64 = (0..n)
                            .map(|m| {
                                if rows {
                                    b(i, m) * b(j, m)
                                } else {
                                    b(m, i) * b(m, j)
                                }
                            })
                            .sum();
                        ((i == j) as u8 as f64 - g / k).abs()
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn all_specs() -> Vec<TransformSpec> {
        let mut v: Vec<TransformSpec> = [4, 8, 16, 32]
            .map(|n| TransformSpec::dct(n).unwrap())
            .into();
        v.push(TransformSpec::dst4());
        v
    }

    #[test]
    fn four_point_round_trip_within_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t in [TransformSpec::dct(4).unwrap(), TransformSpec::dst4()] {
            for _ in 0..1000 {
                let x: Vec<i32> = (0..16).map(|_| rng.gen_range(-255..=255)).collect();
                let y = inverse(&forward(&x, &t).unwrap(), &t).unwrap();
                let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).max().unwrap();
                assert!(err <= 1, "{:?} err={err}", t.kind);
            }
        }
    }

    // The integer bases are only nearly orthogonal, so full 10-bit residuals
    // come back with an error proportional to their amplitude. 2-D error is
    // at most e(2 + e)·|x| for a 1-D deviation e, plus rounding.
    #[test]
    fn round_trip_bounded_by_basis_deviation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for t in all_specs() {
            let e = basis_deviation(&t, false);
            let n = t.size;
            for _ in 0..200 {
                let x: Vec<i32> = (0..n * n).map(|_| rng.gen_range(-1023..=1023)).collect();
                let y = inverse(&forward(&x, &t).unwrap(), &t).unwrap();
                let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).max().unwrap();
                let bound = e * (2.0 + e) * 1023.0 + 1.0;
                assert!(
                    err as f64 <= bound,
                    "{:?} n={n} err={err} bound={bound}",
                    t.kind
                );
            }
        }
    }

    #[test]
    fn coefficient_round_trip_bounded_by_basis_deviation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in all_specs() {
            let e = basis_deviation(&t, true);
            let n = t.size;
            for _ in 0..100 {
                let x: Vec<i32> = (0..n * n).map(|_| rng.gen_range(-255..=255)).collect();
                let c = forward(&x, &t).unwrap();
                let c2 = forward(&inverse(&c, &t).unwrap(), &t).unwrap();
                let peak = c.iter().map(|v| v.abs()).max().unwrap() as f64;
                let err = c.iter().zip(&c2).map(|(a, b)| (a - b).abs()).max().unwrap();
                // one sample of rounding error, carried through the forward gain
                let gain = (0..n)
                    .map(|r| {
                        t.basis[r * n..(r + 1) * n]
                            .iter()
                            .map(|v| v.abs() as f64)
                            .sum::<f64>()
                    })
                    .fold(0.0, f64::max);
                let shift = t.forward_shift[0] + t.forward_shift[1];
                let bound = e * (2.0 + e) * peak + gain * gain / (1u64 << shift) as f64 + 1.0;
                assert!(
                    err as f64 <= bound,
                    "{:?} n={n} err={err} bound={bound}",
                    t.kind
                );
            }
        }
    }

    #[test]
    fn linearity_within_rounding() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = TransformSpec::dct(8).unwrap();
        for _ in 0..100 {
            let x: Vec<i32> = (0..64).map(|_| rng.gen_range(-100..=100)).collect();
            let y: Vec<i32> = (0..64).map(|_| rng.gen_range(-100..=100)).collect();
            let (a, b) = (rng.gen_range(-4..=4), rng.gen_range(-4..=4));
            let mix: Vec<i32> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let fm = forward(&mix, &t).unwrap();
            let fx = forward(&x, &t).unwrap();
            let fy = forward(&y, &t).unwrap();
            for i in 0..64 {
                let lin = a * fx[i] + b * fy[i];
                assert!((fm[i] - lin).abs() <= (a.abs() + b.abs()).max(1), "i={i}");
            }
        }
    }

    #[test]
    fn gradient_energy_compaction() {
        for n in [8, 16, 32] {
            let t = TransformSpec::dct(n).unwrap();
            let x: Vec<i32> = (0..n * n)
                .map(|i| ((i % n) * 3 + (i / n) * 2) as i32 - 60)
                .collect();
            let c = forward(&x, &t).unwrap();
            let total: f64 = c.iter().map(|&v| (v as f64).powi(2)).sum();
            let h = n / 2;
            let tl: f64 = (0..h)
                .flat_map(|r| (0..h).map(move |col| (r, col)))
                .map(|(r, col)| (c[r * n + col] as f64).powi(2))
                .sum();
            assert!(tl / total >= 0.9, "n={n} ratio={}", tl / total);
        }
    }

    #[test]
    fn size_mismatch_errors() {
        let t = TransformSpec::dct(8).unwrap();
        assert!(forward(&[0; 16], &t).is_err());
        assert!(inverse(&[0; 16], &t).is_err());
        assert!(TransformSpec::dct(64).is_err());
    }

    #[test]
    fn distances() {
        assert_eq!(coefficient_distance(0, 0), 0.0);
        assert_eq!(coefficient_distance(3, 4), 5.0);
        assert_eq!(coefficient_distance(1, 0), coefficient_distance(0, 1));
    }
}
