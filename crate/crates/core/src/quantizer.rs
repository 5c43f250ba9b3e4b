//! Uniform reconstruction quantization (URQ) and rate-distortion optimized
//! quantization (RDOQ).
//!
//! `QStep = 2^((QP − 4) / 6)`, so it grows by about 12% per QP and doubles
//! every six. The multiplication factor `m` and scaling factor `s` come from
//! the six-entry tables below, indexed by `QP mod 6`; `m · s ≈ 2^20`.
//!
//! Forward: `t = sign(X) · ((|X| · m + f) >> qbits)` with
//! `qbits = 21 + ⌊QP/6⌋ − log2 N` and `f = 2^(qbits − 1)`.
//! Inverse: `X' = t · s · 2^⌊QP/6⌋ / 2^(log2 N − 1)`, truncated toward zero.

use crate::entropy;
use crate::error::{Error, Result};

pub const MAX_QP: i32 = 51;

/// Largest representable level magnitude.
pub const MAX_LEVEL: i32 = (1 << 15) - 1;

/// Multiplication factors for `QP mod 6`.
pub const M_TABLE: [i64; 6] = [26214, 23302, 20560, 18396, 16384, 14564];
/// Scaling factors for `QP mod 6`.
pub const S_TABLE: [i64; 6] = [40, 45, 51, 57, 64, 72];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantParams {
    pub qp: i32,
    pub n: usize,
    pub qstep: f64,
    pub m: i64,
    pub s: i64,
    /// Rounding offset added before the `qbits` shift.
    pub f: i64,
    pub qbits: u32,
}

pub fn qstep(qp: i32) -> f64 {
    2f64.powf((qp as f64 - 4.0) / 6.0)
}

pub fn quant_params(qp: i32, n: usize) -> Result<QuantParams> {
    if !(0..=MAX_QP).contains(&qp) {
        return Err(Error::Config(format!("QP {qp} outside [0, {MAX_QP}]")));
    }
    let log2n = match n {
        4 | 8 | 16 | 32 => n.trailing_zeros(),
        _ => {
            return Err(Error::Config(format!(
                "block size must be 4, 8, 16 or 32, got {n}"
            )))
        }
    };
    let per = (qp / 6) as u32;
    let rem = (qp % 6) as usize;
    let qbits = 21 + per - log2n;
    Ok(QuantParams {
        qp,
        n,
        qstep: qstep(qp),
        m: M_TABLE[rem],
        s: S_TABLE[rem],
        f: 1 << (qbits - 1),
        qbits,
    })
}

impl QuantParams {
    /// Right shift of the inverse quantizer, `log2 N − 1`.
    fn dequant_shift(&self) -> u32 {
        self.n.trailing_zeros() - 1
    }

    /// Level magnitude before rounding, `|X|·m / 2^qbits`.
    pub fn scaled(&self, coeff: i32) -> f64 {
        (coeff as i64).unsigned_abs() as f64 * self.m as f64 / (1u64 << self.qbits) as f64
    }

    pub fn quantize(&self, coeff: i32) -> i32 {
        let a = (coeff as i64).abs();
        let level = ((a * self.m + self.f) >> self.qbits).min(MAX_LEVEL as i64) as i32;
        if coeff < 0 {
            -level
        } else {
            level
        }
    }

    pub fn dequantize(&self, level: i32) -> i32 {
        let num = (level as i64 * self.s) << (self.qp / 6);
        (num / (1i64 << self.dequant_shift())) as i32
    }

    /// Spacing between consecutive reconstruction values, in coefficient units.
    pub fn inverse_step(&self) -> f64 {
        (self.s << (self.qp / 6)) as f64 / (1u64 << self.dequant_shift()) as f64
    }
}

pub fn urq_quantize(coeff: i32, qp: i32, n: usize) -> Result<i32> {
    Ok(quant_params(qp, n)?.quantize(coeff))
}

pub fn urq_dequantize(level: i32, qp: i32, n: usize) -> Result<i32> {
    Ok(quant_params(qp, n)?.dequantize(level))
}

/// Lagrangian settings for RDOQ.
///
/// `lambda` weighs bits against squared error measured on transform
/// coefficients, so it already includes the transform's gain for the block
/// size it was built for.
#[derive(Debug, Clone, Copy)]
pub struct RdoqConfig {
    pub lambda: f64,
    pub bit_estimator: fn(i32) -> u32,
}

impl RdoqConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Config(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(RdoqConfig {
            lambda,
            bit_estimator: entropy::level_bits,
        })
    }

    /// Default schedule `0.57 · 2^((QP − 12)/3)` in sample units, rescaled to
    /// the coefficient domain of an `n`×`n` block.
    pub fn for_qp(qp: i32, n: usize) -> Result<Self> {
        let log2n = n.trailing_zeros() as i32;
        let gain = 2f64.powi(2 * (7 - log2n));
        Self::new(sample_lambda(qp) * gain)
    }
}

pub fn sample_lambda(qp: i32) -> f64 {
    0.57 * 2f64.powf((qp as f64 - 12.0) / 3.0)
}

/// `J(λ, l) = (X − X'(l))² + λ · b(l)`.
pub fn rd_cost(coeff: i32, level: i32, params: &QuantParams, cfg: &RdoqConfig) -> f64 {
    let err = coeff as f64 - params.dequantize(level) as f64;
    err * err + cfg.lambda * (cfg.bit_estimator)(level) as f64
}

/// The three RDOQ candidates `{0, l1, l1 + 1}` with `l1 = ⌊|X|·m / 2^qbits⌋`,
/// carrying the sign of `X`.
pub fn rdoq_candidates(coeff: i32, params: &QuantParams) -> [i32; 3] {
    let a = (coeff as i64).abs();
    let l1 = ((a * params.m) >> params.qbits).min(MAX_LEVEL as i64 - 1) as i32;
    let sign = if coeff < 0 { -1 } else { 1 };
    [0, sign * l1, sign * (l1 + 1)]
}

/// Picks the minimum-cost candidate; ties go to the smaller magnitude.
pub fn rdoq_level(coeff: i32, params: &QuantParams, cfg: &RdoqConfig) -> i32 {
    if coeff == 0 {
        return 0;
    }
    let mut best = 0;
    let mut best_cost = rd_cost(coeff, 0, params, cfg);
    for l in rdoq_candidates(coeff, params).into_iter().skip(1) {
        let c = rd_cost(coeff, l, params, cfg);
        if c < best_cost {
            best = l;
            best_cost = c;
        }
    }
    best
}

pub fn rdoq_quantize(coeffs: &[i32], qp: i32, n: usize, cfg: &RdoqConfig) -> Result<Vec<i32>> {
    let params = quant_params(qp, n)?;
    if coeffs.len() != n * n {
        return Err(Error::Structural(format!(
            "block has {} coefficients, expected {n}x{n}",
            coeffs.len()
        )));
    }
    Ok(coeffs
        .iter()
        .map(|&x| rdoq_level(x, &params, cfg))
        .collect())
}
