//! Per-channel PSNR and SSIM.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{max_sample, Frame, Plane};

/// Mean SSIM above which a reconstruction is reported as visually lossless.
pub const VISUALLY_LOSSLESS_SSIM: f64 = 0.95;

/// Side of the uniform SSIM window.
pub const SSIM_WINDOW: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SsimWindow {
    /// 8×8 box, stride 1.
    #[default]
    Uniform,
    /// 11×11 Gaussian, σ = 1.5, stride 1.
    Gaussian,
}

impl SsimWindow {
    pub fn size(self) -> usize {
        match self {
            SsimWindow::Uniform => SSIM_WINDOW,
            SsimWindow::Gaussian => 11,
        }
    }
}

fn same_dims(a: &Plane, b: &Plane) -> Result<()> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::Structural(format!(
            "planes differ in size: {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

/// Sum of squared differences.
pub fn sse(reference: &Plane, recon: &Plane) -> Result<u64> {
    same_dims(reference, recon)?;
    Ok(reference
        .data
        .iter()
        .zip(&recon.data)
        .map(|(&a, &b)| {
            let d = a as i64 - b as i64;
            (d * d) as u64
        })
        .sum())
}

/// PSNR from a mean squared error; `f64::INFINITY` when `mse` is zero.
pub fn psnr_from_mse(mse: f64, bit_depth: u32) -> f64 {
    if mse == 0.0 {
        return f64::INFINITY;
    }
    let max = max_sample(bit_depth) as f64;
    10.0 * (max * max / mse).log10()
}

pub fn psnr(reference: &Plane, recon: &Plane, bit_depth: u32) -> Result<f64> {
    let e = sse(reference, recon)?;
    Ok(psnr_from_mse(
        e as f64 / reference.data.len() as f64,
        bit_depth,
    ))
}

pub fn ssim(reference: &Plane, recon: &Plane, bit_depth: u32) -> Result<f64> {
    ssim_with(reference, recon, bit_depth, SsimWindow::Uniform)
}

fn ssim_constants(bit_depth: u32) -> (f64, f64) {
    let max = max_sample(bit_depth) as f64;
    ((0.01 * max).powi(2), (0.03 * max).powi(2))
}

#[inline]
fn local_ssim(mx: f64, my: f64, vx: f64, vy: f64, cxy: f64, c1: f64, c2: f64) -> f64 {
    ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
}

/// Mean local SSIM over every window position.
pub fn ssim_with(
    reference: &Plane,
    recon: &Plane,
    bit_depth: u32,
    window: SsimWindow,
) -> Result<f64> {
    same_dims(reference, recon)?;
    let k = window.size();
    if reference.width < k || reference.height < k {
        return Err(Error::Structural(format!(
            "plane {}x{} is smaller than the {k}x{k} SSIM window",
            reference.width, reference.height
        )));
    }
    let (c1, c2) = ssim_constants(bit_depth);
    match window {
        SsimWindow::Uniform => Ok(ssim_uniform(reference, recon, c1, c2)),
        SsimWindow::Gaussian => Ok(ssim_gaussian(reference, recon, c1, c2)),
    }
}

/// Box-window SSIM from integral images; sums are exact integers.
fn ssim_uniform(x: &Plane, y: &Plane, c1: f64, c2: f64) -> f64 {
    let (w, h) = (x.width, x.height);
    let stride = w + 1;
    let mut sums = vec![[0u64; 5]; stride * (h + 1)];
    for r in 0..h {
        let mut row = [0u64; 5];
        for c in 0..w {
            let a = x.data[r * w + c] as u64;
            let b = y.data[r * w + c] as u64;
            row[0] += a;
            row[1] += b;
            row[2] += a * a;
            row[3] += b * b;
            row[4] += a * b;
            let above = sums[r * stride + c + 1];
            let cell = &mut sums[(r + 1) * stride + c + 1];
            for i in 0..5 {
                cell[i] = above[i] + row[i];
            }
        }
    }
    let k = SSIM_WINDOW;
    let n = (k * k) as f64;
    let rows = h - k + 1;
    let cols = w - k + 1;
    let total: f64 = (0..rows)
        .into_par_iter()
        .map(|r| {
            let mut acc = 0.0;
            for c in 0..cols {
                let mut s = [0f64; 5];
                for (i, v) in s.iter_mut().enumerate() {
                    let t = sums[(r + k) * stride + c + k][i] + sums[r * stride + c][i]
                        - sums[r * stride + c + k][i]
                        - sums[(r + k) * stride + c][i];
                    *v = t as f64;
                }
                let mx = s[0] / n;
                let my = s[1] / n;
                let vx = s[2] / n - mx * mx;
                let vy = s[3] / n - my * my;
                let cxy = s[4] / n - mx * my;
                acc += local_ssim(mx, my, vx, vy, cxy, c1, c2);
            }
            acc
        })
        .sum();
    total / (rows * cols) as f64
}

fn gaussian_kernel() -> [f64; 11] {
    let mut k = [0f64; 11];
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - 5.0;
        *v = (-d * d / (2.0 * 1.5 * 1.5)).exp();
    }
    let s: f64 = k.iter().sum();
    k.map(|v| v / s)
}

fn ssim_gaussian(x: &Plane, y: &Plane, c1: f64, c2: f64) -> f64 {
    let g = gaussian_kernel();
    let (w, h) = (x.width, x.height);
    let rows = h - 10;
    let cols = w - 10;
    let total: f64 = (0..rows)
        .into_par_iter()
        .map(|r| {
            let mut acc = 0.0;
            for c in 0..cols {
                let mut s = [0f64; 5];
                for (dy, gy) in g.iter().enumerate() {
                    for (dx, gx) in g.iter().enumerate() {
                        let wgt = gy * gx;
                        let a = x.data[(r + dy) * w + c + dx] as f64;
                        let b = y.data[(r + dy) * w + c + dx] as f64;
                        s[0] += wgt * a;
                        s[1] += wgt * b;
                        s[2] += wgt * a * a;
                        s[3] += wgt * b * b;
                        s[4] += wgt * a * b;
                    }
                }
                let (mx, my) = (s[0], s[1]);
                acc += local_ssim(
                    mx,
                    my,
                    s[2] - mx * mx,
                    s[3] - my * my,
                    s[4] - mx * my,
                    c1,
                    c2,
                );
            }
            acc
        })
        .sum();
    total / (rows * cols) as f64
}

/// Quality of one reconstruction against its source, channels in G, B, R
/// order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub psnr: [f64; 3],
    pub ssim: [f64; 3],
    /// Mean of the three channel SSIMs.
    pub ssim_mean: f64,
}

impl QualityReport {
    pub fn visually_lossless(&self) -> bool {
        self.ssim_mean > VISUALLY_LOSSLESS_SSIM
    }

    pub fn annotation(&self) -> &'static str {
        if self.visually_lossless() {
            "visually-lossless"
        } else {
            ""
        }
    }
}

fn check_frames(reference: &[Frame], recon: &[Frame]) -> Result<()> {
    if reference.len() != recon.len() || reference.is_empty() {
        return Err(Error::Structural(format!(
            "cannot compare {} frames with {}",
            reference.len(),
            recon.len()
        )));
    }
    for (a, b) in reference.iter().zip(recon) {
        if a.width != b.width || a.height != b.height || a.bit_depth != b.bit_depth {
            return Err(Error::Structural("frame geometry differs".into()));
        }
    }
    Ok(())
}

pub fn frame_quality(reference: &Frame, recon: &Frame) -> Result<QualityReport> {
    sequence_quality(std::slice::from_ref(reference), std::slice::from_ref(recon))
}

/// Sequence quality: PSNR from the MSE pooled over all frames, SSIM averaged
/// over frames.
pub fn sequence_quality(reference: &[Frame], recon: &[Frame]) -> Result<QualityReport> {
    check_frames(reference, recon)?;
    let bd = reference[0].bit_depth;
    let per_frame: Vec<([u64; 3], [f64; 3])> = reference
        .par_iter()
        .zip(recon)
        .map(|(a, b)| {
            let mut e = [0u64; 3];
            let mut s = [0f64; 3];
            for c in 0..3 {
                e[c] = sse(&a.planes[c], &b.planes[c])?;
                s[c] = ssim(&a.planes[c], &b.planes[c], bd)?;
            }
            Ok((e, s))
        })
        .collect::<Result<_>>()?;
    let samples = (reference[0].width * reference[0].height * reference.len()) as f64;
    let mut psnr_out = [0f64; 3];
    let mut ssim_out = [0f64; 3];
    for c in 0..3 {
        let e: u64 = per_frame.iter().map(|f| f.0[c]).sum();
        psnr_out[c] = psnr_from_mse(e as f64 / samples, bd);
        ssim_out[c] = per_frame.iter().map(|f| f.1[c]).sum::<f64>() / per_frame.len() as f64;
    }
    Ok(QualityReport {
        psnr: psnr_out,
        ssim: ssim_out,
        ssim_mean: ssim_out.iter().sum::<f64>() / 3.0,
    })
}
