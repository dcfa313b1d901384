//! Reconstruction quality metrics.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

pub fn mse(reference: &[f64], test: &[f64]) -> Result<f64> {
    if reference.len() != test.len() || reference.is_empty() {
        return Err(Error::Shape(format!("cannot compare {} and {} values", reference.len(), test.len())));
    }
    Ok(reference.iter().zip(test).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / reference.len() as f64)
}

/// `10 log10(S_max^2 / MSE)` with `S_max` the largest reference value;
/// `+inf` for identical inputs.
pub fn psnr(reference: &[f64], test: &[f64]) -> Result<f64> {
    let e = mse(reference, test)?;
    if e == 0.0 {
        return Ok(f64::INFINITY);
    }
    let peak = reference.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    Ok(10.0 * math::log10(peak * peak / e))
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

pub fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut w = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = math::exp(-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA));
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Mean SSIM of two `height x width` row-major planes over all window
/// positions that fit inside the image (11x11 Gaussian, sigma 1.5).
pub fn ssim(a: &[f64], b: &[f64], width: usize, height: usize, data_range: f64) -> Result<f64> {
    if a.len() != width * height || b.len() != a.len() {
        return Err(Error::Shape(format!("planes of {} and {} values for {width}x{height}", a.len(), b.len())));
    }
    if width < SSIM_WINDOW || height < SSIM_WINDOW {
        return Err(Error::InvalidArgument(format!("SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels")));
    }
    let w = gaussian_window();
    let filt = |x: &dyn Fn(usize) -> f64| separable_valid(x, width, height, &w);
    let mu_a = filt(&|i| a[i]);
    let mu_b = filt(&|i| b[i]);
    let aa = filt(&|i| a[i] * a[i]);
    let bb = filt(&|i| b[i] * b[i]);
    let ab = filt(&|i| a[i] * b[i]);
    let c1 = (K1 * data_range) * (K1 * data_range);
    let c2 = (K2 * data_range) * (K2 * data_range);
    let mut total = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = aa[i] - ma * ma;
        let vb = bb[i] - mb * mb;
        let cov = ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    Ok(total / mu_a.len() as f64)
}

fn separable_valid(x: &dyn Fn(usize) -> f64, width: usize, height: usize, w: &[f64]) -> Vec<f64> {
    let k = w.len();
    let ow = width - k + 1;
    let oh = height - k + 1;
    let mut tmp = vec![0.0; height * ow];
    for r in 0..height {
        for c in 0..ow {
            tmp[r * ow + c] = (0..k).map(|j| w[j] * x(r * width + c + j)).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = (0..k).map(|j| w[j] * tmp[(r + j) * ow + c]).sum();
        }
    }
    out
}

/// Per-channel SSIM averaged over channels.
pub fn ssim_multichannel(a: &[Vec<f64>], b: &[Vec<f64>], width: usize, height: usize, data_range: f64) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Shape("channel counts differ or are zero".into()));
    }
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += ssim(x, y, width, height, data_range)?;
    }
    Ok(s / a.len() as f64)
}

/// `20 log10(|x| / reference)` floored at `floor_db`.
pub fn to_dbfs(values: &[f64], reference: f64, floor_db: f64) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            if v <= 0.0 || reference <= 0.0 {
                floor_db
            } else {
                (20.0 * math::log10(v / reference)).max(floor_db)
            }
        })
        .collect()
}
