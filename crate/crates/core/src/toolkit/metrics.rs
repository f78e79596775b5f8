use crate::error::{Error, Result};
use crate::grid::BlockGrid;
use crate::image::GrayImage;

/// Peak signal-to-noise ratio in dB; `+inf` for identical images.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.same_shape(b)?;
    let sse: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    if sse == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse as f64 / a.len() as f64;
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}

const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;

fn gaussian_kernel() -> [f64; WINDOW] {
    let mut k = [0.0; WINDOW];
    let c = (WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
    }
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable "valid" Gaussian filtering of a row-major `h x w` plane.
fn filter_valid(plane: &[f64], h: usize, w: usize, k: &[f64; WINDOW]) -> Vec<f64> {
    let (oh, ow) = (h - WINDOW + 1, w - WINDOW + 1);
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        for c in 0..ow {
            rows[r * ow + c] = (0..WINDOW).map(|i| k[i] * plane[r * w + c + i]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = (0..WINDOW).map(|i| k[i] * rows[(r + i) * ow + c]).sum();
        }
    }
    out
}

/// Mean structural similarity over all valid 11x11 Gaussian windows (sigma 1.5).
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    a.same_shape(b)?;
    let (h, w) = (a.height(), a.width());
    if h < WINDOW || w < WINDOW {
        return Err(Error::param(format!("SSIM needs at least {WINDOW}x{WINDOW} pixels, got {h}x{w}")));
    }
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let x: Vec<f64> = a.pixels().iter().map(|&v| v as f64).collect();
    let y: Vec<f64> = b.pixels().iter().map(|&v| v as f64).collect();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let k = gaussian_kernel();
    let [mx, my, sxx, syy, sxy] = [&x, &y, &xx, &yy, &xy].map(|p| filter_valid(p, h, w, &k));
    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / mx.len() as f64)
}

/// Minority-wrap pixels under the block shifts: per block, `min(w, n - w)` where
/// `w` counts pixels with `x + r' > 255`.
pub fn abnormal_count(image: &GrayImage, shifts: &[u8], grid: &BlockGrid) -> Result<usize> {
    if shifts.len() != grid.block_count() {
        return Err(Error::param(format!("{} shifts for {} blocks", shifts.len(), grid.block_count())));
    }
    Ok(shifts
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let n = grid.block_pixels();
            let wrapped = grid.block_pixel_indices(i).filter(|&p| image.pixels()[p] as u32 + s as u32 > 255).count();
            wrapped.min(n - wrapped)
        })
        .sum())
}

/// Fraction of differing bits; lengths must match.
pub fn ber(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("bit strings of length {} and {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count() as f64 / a.len() as f64)
}
