//! Image quality and texture metrics.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::image::Plane;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn same_shape(a: &Plane, b: &Plane) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", a.width(), a.height()),
            actual: format!("{}x{}", b.width(), b.height()),
        });
    }
    if a.data().is_empty() {
        return Err(Error::EmptyInput("image has no pixels".into()));
    }
    Ok(())
}

pub fn mse(a: &Plane, b: &Plane) -> Result<f64> {
    same_shape(a, b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// 8-bit PSNR in dB; `+inf` for identical images.
pub fn psnr(a: &Plane, b: &Plane) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / m).log10())
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let mid = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - mid;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

/// Separable valid-mode Gaussian filter of a row-major `w×h` field.
fn filter_valid(src: &[f64], w: usize, h: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; ow * h];
    for r in 0..h {
        let line = &src[r * w..(r + 1) * w];
        for c in 0..ow {
            rows[r * ow + c] = k.iter().zip(&line[c..]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = k.iter().enumerate().map(|(i, a)| a * rows[(r + i) * ow + c]).sum();
        }
    }
    out
}

/// Mean SSIM over all valid 11×11 Gaussian windows (σ = 1.5, K1 = 0.01,
/// K2 = 0.03, L = 255).
pub fn ssim(a: &Plane, b: &Plane) -> Result<f64> {
    same_shape(a, b)?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::InvalidSize(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels"
        )));
    }
    let x: Vec<f64> = a.data().iter().map(|&v| f64::from(v)).collect();
    let y: Vec<f64> = b.data().iter().map(|&v| f64::from(v)).collect();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let k = gaussian_kernel();
    let [mx, my, mxx, myy, mxy] = [&x, &y, &xx, &yy, &xy].map(|f| filter_valid(f, w, h, &k));
    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = mxx[i] - ux * ux;
            let vy = myy[i] - uy * uy;
            let cov = mxy[i] - ux * uy;
            ((2.0 * ux * uy + SSIM_C1) * (2.0 * cov + SSIM_C2)) / ((ux * ux + uy * uy + SSIM_C1) * (vx + vy + SSIM_C2))
        })
        .sum();
    Ok(total / mx.len() as f64)
}

/// One point of a rate-distortion curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint {
    /// Bits per pixel.
    pub rate: f64,
    /// dB.
    pub psnr: f64,
    pub ssim: f64,
}

const BD_MIN_POINTS: usize = 4;

fn cubic_fit(psnr: &[f64], log_rate: &[f64]) -> Result<[f64; 4]> {
    let m = psnr.len();
    let a = DMatrix::from_fn(m, 4, |r, c| psnr[r].powi(c as i32));
    let b = DVector::from_column_slice(log_rate);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidParameter(format!("cubic fit failed: {e}")))?;
    Ok([sol[0], sol[1], sol[2], sol[3]])
}

fn cubic_integral(p: &[f64; 4], lo: f64, hi: f64) -> f64 {
    let prim = |x: f64| p[0] * x + p[1] * x * x / 2.0 + p[2] * x.powi(3) / 3.0 + p[3] * x.powi(4) / 4.0;
    prim(hi) - prim(lo)
}

fn check_curve(points: &[RdPoint], which: &str) -> Result<()> {
    if points.len() < BD_MIN_POINTS {
        return Err(Error::InvalidParameter(format!(
            "{which} curve needs at least {BD_MIN_POINTS} points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p.rate > 0.0 && p.rate.is_finite() && p.psnr.is_finite()))
    {
        return Err(Error::InvalidParameter(format!(
            "{which} curve has unusable point rate={} psnr={}",
            p.rate, p.psnr
        )));
    }
    Ok(())
}

/// Average bitrate difference (percent) of `test` against `anchor` at equal
/// PSNR; negative means `test` needs fewer bits.
pub fn bd_rate(anchor: &[RdPoint], test: &[RdPoint]) -> Result<f64> {
    check_curve(anchor, "anchor")?;
    check_curve(test, "test")?;
    let fit = |pts: &[RdPoint]| -> Result<([f64; 4], f64, f64)> {
        let q: Vec<f64> = pts.iter().map(|p| p.psnr).collect();
        let r: Vec<f64> = pts.iter().map(|p| p.rate.ln()).collect();
        let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((cubic_fit(&q, &r)?, lo, hi))
    };
    let (pa, alo, ahi) = fit(anchor)?;
    let (pt, tlo, thi) = fit(test)?;
    let lo = alo.max(tlo);
    let hi = ahi.min(thi);
    if hi <= lo {
        return Err(Error::InvalidParameter("RD curves do not overlap in PSNR".into()));
    }
    let avg = (cubic_integral(&pt, lo, hi) - cubic_integral(&pa, lo, hi)) / (hi - lo);
    Ok((avg.exp() - 1.0) * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RunDirection {
    #[default]
    Horizontal,
    Vertical,
}

/// Gray-level non-uniformity of the run-length matrix: the image is
/// quantized into `levels` equal bins over `[0, 255]` and maximal runs are
/// counted along `direction`.
pub fn glnu(image: &Plane, levels: usize, direction: RunDirection) -> Result<f64> {
    if image.data().is_empty() {
        return Err(Error::EmptyInput("image has no pixels".into()));
    }
    if !(1..=256).contains(&levels) {
        return Err(Error::InvalidParameter(format!(
            "levels must be in 1..=256, got {levels}"
        )));
    }
    let bin = |v: u8| usize::from(v) * levels / 256;
    let (outer, inner) = match direction {
        RunDirection::Horizontal => (image.height(), image.width()),
        RunDirection::Vertical => (image.width(), image.height()),
    };
    let at = |o: usize, i: usize| match direction {
        RunDirection::Horizontal => image.get(o, i),
        RunDirection::Vertical => image.get(i, o),
    };
    let mut runs_per_level = vec![0u64; levels];
    for o in 0..outer {
        let mut prev = bin(at(o, 0));
        runs_per_level[prev] += 1;
        for i in 1..inner {
            let g = bin(at(o, i));
            if g != prev {
                runs_per_level[g] += 1;
                prev = g;
            }
        }
    }
    let total: u64 = runs_per_level.iter().sum();
    let sq: f64 = runs_per_level.iter().map(|&r| (r as f64) * (r as f64)).sum();
    Ok(sq / total as f64)
}
