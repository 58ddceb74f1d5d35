//! Uniform deadzone scalar quantization with H.264-style step doubling.

use nalgebra::DMatrix;

use crate::transforms::CoeffBlock;

/// Rounding offset: a coefficient needs `|c|/step ≥ 2/3` to leave the zero bin.
pub const DEADZONE_OFFSET: f64 = 1.0 / 3.0;

/// Step size for a quantization parameter; doubles every 6 QP.
pub fn qstep(qp: u8) -> f64 {
    0.625 * 2f64.powf(f64::from(qp) / 6.0)
}

/// Lagrange multiplier for mode decisions.
pub fn lambda(qp: u8, scale: f64) -> f64 {
    scale * 2f64.powf((f64::from(qp) - 12.0) / 3.0)
}

pub fn quantize_coeff(c: f64, step: f64) -> i32 {
    let mag = (c.abs() / step + DEADZONE_OFFSET).floor() as i32;
    if c < 0.0 {
        -mag
    } else {
        mag
    }
}

pub fn dequantize_level(level: i32, step: f64) -> f64 {
    f64::from(level) * step
}

/// Row-major quantized levels of a coefficient block.
pub fn quantize(coeffs: &CoeffBlock, step: f64) -> Vec<i32> {
    let (rows, cols) = coeffs.shape();
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push(quantize_coeff(coeffs[(r, c)], step));
        }
    }
    out
}

pub fn dequantize(levels: &[i32], n: usize, step: f64) -> CoeffBlock {
    DMatrix::from_row_iterator(n, n, levels.iter().map(|&l| dequantize_level(l, step)))
}
