//! Intra predictors for square blocks, after the H.264 Intra_16×16 luma
//! modes. Only reconstructed pixels above and to the left are read.

use crate::error::{Error, Result};
use crate::image::Plane;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PredMode {
    Vertical = 0,
    Horizontal = 1,
    Dc = 2,
    Plane = 3,
}

impl PredMode {
    pub const ALL: [PredMode; 4] = [PredMode::Vertical, PredMode::Horizontal, PredMode::Dc, PredMode::Plane];

    pub fn bits(self) -> u64 {
        self as u64
    }

    pub fn from_bits(bits: u64) -> Option<Self> {
        Self::ALL.get(bits as usize).copied()
    }

    /// Whether the neighbours this mode reads exist for a block at
    /// `(row, col)`. DC is always usable.
    pub fn is_available(self, row: usize, col: usize) -> bool {
        match self {
            PredMode::Vertical => row > 0,
            PredMode::Horizontal => col > 0,
            PredMode::Dc => true,
            PredMode::Plane => row > 0 && col > 0,
        }
    }
}

/// Row-major `n×n` prediction for the block at `(row, col)`.
pub fn predict_block(recon: &Plane, row: usize, col: usize, n: usize, mode: PredMode) -> Result<Vec<u8>> {
    if !mode.is_available(row, col) {
        return Err(Error::ModeUnavailable { mode, row, col });
    }
    let top = |j: usize| i32::from(recon.get(row - 1, col + j));
    let left = |i: usize| i32::from(recon.get(row + i, col - 1));
    let mut out = vec![0u8; n * n];
    match mode {
        PredMode::Vertical => {
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = recon.get(row - 1, col + j);
                }
            }
        }
        PredMode::Horizontal => {
            for i in 0..n {
                out[i * n..(i + 1) * n].fill(recon.get(row + i, col - 1));
            }
        }
        PredMode::Dc => {
            let ni = n as i32;
            let dc = match (row > 0, col > 0) {
                (true, true) => {
                    let s: i32 = (0..n).map(top).sum::<i32>() + (0..n).map(left).sum::<i32>();
                    (s + ni) / (2 * ni)
                }
                (true, false) => ((0..n).map(top).sum::<i32>() + ni / 2) / ni,
                (false, true) => ((0..n).map(left).sum::<i32>() + ni / 2) / ni,
                (false, false) => 128,
            };
            out.fill(dc as u8);
        }
        PredMode::Plane => {
            let corner = i32::from(recon.get(row - 1, col - 1));
            // top(-1) and left(-1) both mean the corner pixel
            let t = |j: isize| if j < 0 { corner } else { top(j as usize) };
            let l = |i: isize| if i < 0 { corner } else { left(i as usize) };
            let half = (n / 2) as isize;
            let mut h = 0i32;
            let mut v = 0i32;
            for x in 1..=half {
                h += x as i32 * (t(half - 1 + x) - t(half - 1 - x));
                v += x as i32 * (l(half - 1 + x) - l(half - 1 - x));
            }
            let (b, c) = if n == 16 {
                ((5 * h + 32) >> 6, (5 * v + 32) >> 6)
            } else {
                // least-squares slope in 1/32 pixel units for other sizes
                let s: i32 = (1..=half as i32).map(|x| x * x).sum();
                (round_div(16 * h, s), round_div(16 * v, s))
            };
            let a = 16 * (l(n as isize - 1) + t(n as isize - 1));
            let centre = half as i32 - 1;
            for i in 0..n {
                for j in 0..n {
                    let p = (a + b * (j as i32 - centre) + c * (i as i32 - centre) + 16) >> 5;
                    out[i * n + j] = p.clamp(0, 255) as u8;
                }
            }
        }
    }
    Ok(out)
}

fn round_div(num: i32, den: i32) -> i32 {
    if num >= 0 {
        (num + den / 2) / den
    } else {
        -((-num + den / 2) / den)
    }
}

fn sad(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| u64::from(x.abs_diff(y))).sum()
}

/// Available mode with the smallest SAD against `original`; ties go to the
/// lowest mode number.
pub fn select_mode(recon: &Plane, row: usize, col: usize, n: usize, original: &[u8]) -> PredMode {
    let mut best = PredMode::Dc;
    let mut best_sad = u64::MAX;
    for mode in PredMode::ALL {
        if !mode.is_available(row, col) {
            continue;
        }
        let pred = predict_block(recon, row, col, n, mode).expect("mode checked available");
        let s = sad(original, &pred);
        if s < best_sad {
            best = mode;
            best_sad = s;
        }
    }
    best
}
