//! MSB-first bit I/O, Exp-Golomb codes and run-level coding of coefficient
//! blocks.
//!
//! A block is scanned in zigzag order and written as `(run, level)` pairs:
//! `run` zeros precede each nonzero `level`. The run is an unsigned
//! Exp-Golomb code, the level a signed one. The reserved run value `n²`
//! (never a real run) terminates the block.

use crate::error::{Error, Result};

const MAX_LEADING_ZEROS: u32 = 32;

#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u8,
    filled: u8,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total bits written so far.
    pub fn bit_len(&self) -> u64 {
        self.bytes.len() as u64 * 8 + u64::from(self.filled)
    }

    pub fn put_bit(&mut self, bit: bool) {
        self.acc = (self.acc << 1) | u8::from(bit);
        self.filled += 1;
        if self.filled == 8 {
            self.bytes.push(self.acc);
            self.acc = 0;
            self.filled = 0;
        }
    }

    /// Writes the low `count` bits of `value`, most significant first.
    pub fn put_bits(&mut self, value: u64, count: u32) {
        debug_assert!(count <= 64);
        for i in (0..count).rev() {
            self.put_bit((value >> i) & 1 == 1);
        }
    }

    pub fn put_ue(&mut self, value: u64) {
        let v = value + 1;
        let len = 64 - v.leading_zeros();
        self.put_bits(0, len - 1);
        self.put_bits(v, len);
    }

    pub fn put_se(&mut self, value: i64) {
        self.put_ue(signed_to_code(value));
    }

    /// Flushes with zero padding to the next byte boundary.
    pub fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.bytes.push(self.acc << (8 - self.filled));
        }
        self.bytes
    }
}

#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
    /// Bit offset of `bytes[0]` within the enclosing file.
    base: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self::with_base(bytes, 0)
    }

    pub fn with_base(bytes: &'a [u8], base: u64) -> Self {
        BitReader { bytes, pos: 0, base }
    }

    /// Absolute bit offset of the next bit.
    pub fn offset(&self) -> u64 {
        self.base + self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.bytes.len() as u64 * 8 - self.pos
    }

    pub fn get_bit(&mut self) -> Result<bool> {
        let byte = (self.pos / 8) as usize;
        if byte >= self.bytes.len() {
            return Err(Error::corrupt(self.offset(), "unexpected end of stream"));
        }
        let bit = (self.bytes[byte] >> (7 - (self.pos % 8))) & 1 == 1;
        self.pos += 1;
        Ok(bit)
    }

    pub fn get_bits(&mut self, count: u32) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..count {
            v = (v << 1) | u64::from(self.get_bit()?);
        }
        Ok(v)
    }

    pub fn get_ue(&mut self) -> Result<u64> {
        let start = self.offset();
        let mut zeros = 0u32;
        while !self.get_bit()? {
            zeros += 1;
            if zeros > MAX_LEADING_ZEROS {
                return Err(Error::corrupt(start, "Exp-Golomb prefix too long"));
            }
        }
        let suffix = self.get_bits(zeros)?;
        Ok(((1u64 << zeros) | suffix) - 1)
    }

    pub fn get_se(&mut self) -> Result<i64> {
        Ok(code_to_signed(self.get_ue()?))
    }
}

/// `k > 0 → 2k − 1`, `k ≤ 0 → −2k`.
pub fn signed_to_code(k: i64) -> u64 {
    if k > 0 {
        (2 * k - 1) as u64
    } else {
        (-2 * k) as u64
    }
}

pub fn code_to_signed(code: u64) -> i64 {
    if code % 2 == 1 {
        code.div_ceil(2) as i64
    } else {
        -((code / 2) as i64)
    }
}

/// Length in bits of the unsigned Exp-Golomb code for `value`.
pub fn ue_len(value: u64) -> u64 {
    let len = u64::from(64 - (value + 1).leading_zeros());
    2 * len - 1
}

/// Zigzag scan order for an `n×n` block as `(row, col)` pairs: JPEG order,
/// anti-diagonal by anti-diagonal, alternating direction.
pub fn zigzag(n: usize) -> Vec<(usize, usize)> {
    let mut order = Vec::with_capacity(n * n);
    for s in 0..(2 * n - 1) {
        let lo = s.saturating_sub(n - 1);
        let hi = s.min(n - 1);
        if s % 2 == 0 {
            for r in (lo..=hi).rev() {
                order.push((r, s - r));
            }
        } else {
            for r in lo..=hi {
                order.push((r, s - r));
            }
        }
    }
    order
}

/// Precomputed scan for one block size.
#[derive(Debug, Clone)]
pub struct BlockCoder {
    n: usize,
    scan: Vec<usize>,
}

impl BlockCoder {
    pub fn new(n: usize) -> Self {
        let scan = zigzag(n).into_iter().map(|(r, c)| r * n + c).collect();
        BlockCoder { n, scan }
    }

    fn eob(&self) -> u64 {
        (self.n * self.n) as u64
    }

    /// Writes row-major `levels`.
    pub fn encode(&self, levels: &[i32], w: &mut BitWriter) {
        debug_assert_eq!(levels.len(), self.n * self.n);
        let mut run = 0u64;
        for &idx in &self.scan {
            let level = levels[idx];
            if level == 0 {
                run += 1;
            } else {
                w.put_ue(run);
                w.put_se(i64::from(level));
                run = 0;
            }
        }
        w.put_ue(self.eob());
    }

    /// Exact number of bits [`encode`](Self::encode) would write.
    pub fn cost(&self, levels: &[i32]) -> u64 {
        let mut bits = 0;
        let mut run = 0u64;
        for &idx in &self.scan {
            let level = levels[idx];
            if level == 0 {
                run += 1;
            } else {
                bits += ue_len(run) + ue_len(signed_to_code(i64::from(level)));
                run = 0;
            }
        }
        bits + ue_len(self.eob())
    }

    /// Reads one block back into row-major levels.
    pub fn decode(&self, r: &mut BitReader<'_>) -> Result<Vec<i32>> {
        let total = self.n * self.n;
        let mut levels = vec![0i32; total];
        let mut pos = 0usize;
        loop {
            let at = r.offset();
            let run = r.get_ue()?;
            if run == self.eob() {
                return Ok(levels);
            }
            if run >= (total - pos) as u64 {
                return Err(Error::corrupt(at, format!("run {run} overflows block")));
            }
            pos += run as usize;
            let at = r.offset();
            let level = r.get_se()?;
            if level == 0 {
                return Err(Error::corrupt(at, "zero level in run-level pair"));
            }
            let level = i32::try_from(level).map_err(|_| Error::corrupt(at, format!("level {level} out of range")))?;
            levels[self.scan[pos]] = level;
            pos += 1;
        }
    }
}
