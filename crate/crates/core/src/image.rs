//! 8-bit grayscale planes and binary PGM (P5) I/O.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Plane {
    pub fn new(width: usize, height: usize, fill: u8) -> Self {
        Plane {
            width,
            height,
            data: vec![fill; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidSize(format!("empty image {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: format!("{} pixels", width * height),
                actual: format!("{} pixels", data.len()),
            });
        }
        Ok(Plane { width, height, data })
    }

    /// Builds a plane by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Plane { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.data[row * self.width + col] = value;
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.data
    }

    /// Copies the `n×n` block at `(row, col)` out as row-major values.
    pub fn block(&self, row: usize, col: usize, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(n * n);
        for r in row..row + n {
            out.extend_from_slice(&self.data[r * self.width + col..r * self.width + col + n]);
        }
        out
    }

    pub fn put_block(&mut self, row: usize, col: usize, n: usize, block: &[u8]) {
        for (i, chunk) in block.chunks_exact(n).enumerate() {
            let start = (row + i) * self.width + col;
            self.data[start..start + n].copy_from_slice(chunk);
        }
    }

    pub fn write_pgm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.data)
    }

    /// Reads a binary 8-bit PGM. Comments in the header are skipped.
    pub fn read_pgm<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| Error::ImageFormat(e.to_string()))?;
        Self::parse_pgm(&bytes)
    }

    pub fn parse_pgm(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let magic = next_token(bytes, &mut pos)?;
        if magic != b"P5" {
            return Err(Error::ImageFormat("not a binary PGM (P5)".into()));
        }
        let width = parse_uint(next_token(bytes, &mut pos)?)?;
        let height = parse_uint(next_token(bytes, &mut pos)?)?;
        let maxval = parse_uint(next_token(bytes, &mut pos)?)?;
        if maxval != 255 {
            return Err(Error::ImageFormat(format!(
                "only 8-bit PGM supported (maxval {maxval})"
            )));
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        let need = width * height;
        if bytes.len() < pos + need {
            return Err(Error::ImageFormat(format!(
                "truncated raster: need {need} bytes, have {}",
                bytes.len().saturating_sub(pos)
            )));
        }
        Plane::from_vec(width, height, bytes[pos..pos + need].to_vec())
    }
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::ImageFormat("truncated header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn parse_uint(tok: &[u8]) -> Result<usize> {
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::ImageFormat(format!("bad header field {:?}", String::from_utf8_lossy(tok))))
}
