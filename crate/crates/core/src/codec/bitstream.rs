//! Fixed-width stream header.
//!
//! Layout (big-endian, 30 bytes): magic `GBTC`, version `u8 = 1`, transform
//! set `u8`, width `u16`, height `u16`, block size `u8`, qp `u8`, cluster
//! count `u8`, `m_min` `u8`, `rho` `f64`, `alpha` `f64`. Bit-packed block
//! records follow, MSB first, zero-padded to a byte boundary.

use super::{CodecConfig, TransformSet};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"GBTC";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 30;

pub fn write_header(cfg: &CodecConfig, out: &mut Vec<u8>) {
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(cfg.transforms as u8);
    out.extend_from_slice(&(cfg.width as u16).to_be_bytes());
    out.extend_from_slice(&(cfg.height as u16).to_be_bytes());
    out.push(cfg.n as u8);
    out.push(cfg.qp);
    out.push(cfg.k as u8);
    out.push(cfg.m_min as u8);
    out.extend_from_slice(&cfg.rho.to_be_bytes());
    out.extend_from_slice(&cfg.alpha.to_be_bytes());
}

pub fn read_header(bytes: &[u8]) -> Result<CodecConfig> {
    let prefix = bytes.len().min(MAGIC.len());
    if bytes[..prefix] != MAGIC[..prefix] {
        return Err(Error::corrupt(0, "bad magic"));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::corrupt(
            bytes.len() as u64 * 8,
            format!("header needs {HEADER_LEN} bytes, stream has {}", bytes.len()),
        ));
    }
    if bytes[4] != VERSION {
        return Err(Error::corrupt(32, format!("unsupported version {}", bytes[4])));
    }
    let transforms = TransformSet::from_byte(bytes[5])
        .ok_or_else(|| Error::corrupt(40, format!("unknown transform set {}", bytes[5])))?;
    let u16_at = |i: usize| usize::from(u16::from_be_bytes([bytes[i], bytes[i + 1]]));
    let f64_at = |i: usize| {
        let mut b = [0u8; 8];
        b.copy_from_slice(&bytes[i..i + 8]);
        f64::from_be_bytes(b)
    };
    let cfg = CodecConfig {
        width: u16_at(6),
        height: u16_at(8),
        n: usize::from(bytes[10]),
        qp: bytes[11],
        k: usize::from(bytes[12]),
        m_min: usize::from(bytes[13]),
        rho: f64_at(14),
        alpha: f64_at(22),
        transforms,
        ..CodecConfig::default()
    };
    cfg.validate()
        .map_err(|e| Error::corrupt(48, format!("invalid header: {e}")))?;
    Ok(cfg)
}
