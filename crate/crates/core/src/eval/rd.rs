//! Rate-distortion sweeps and the CSV files they exchange.
//!
//! RD CSV columns: `image,qp,rate_bpp,psnr,ssim`.
//! PSE CSV columns: `training_size,dct,gbt,klt`.

use std::collections::BTreeMap;
use std::io::Write;

use super::gmrf::PseResult;
use super::metrics::{bd_rate, psnr, ssim, RdPoint};
use crate::codec::{encode_image, CodecConfig, Encoded};
use crate::error::{Error, Result};
use crate::image::Plane;

pub const RD_HEADER: &str = "image,qp,rate_bpp,psnr,ssim";
pub const PSE_HEADER: &str = "training_size,dct,gbt,klt";

/// QPs of a standard sweep.
pub const DEFAULT_QPS: [u8; 5] = [23, 27, 31, 35, 39];

/// Encodes `image` and measures the encoder reconstruction.
pub fn rd_point(image: &Plane, cfg: &CodecConfig) -> Result<(RdPoint, Encoded)> {
    let enc = encode_image(image, cfg)?;
    let point = RdPoint {
        rate: enc.bits_per_pixel(),
        psnr: psnr(image, &enc.recon)?,
        ssim: ssim(image, &enc.recon)?,
    };
    Ok((point, enc))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdRow {
    pub image: String,
    pub qp: u8,
    pub point: RdPoint,
}

pub fn rd_curve(name: &str, image: &Plane, cfg: &CodecConfig, qps: &[u8]) -> Result<Vec<RdRow>> {
    qps.iter()
        .map(|&qp| {
            let (point, _) = rd_point(image, &CodecConfig { qp, ..*cfg })?;
            Ok(RdRow {
                image: name.to_string(),
                qp,
                point,
            })
        })
        .collect()
}

/// Orders rows by image name, then QP.
pub fn sort_rows(rows: &mut [RdRow]) {
    rows.sort_by(|a, b| a.image.cmp(&b.image).then(a.qp.cmp(&b.qp)));
}

pub fn write_rd_csv<W: Write>(rows: &[RdRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{RD_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.image.replace(',', "_"),
            r.qp,
            r.point.rate,
            r.point.psnr,
            r.point.ssim
        )?;
    }
    Ok(())
}

fn field<T: std::str::FromStr>(line_no: usize, name: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("line {line_no}: bad {name} {raw:?}")))
}

pub fn parse_rd_csv(text: &str) -> Result<Vec<RdRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == RD_HEADER => {}
        _ => return Err(Error::InvalidParameter(format!("RD CSV must start with {RD_HEADER:?}"))),
    }
    lines
        .map(|(i, line)| {
            let line_no = i + 1;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(Error::InvalidParameter(format!(
                    "line {line_no}: expected 5 columns, got {}",
                    cols.len()
                )));
            }
            Ok(RdRow {
                image: cols[0].trim().to_string(),
                qp: field(line_no, "qp", cols[1])?,
                point: RdPoint {
                    rate: field(line_no, "rate_bpp", cols[2])?,
                    psnr: field(line_no, "psnr", cols[3])?,
                    ssim: field(line_no, "ssim", cols[4])?,
                },
            })
        })
        .collect()
}

pub fn write_pse_csv<W: Write>(results: &[PseResult], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{PSE_HEADER}")?;
    for r in results {
        writeln!(out, "{},{},{},{}", r.training_size, r.dct, r.gbt, r.klt)?;
    }
    Ok(())
}

fn group(rows: &[RdRow]) -> BTreeMap<&str, Vec<RdPoint>> {
    let mut by_image: BTreeMap<&str, Vec<RdPoint>> = BTreeMap::new();
    for r in rows {
        by_image.entry(r.image.as_str()).or_default().push(r.point);
    }
    by_image
}

/// BD-rate of each image present in both tables, and their mean.
pub fn bd_rate_table(anchor: &[RdRow], test: &[RdRow]) -> Result<(Vec<(String, f64)>, f64)> {
    let a = group(anchor);
    let t = group(test);
    let mut per_image = Vec::new();
    for (name, pts) in &a {
        if let Some(tp) = t.get(name) {
            per_image.push((name.to_string(), bd_rate(pts, tp)?));
        }
    }
    if per_image.is_empty() {
        return Err(Error::EmptyInput("no image appears in both RD tables".into()));
    }
    let mean = per_image.iter().map(|(_, v)| v).sum::<f64>() / per_image.len() as f64;
    Ok((per_image, mean))
}
