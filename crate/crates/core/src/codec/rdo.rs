//! Per-block choice between the DCT and an alternative separable transform.

use nalgebra::DMatrix;

use super::entropy::BlockCoder;
use super::quant;
use crate::error::Result;
use crate::transforms::{self, OrthonormalBasis};

/// Vertical and horizontal bases of a separable transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableBases {
    pub vert: OrthonormalBasis,
    pub horiz: OrthonormalBasis,
}

impl SeparableBases {
    pub fn new(vert: OrthonormalBasis, horiz: OrthonormalBasis) -> Self {
        SeparableBases { vert, horiz }
    }

    pub fn symmetric(basis: OrthonormalBasis) -> Self {
        SeparableBases {
            vert: basis.clone(),
            horiz: basis,
        }
    }
}

/// Result of coding one residual with one candidate transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub levels: Vec<i32>,
    /// SSD between the residual and its reconstruction.
    pub distortion: f64,
    /// Coefficient bits plus the flag bit when one is sent.
    pub bits: u64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdDecision {
    /// `None` when no alternative exists (no flag is coded); otherwise the
    /// flag value, `true` selecting the alternative.
    pub flag: Option<bool>,
    pub chosen: Candidate,
    /// Cost of the DCT candidate, for RD sanity checks.
    pub dct_cost: f64,
    pub alt_cost: Option<f64>,
}

/// Inverse-quantized, inverse-transformed residual. Encoder and decoder both
/// go through this one function.
pub fn reconstruct_residual(levels: &[i32], step: f64, bases: &SeparableBases) -> Result<DMatrix<f64>> {
    let n = bases.vert.n();
    let coeffs = quant::dequantize(levels, n, step);
    transforms::inverse_separable(&coeffs, &bases.vert, &bases.horiz)
}

fn evaluate(
    residual: &DMatrix<f64>,
    bases: &SeparableBases,
    step: f64,
    lambda: f64,
    flag_bits: u64,
    coder: &BlockCoder,
) -> Result<Candidate> {
    let coeffs = transforms::forward_separable(residual, &bases.vert, &bases.horiz)?;
    let levels = quant::quantize(&coeffs, step);
    let recon = reconstruct_residual(&levels, step, bases)?;
    let distortion = (residual - recon).norm_squared();
    let bits = coder.cost(&levels) + flag_bits;
    Ok(Candidate {
        levels,
        distortion,
        bits,
        cost: distortion + lambda * bits as f64,
    })
}

/// Codes `residual` with the DCT and, when given, the alternative; keeps the
/// one with lower `SSD + λ·bits` (ties keep the DCT).
pub fn rd_select_transform(
    residual: &DMatrix<f64>,
    dct: &SeparableBases,
    alternative: Option<&SeparableBases>,
    step: f64,
    lambda: f64,
    coder: &BlockCoder,
) -> Result<RdDecision> {
    let flag_bits = u64::from(alternative.is_some());
    let dct_cand = evaluate(residual, dct, step, lambda, flag_bits, coder)?;
    let dct_cost = dct_cand.cost;
    let Some(alt) = alternative else {
        return Ok(RdDecision {
            flag: None,
            chosen: dct_cand,
            dct_cost,
            alt_cost: None,
        });
    };
    let alt_cand = evaluate(residual, alt, step, lambda, flag_bits, coder)?;
    let alt_cost = alt_cand.cost;
    let (flag, chosen) = if alt_cost < dct_cost {
        (true, alt_cand)
    } else {
        (false, dct_cand)
    };
    Ok(RdDecision {
        flag: Some(flag),
        chosen,
        dct_cost,
        alt_cost: Some(alt_cost),
    })
}
