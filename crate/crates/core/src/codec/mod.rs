//! Block-based intra codec with a per-block DCT/alternative transform switch.
//!
//! Blocks are coded in raster order. Each block record is
//!
//! ```text
//! mode (2 bits) | flag (1 bit, only when an alternative exists) | run-level coefficients
//! ```
//!
//! With [`TransformSet::DctGbt`] the alternative is the GBT of the block's
//! nearest cluster, available once that cluster has seen `m_min` blocks.
//! Blocks in the first block row or column have no template and never touch
//! the cluster bank. Every other block updates the bank with its
//! reconstruction after coding, on both sides of the channel.

pub mod bitstream;
pub mod entropy;
pub mod predict;
pub mod quant;
pub mod rdo;

use nalgebra::DMatrix;

pub use predict::{predict_block, select_mode, PredMode};
pub use rdo::{rd_select_transform, RdDecision, SeparableBases};

use crate::error::{Error, Result};
use crate::image::Plane;
use crate::learning::{self, BankConfig, ClusterBank, Template};
use crate::transforms;
use entropy::{BitReader, BitWriter, BlockCoder};

pub const DEFAULT_BLOCK_SIZE: usize = 16;
pub const DEFAULT_LAMBDA_SCALE: f64 = 0.85;

/// Which transforms a stream may switch between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformSet {
    /// DCT only; no flag bits.
    Dct = 0,
    /// DCT or the learned GBT.
    DctGbt = 1,
    /// DCT or DST-VII on every block.
    DctDst = 2,
}

impl TransformSet {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(TransformSet::Dct),
            1 => Some(TransformSet::DctGbt),
            2 => Some(TransformSet::DctDst),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformSet::Dct => "dct",
            TransformSet::DctGbt => "dct+gbt",
            TransformSet::DctDst => "dct+dst",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "dct" => Some(TransformSet::Dct),
            "dct+gbt" => Some(TransformSet::DctGbt),
            "dct+dst" => Some(TransformSet::DctDst),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodecConfig {
    pub width: usize,
    pub height: usize,
    pub n: usize,
    pub qp: u8,
    pub k: usize,
    pub rho: f64,
    pub alpha: f64,
    pub m_min: usize,
    /// Encoder only; not stored in the stream.
    pub lambda_scale: f64,
    pub transforms: TransformSet,
}

impl Default for CodecConfig {
    fn default() -> Self {
        CodecConfig {
            width: 320,
            height: 320,
            n: DEFAULT_BLOCK_SIZE,
            qp: 27,
            k: learning::DEFAULT_CLUSTERS,
            rho: learning::DEFAULT_RHO,
            alpha: transforms::DEFAULT_ALPHA,
            m_min: learning::DEFAULT_M_MIN,
            lambda_scale: DEFAULT_LAMBDA_SCALE,
            transforms: TransformSet::DctGbt,
        }
    }
}

impl CodecConfig {
    pub fn for_image(image: &Plane) -> Self {
        CodecConfig {
            width: image.width(),
            height: image.height(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if ![4, 8, 16, 32].contains(&self.n) {
            return Err(Error::InvalidSize(format!(
                "block size must be 4, 8, 16 or 32, got {}",
                self.n
            )));
        }
        if self.width == 0
            || self.height == 0
            || !self.width.is_multiple_of(self.n)
            || !self.height.is_multiple_of(self.n)
        {
            return Err(Error::InvalidSize(format!(
                "{}x{} is not a positive multiple of the block size {}",
                self.width, self.height, self.n
            )));
        }
        if self.width > usize::from(u16::MAX) || self.height > usize::from(u16::MAX) {
            return Err(Error::InvalidSize(format!(
                "{}x{} exceeds 65535",
                self.width, self.height
            )));
        }
        if self.qp > 51 {
            return Err(Error::InvalidParameter(format!("qp {} outside [0, 51]", self.qp)));
        }
        if !(1..=255).contains(&self.k) {
            return Err(Error::InvalidParameter(format!(
                "cluster count {} outside [1, 255]",
                self.k
            )));
        }
        if self.m_min > 255 {
            return Err(Error::InvalidParameter(format!("m_min {} exceeds 255", self.m_min)));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::InvalidParameter(format!("rho {} outside (0, 1]", self.rho)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha {} must be positive",
                self.alpha
            )));
        }
        if !(self.lambda_scale > 0.0 && self.lambda_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda scale {} must be positive",
                self.lambda_scale
            )));
        }
        Ok(())
    }

    fn bank_config(&self) -> BankConfig {
        BankConfig {
            k: self.k,
            n: self.n,
            rho: self.rho,
            alpha: self.alpha,
            m_min: self.m_min,
        }
    }

    pub fn lambda(&self) -> f64 {
        quant::lambda(self.qp, self.lambda_scale)
    }
}

/// RD outcome of one coded block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockCost {
    pub chosen: f64,
    pub dct: f64,
    /// Transform flag as coded; `None` when the block carries none.
    pub flag: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EncodeStats {
    pub blocks: usize,
    /// Blocks outside the first block row and column.
    pub eligible_blocks: usize,
    /// Blocks carrying a transform flag.
    pub flagged_blocks: usize,
    /// Blocks whose flag selected the alternative transform.
    pub alternative_blocks: usize,
    /// Raster order.
    pub block_costs: Vec<BlockCost>,
}

impl EncodeStats {
    /// Percentage of candidate blocks coded with the alternative transform.
    /// Candidates are the eligible blocks for the GBT and every block for
    /// the DST.
    pub fn usage_percent(&self, set: TransformSet) -> f64 {
        let base = match set {
            TransformSet::Dct => return 0.0,
            TransformSet::DctGbt => self.eligible_blocks,
            TransformSet::DctDst => self.blocks,
        };
        if base == 0 {
            0.0
        } else {
            100.0 * self.alternative_blocks as f64 / base as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub bytes: Vec<u8>,
    pub recon: Plane,
    /// Final cluster bank; present for [`TransformSet::DctGbt`].
    pub bank: Option<ClusterBank>,
    pub stats: EncodeStats,
}

impl Encoded {
    pub fn bits_per_pixel(&self) -> f64 {
        self.bytes.len() as f64 * 8.0 / (self.recon.width() * self.recon.height()) as f64
    }
}

#[derive(Debug, Clone)]
pub struct Decoded {
    pub config: CodecConfig,
    pub image: Plane,
    pub bank: Option<ClusterBank>,
}

/// State shared verbatim by the encoder and decoder loops.
struct CodingLoop {
    cfg: CodecConfig,
    recon: Plane,
    bank: Option<ClusterBank>,
    dct: SeparableBases,
    dst: Option<SeparableBases>,
    coder: BlockCoder,
    step: f64,
}

/// Per-block context resolved before the transform decision.
struct BlockContext {
    template: Option<Template>,
    alternative: Option<SeparableBases>,
}

impl CodingLoop {
    fn new(cfg: CodecConfig) -> Result<Self> {
        cfg.validate()?;
        let bank = match cfg.transforms {
            TransformSet::DctGbt => Some(ClusterBank::new(cfg.bank_config())?),
            _ => None,
        };
        let dst = match cfg.transforms {
            TransformSet::DctDst => Some(SeparableBases::symmetric(transforms::dst_basis(cfg.n)?)),
            _ => None,
        };
        Ok(CodingLoop {
            recon: Plane::new(cfg.width, cfg.height, 0),
            bank,
            dct: SeparableBases::symmetric(transforms::dct_basis(cfg.n)?),
            dst,
            coder: BlockCoder::new(cfg.n),
            step: quant::qstep(cfg.qp),
            cfg,
        })
    }

    fn positions(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.cfg.n;
        let cols = self.cfg.width / n;
        (0..self.cfg.height / n).flat_map(move |by| (0..cols).map(move |bx| (by * n, bx * n)))
    }

    fn context(&self, row: usize, col: usize) -> Result<BlockContext> {
        let n = self.cfg.n;
        match self.cfg.transforms {
            TransformSet::Dct => Ok(BlockContext {
                template: None,
                alternative: None,
            }),
            TransformSet::DctDst => Ok(BlockContext {
                template: None,
                alternative: self.dst.clone(),
            }),
            TransformSet::DctGbt => {
                let bank = self.bank.as_ref().expect("bank exists for dct+gbt");
                let template = match learning::extract_template(&self.recon, row, col, n) {
                    Ok(t) => t,
                    Err(Error::TemplateUnavailable { .. }) => {
                        return Ok(BlockContext {
                            template: None,
                            alternative: None,
                        })
                    }
                    Err(e) => return Err(e),
                };
                let alternative = bank.available_gbt(&template)?.map(|(v, h)| SeparableBases::new(v, h));
                Ok(BlockContext {
                    template: Some(template),
                    alternative,
                })
            }
        }
    }

    /// Writes the reconstructed block into the frame and feeds the bank.
    fn finish_block(
        &mut self,
        row: usize,
        col: usize,
        prediction: &[u8],
        levels: &[i32],
        bases: &SeparableBases,
        template: Option<&Template>,
    ) -> Result<()> {
        let n = self.cfg.n;
        let residual = rdo::reconstruct_residual(levels, self.step, bases)?;
        let mut block = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                let v = f64::from(prediction[i * n + j]) + residual[(i, j)];
                block[i * n + j] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
        self.recon.put_block(row, col, n, &block);
        if let (Some(bank), Some(z)) = (self.bank.as_mut(), template) {
            let recon_block = DMatrix::from_row_iterator(n, n, block.iter().map(|&v| f64::from(v)));
            bank.process_block(z, &recon_block)?;
        }
        Ok(())
    }
}

/// Encodes a grayscale image.
pub fn encode_image(image: &Plane, cfg: &CodecConfig) -> Result<Encoded> {
    if image.width() != cfg.width || image.height() != cfg.height {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{} image", cfg.width, cfg.height),
            actual: format!("{}x{}", image.width(), image.height()),
        });
    }
    let mut state = CodingLoop::new(*cfg)?;
    let n = cfg.n;
    let lambda = cfg.lambda();
    let mut header = Vec::with_capacity(bitstream::HEADER_LEN);
    bitstream::write_header(cfg, &mut header);
    let mut w = BitWriter::new();
    let mut stats = EncodeStats::default();

    let positions: Vec<_> = state.positions().collect();
    for (row, col) in positions {
        let original = image.block(row, col, n);
        let mode = predict::select_mode(&state.recon, row, col, n, &original);
        let prediction = predict::predict_block(&state.recon, row, col, n, mode)?;
        let residual = DMatrix::from_row_iterator(
            n,
            n,
            original
                .iter()
                .zip(&prediction)
                .map(|(&o, &p)| f64::from(o) - f64::from(p)),
        );

        let ctx = state.context(row, col)?;
        let decision = rd_select_transform(
            &residual,
            &state.dct,
            ctx.alternative.as_ref(),
            state.step,
            lambda,
            &state.coder,
        )?;

        w.put_bits(mode.bits(), 2);
        if let Some(flag) = decision.flag {
            w.put_bit(flag);
            stats.flagged_blocks += 1;
            stats.alternative_blocks += usize::from(flag);
        }
        state.coder.encode(&decision.chosen.levels, &mut w);

        stats.blocks += 1;
        stats.eligible_blocks += usize::from(row >= n && col >= n);
        stats.block_costs.push(BlockCost {
            chosen: decision.chosen.cost,
            dct: decision.dct_cost,
            flag: decision.flag,
        });

        let bases = match (decision.flag, ctx.alternative.as_ref()) {
            (Some(true), Some(alt)) => alt,
            _ => &state.dct,
        }
        .clone();
        state.finish_block(
            row,
            col,
            &prediction,
            &decision.chosen.levels,
            &bases,
            ctx.template.as_ref(),
        )?;
    }

    let mut bytes = header;
    bytes.extend(w.finish());
    Ok(Encoded {
        bytes,
        recon: state.recon,
        bank: state.bank,
        stats,
    })
}

/// Decodes a stream produced by [`encode_image`].
pub fn decode_image(bytes: &[u8]) -> Result<Decoded> {
    let cfg = bitstream::read_header(bytes)?;
    let mut state = CodingLoop::new(cfg)?;
    let n = cfg.n;
    let payload = &bytes[bitstream::HEADER_LEN..];
    let mut r = BitReader::with_base(payload, bitstream::HEADER_LEN as u64 * 8);

    let positions: Vec<_> = state.positions().collect();
    for (row, col) in positions {
        let at = r.offset();
        let mode = PredMode::from_bits(r.get_bits(2)?).expect("two bits always map to a mode");
        if !mode.is_available(row, col) {
            return Err(Error::corrupt(
                at,
                format!("mode {mode:?} unavailable at ({row}, {col})"),
            ));
        }
        let prediction = predict::predict_block(&state.recon, row, col, n, mode)?;
        let ctx = state.context(row, col)?;
        let use_alt = match ctx.alternative {
            Some(_) => r.get_bit()?,
            None => false,
        };
        let levels = state.coder.decode(&mut r)?;
        let bases = match (use_alt, ctx.alternative.as_ref()) {
            (true, Some(alt)) => alt,
            _ => &state.dct,
        }
        .clone();
        state.finish_block(row, col, &prediction, &levels, &bases, ctx.template.as_ref())?;
    }

    if r.remaining() >= 8 {
        return Err(Error::corrupt(r.offset(), "trailing data after last block"));
    }
    let at = r.offset();
    if r.get_bits(r.remaining() as u32)? != 0 {
        return Err(Error::corrupt(at, "non-zero padding"));
    }

    Ok(Decoded {
        config: cfg,
        image: state.recon,
        bank: state.bank,
    })
}
