//! Browser bindings for three demo operations: the path GBT of user-chosen
//! edge weights, the PSE-versus-training-size experiment, and a codec run
//! on a synthetic texture with its per-block transform map.

use pathgbt::codec::{encode_image, CodecConfig, TransformSet};
use pathgbt::eval::{self, textures, GmrfModel, PseExperiment};
use pathgbt::transforms::{self, PathGraphWeights};
use wasm_bindgen::prelude::*;

/// Basis of a weighted path, row-major, with ascending eigenvalues.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct GbtBasis {
    n: usize,
    matrix: Vec<f64>,
    eigenvalues: Vec<f64>,
}

#[wasm_bindgen]
impl GbtBasis {
    #[wasm_bindgen(getter)]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `n × n`, row-major; column `k` is the `k`-th basis vector.
    pub fn matrix(&self) -> Vec<f64> {
        self.matrix.clone()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.clone()
    }
}

pub fn gbt_basis_inner(weights: &[f64]) -> pathgbt::Result<GbtBasis> {
    let basis = transforms::path_gbt(&PathGraphWeights::new(weights.to_vec())?)?;
    let n = basis.n();
    let m = basis.matrix();
    Ok(GbtBasis {
        n,
        matrix: (0..n * n).map(|i| m[(i / n, i % n)]).collect(),
        eigenvalues: basis.eigenvalues().to_vec(),
    })
}

/// Rows of `[training_size, dct, gbt, klt]`, flattened.
pub fn pse_curve_inner(nonuniform: bool, sizes: &[u32], trials: u32, seed: u32) -> pathgbt::Result<Vec<f64>> {
    let model = if nonuniform {
        GmrfModel::nonuniform()?
    } else {
        GmrfModel::uniform(8)?
    };
    let exp = PseExperiment {
        training_sizes: sizes.iter().map(|&s| s as usize).collect(),
        trials: trials as usize,
        seed: u64::from(seed),
        ..PseExperiment::default()
    };
    Ok(eval::run_pse_experiment(&model, &exp)?
        .iter()
        .flat_map(|r| [r.training_size as f64, r.dct, r.gbt, r.klt])
        .collect())
}

/// Per-block transform codes in the demo's block map.
pub const MAP_DCT_UNFLAGGED: u8 = 0;
pub const MAP_DCT_FLAGGED: u8 = 1;
pub const MAP_ALTERNATIVE: u8 = 2;

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct CodecDemo {
    size: usize,
    block_size: usize,
    original: Vec<u8>,
    recon: Vec<u8>,
    block_map: Vec<u8>,
    bpp: f64,
    psnr: f64,
    usage_percent: f64,
}

#[wasm_bindgen]
impl CodecDemo {
    #[wasm_bindgen(getter)]
    pub fn size(&self) -> usize {
        self.size
    }

    #[wasm_bindgen(getter)]
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    #[wasm_bindgen(getter)]
    pub fn bpp(&self) -> f64 {
        self.bpp
    }

    #[wasm_bindgen(getter)]
    pub fn psnr(&self) -> f64 {
        self.psnr
    }

    #[wasm_bindgen(getter)]
    pub fn usage_percent(&self) -> f64 {
        self.usage_percent
    }

    /// Grayscale, row-major.
    pub fn original(&self) -> Vec<u8> {
        self.original.clone()
    }

    pub fn recon(&self) -> Vec<u8> {
        self.recon.clone()
    }

    /// One code per block in raster order: 0 DCT without a flag, 1 DCT
    /// chosen over an offered alternative, 2 alternative transform.
    pub fn block_map(&self) -> Vec<u8> {
        self.block_map.clone()
    }
}

pub fn codec_demo_inner(texture: usize, size: usize, qp: u8, transforms: &str) -> pathgbt::Result<CodecDemo> {
    let suite = textures::suite();
    let (_, pattern) = suite.get(texture).ok_or_else(|| {
        pathgbt::Error::InvalidParameter(format!("texture index {texture} outside 0..{}", suite.len()))
    })?;
    let set = TransformSet::parse(transforms)
        .ok_or_else(|| pathgbt::Error::InvalidParameter(format!("unknown transform set {transforms:?}")))?;
    let image = pattern.render(size, size, 2.0, texture as u64);
    let cfg = CodecConfig {
        qp,
        transforms: set,
        ..CodecConfig::for_image(&image)
    };
    cfg.validate()?;
    let enc = encode_image(&image, &cfg)?;
    let block_map = enc
        .stats
        .block_costs
        .iter()
        .map(|c| match c.flag {
            None => MAP_DCT_UNFLAGGED,
            Some(false) => MAP_DCT_FLAGGED,
            Some(true) => MAP_ALTERNATIVE,
        })
        .collect();
    Ok(CodecDemo {
        size,
        block_size: cfg.n,
        psnr: eval::psnr(&image, &enc.recon)?,
        bpp: enc.bits_per_pixel(),
        usage_percent: enc.stats.usage_percent(set),
        block_map,
        original: image.into_vec(),
        recon: enc.recon.into_vec(),
    })
}

fn js(e: pathgbt::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn gbt_basis(weights: &[f64]) -> Result<GbtBasis, JsError> {
    gbt_basis_inner(weights).map_err(js)
}

#[wasm_bindgen]
pub fn pse_curve(nonuniform: bool, sizes: &[u32], trials: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    pse_curve_inner(nonuniform, sizes, trials, seed).map_err(js)
}

#[wasm_bindgen]
pub fn texture_names() -> Vec<String> {
    textures::suite().iter().map(|(name, _)| name.to_string()).collect()
}

#[wasm_bindgen]
pub fn codec_demo(texture: usize, size: usize, qp: u8, transforms: &str) -> Result<CodecDemo, JsError> {
    codec_demo_inner(texture, size, qp, transforms).map_err(js)
}
