//! Zero-mean Gaussian Markov random fields with (possibly singular) Laplacian
//! precision, and the power-spectral-entropy experiment built on them.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::transforms::{self, OrthonormalBasis, PathGraphWeights};

/// Eigenvalues at or below this are treated as the null space.
const NULL_EIGENVALUE: f64 = 1e-12;

/// Edge weights of the non-uniform 8-point path model.
pub const NONUNIFORM_WEIGHTS: [f64; 7] = [0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0];

#[derive(Debug, Clone)]
pub struct GmrfModel {
    precision: DMatrix<f64>,
    /// Precision eigenvectors, ascending eigenvalue order.
    eigvecs: DMatrix<f64>,
    eigvals: Vec<f64>,
}

impl GmrfModel {
    /// Model with a dense symmetric PSD precision matrix.
    pub fn new(precision: DMatrix<f64>) -> Result<Self> {
        let n = precision.nrows();
        if n == 0 || n != precision.ncols() {
            return Err(Error::InvalidSize("precision must be square".into()));
        }
        let asym = (&precision - precision.transpose()).amax();
        if asym > 1e-9 {
            return Err(Error::NotSymmetric(asym));
        }
        let (vals, vecs) = transforms::eigen::jacobi(&precision)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let scale = precision.amax().max(1.0);
        if vals[order[0]] < -1e-9 * scale {
            return Err(Error::InvalidParameter(format!(
                "precision has negative eigenvalue {}",
                vals[order[0]]
            )));
        }
        let eigvecs = DMatrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
        Ok(GmrfModel {
            precision,
            eigvecs,
            eigvals: order.iter().map(|&i| vals[i]).collect(),
        })
    }

    /// Model whose precision is the CGL of a weighted path.
    pub fn path(weights: &PathGraphWeights) -> Result<Self> {
        let l = transforms::build_cgl(weights);
        let basis = transforms::eigendecompose_cgl(&l)?;
        Ok(GmrfModel {
            precision: l.matrix().clone(),
            eigvecs: basis.matrix().clone(),
            eigvals: basis.eigenvalues().to_vec(),
        })
    }

    /// Unit-weight path on `n` vertices.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::path(&PathGraphWeights::unit(n)?)
    }

    /// 8-point path with weights spread evenly over `[0.1, 1]`.
    pub fn nonuniform() -> Result<Self> {
        Self::path(&PathGraphWeights::new(NONUNIFORM_WEIGHTS.to_vec())?)
    }

    pub fn n(&self) -> usize {
        self.precision.nrows()
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    /// `P†`, the covariance the samples follow.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut cov = DMatrix::zeros(n, n);
        for (k, &lam) in self.eigvals.iter().enumerate() {
            if lam > NULL_EIGENVALUE {
                let u = self.eigvecs.column(k);
                cov += (u * u.transpose()) / lam;
            }
        }
        cov
    }

    /// Draws `U·diag(g)·z` with `z` standard normal and `g = λ^(-1/2)` off
    /// the null space (zero on it).
    pub fn sample_with(&self, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let n = self.n();
        let gains: Vec<f64> = self
            .eigvals
            .iter()
            .map(|&l| if l > NULL_EIGENVALUE { l.sqrt().recip() } else { 0.0 })
            .collect();
        (0..count)
            .map(|_| {
                let z = DVector::from_fn(n, |k, _| {
                    let g: f64 = StandardNormal.sample(rng);
                    gains[k] * g
                });
                (&self.eigvecs * z).as_slice().to_vec()
            })
            .collect()
    }

    /// Deterministic per seed.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        self.sample_with(count, &mut ChaCha8Rng::seed_from_u64(seed))
    }
}

/// Shannon entropy (nats) of the normalized power spectrum of `coeffs`.
pub fn pse(coeffs: &[f64]) -> Result<f64> {
    let total: f64 = coeffs.iter().map(|c| c * c).sum();
    if total == 0.0 {
        return Err(Error::UndefinedSpectrum);
    }
    Ok(-coeffs
        .iter()
        .map(|c| c * c / total)
        .filter(|&s| s > 0.0)
        .map(|s| s * s.ln())
        .sum::<f64>())
}

fn check_training(train: &[Vec<f64>]) -> Result<usize> {
    let Some(first) = train.first() else {
        return Err(Error::EmptyInput("training set is empty".into()));
    };
    let n = first.len();
    if let Some(bad) = train.iter().find(|x| x.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: format!("vectors of length {n}"),
            actual: format!("{}", bad.len()),
        });
    }
    Ok(n)
}

/// Path GBT with edge weights fitted to the training vectors.
pub fn learn_nonseparable_path_gbt(train: &[Vec<f64>], alpha: f64) -> Result<OrthonormalBasis> {
    let n = check_training(train)?;
    if n < 2 {
        return Err(Error::InvalidSize("path needs at least two entries".into()));
    }
    let mut msd = vec![0.0; n - 1];
    for x in train {
        for (u, d) in msd.iter_mut().enumerate() {
            let diff = x[u] - x[u + 1];
            *d += diff * diff;
        }
    }
    let count = train.len() as f64;
    msd.iter_mut().for_each(|d| *d /= count);
    transforms::path_gbt(&transforms::weights_from_msd(&msd, alpha)?)
}

/// Second-moment matrix `Σ x xᵀ / N` (no mean removal).
pub fn empirical_covariance(train: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = check_training(train)?;
    let mut s = DMatrix::zeros(n, n);
    for x in train {
        let v = DVector::from_column_slice(x);
        s += &v * v.transpose();
    }
    Ok(s / train.len() as f64)
}

pub fn learn_klt(train: &[Vec<f64>]) -> Result<OrthonormalBasis> {
    transforms::klt_from_covariance(&empirical_covariance(train)?)
}

/// Mean PSE of each transform at one training-set size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseResult {
    pub training_size: usize,
    pub dct: f64,
    pub gbt: f64,
    pub klt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseExperiment {
    pub training_sizes: Vec<usize>,
    pub n_test: usize,
    pub trials: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for PseExperiment {
    fn default() -> Self {
        PseExperiment {
            training_sizes: (1..=14).map(|p| 1usize << p).collect(),
            n_test: 1000,
            trials: 20,
            alpha: transforms::DEFAULT_ALPHA,
            seed: 0,
        }
    }
}

/// Independent stream seeds for (trial, purpose) pairs.
fn stream_seed(seed: u64, trial: usize, purpose: u64) -> u64 {
    // splitmix64 finalizer over a packed key
    let mut z = seed
        .wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(purpose.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mean_pse(basis: &OrthonormalBasis, test: &[Vec<f64>]) -> Result<f64> {
    let mut total = 0.0;
    for x in test {
        total += pse(&basis.analyze(x)?)?;
    }
    Ok(total / test.len() as f64)
}

/// For each training size, learns a GBT and a KLT from fresh samples and
/// averages the test-set PSE of DCT, GBT and KLT over `trials` repetitions.
/// The test set of a trial is shared across training sizes.
pub fn run_pse_experiment(model: &GmrfModel, exp: &PseExperiment) -> Result<Vec<PseResult>> {
    if exp.training_sizes.contains(&0) {
        return Err(Error::InvalidParameter("training sizes must be positive".into()));
    }
    if exp.n_test == 0 || exp.trials == 0 {
        return Err(Error::InvalidParameter(
            "need at least one test sample and one trial".into(),
        ));
    }
    let dct = transforms::dct_basis(model.n())?;
    let tests: Vec<Vec<Vec<f64>>> = (0..exp.trials)
        .map(|t| model.sample(exp.n_test, stream_seed(exp.seed, t, 0)))
        .collect();
    let dct_mean = tests.iter().map(|test| mean_pse(&dct, test)).sum::<Result<f64>>()? / exp.trials as f64;

    let mut out = Vec::with_capacity(exp.training_sizes.len());
    for &size in &exp.training_sizes {
        let mut gbt_sum = 0.0;
        let mut klt_sum = 0.0;
        for (t, test) in tests.iter().enumerate() {
            let train = model.sample(size, stream_seed(exp.seed, t, size as u64));
            gbt_sum += mean_pse(&learn_nonseparable_path_gbt(&train, exp.alpha)?, test)?;
            klt_sum += mean_pse(&learn_klt(&train)?, test)?;
        }
        out.push(PseResult {
            training_size: size,
            dct: dct_mean,
            gbt: gbt_sum / exp.trials as f64,
            klt: klt_sum / exp.trials as f64,
        });
    }
    Ok(out)
}
