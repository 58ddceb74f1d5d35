//! Independent reference implementations used only by tests.
#![allow(dead_code)]

pub mod props;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// DCT-II basis straight from the cosine formula; column `k` is frequency `k`.
pub fn dct2(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    DMatrix::from_fn(n, n, |j, k| {
        let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        scale * (std::f64::consts::PI * k as f64 * (2 * j + 1) as f64 / (2.0 * nf)).cos()
    })
}

/// Largest entry gap between two bases after flipping each column of `b` to
/// best match `a`.
pub fn max_diff_up_to_sign(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..a.ncols() {
        let (ca, cb) = (a.column(k), b.column(k));
        let s = if ca.dot(&cb) < 0.0 { -1.0 } else { 1.0 };
        worst = worst.max((ca - cb * s).amax());
    }
    worst
}

/// Angle between matching columns, ignoring sign.
pub fn column_angle(a: &DMatrix<f64>, b: &DMatrix<f64>, k: usize) -> f64 {
    let c = a.column(k).dot(&b.column(k)).abs() / (a.column(k).norm() * b.column(k).norm());
    c.min(1.0).acos()
}

/// Eigenvalues from nalgebra's dense symmetric solver, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn path_laplacian(w: &[f64]) -> DMatrix<f64> {
    let n = w.len() + 1;
    let mut l = DMatrix::zeros(n, n);
    for (e, &we) in w.iter().enumerate() {
        l[(e, e)] += we;
        l[(e + 1, e + 1)] += we;
        l[(e, e + 1)] -= we;
        l[(e + 1, e)] -= we;
    }
    l
}

/// Per-edge mean squared differences of a covariance matrix.
pub fn edge_msd(s: &DMatrix<f64>) -> Vec<f64> {
    (0..s.nrows() - 1)
        .map(|e| s[(e, e)] + s[(e + 1, e + 1)] - 2.0 * s[(e, e + 1)])
        .collect()
}

/// `-logdet(L + 11ᵀ/n) + tr(L K)` with `K = S + α(I - 11ᵀ)`.
pub fn learning_objective(w: &[f64], s: &DMatrix<f64>, alpha: f64) -> f64 {
    let n = w.len() + 1;
    let l = path_laplacian(w);
    let j = DMatrix::from_element(n, n, 1.0);
    let reg = &l + &j / n as f64;
    let chol = reg.cholesky().expect("L + J/n must be positive definite");
    let logdet: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
    let k = s + (DMatrix::identity(n, n) - j) * alpha;
    -logdet + (l * k).trace()
}

fn learning_gradient(w: &[f64], s: &DMatrix<f64>, alpha: f64) -> Vec<f64> {
    let n = w.len() + 1;
    let reg = path_laplacian(w) + DMatrix::from_element(n, n, 1.0 / n as f64);
    let inv = reg.try_inverse().expect("invertible");
    let k = s + (DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0)) * alpha;
    (0..n - 1)
        .map(|e| {
            let mut b = DVector::zeros(n);
            b[e] = 1.0;
            b[e + 1] = -1.0;
            let kb = (b.transpose() * &k * &b)[(0, 0)];
            let reff = (b.transpose() * &inv * &b)[(0, 0)];
            kb - reff
        })
        .collect()
}

/// Minimizes the graph learning objective over non-negative path weights by
/// diagonally scaled projected gradient with Armijo backtracking.
pub fn minimize_learning_objective(s: &DMatrix<f64>, alpha: f64) -> Vec<f64> {
    let m = s.nrows() - 1;
    let floor = 1e-12;
    let mut w = vec![1.0; m];
    let mut f = learning_objective(&w, s, alpha);
    for _ in 0..20_000 {
        let g = learning_gradient(&w, s, alpha);
        let dir: Vec<f64> = g.iter().zip(&w).map(|(gi, wi)| gi * wi * wi).collect();
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-20 {
            let cand: Vec<f64> = w.iter().zip(&dir).map(|(wi, d)| (wi - step * d).max(floor)).collect();
            let fc = learning_objective(&cand, s, alpha);
            let decrease: f64 = g.iter().zip(&w).zip(&cand).map(|((gi, a), b)| gi * (a - b)).sum();
            if fc <= f - 1e-4 * decrease {
                let done = f - fc < 1e-15;
                w = cand;
                f = fc;
                accepted = !done;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    w
}

/// `S = X Xᵀ / N` from `samples` Gaussian vectors with random per-entry scales.
pub fn random_covariance(n: usize, samples: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let scales: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..3.0)).collect();
    let mut s = DMatrix::zeros(n, n);
    for _ in 0..samples {
        let x = DVector::from_fn(n, |i, _| scales[i] * normal(rng));
        s += &x * x.transpose();
    }
    s / samples as f64
}

/// Batch MSD over blocks: `vert[u]` averages `(B[u][j] - B[u+1][j])²` over
/// every column of every block.
pub fn batch_msd(blocks: &[DMatrix<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = blocks[0].nrows();
    let mut vert = vec![0.0; n - 1];
    let mut horiz = vec![0.0; n - 1];
    for b in blocks {
        for u in 0..n - 1 {
            for j in 0..n {
                vert[u] += (b[(u, j)] - b[(u + 1, j)]).powi(2);
                horiz[u] += (b[(j, u)] - b[(j, u + 1)]).powi(2);
            }
        }
    }
    let count = (blocks.len() * n) as f64;
    (
        vert.iter().map(|v| v / count).collect(),
        horiz.iter().map(|v| v / count).collect(),
    )
}

/// Separable sinusoid plus Gaussian noise.
pub fn smooth_image(width: usize, height: usize, seed: u64) -> pathgbt::image::Plane {
    let mut r = rng(seed);
    let fx: f64 = r.random_range(0.02..0.2);
    let fy: f64 = r.random_range(0.02..0.2);
    let phase: f64 = r.random_range(0.0..std::f64::consts::TAU);
    pathgbt::image::Plane::from_fn(width, height, |y, x| {
        let v = 128.0 + 70.0 * (fx * x as f64 + phase).sin() * (fy * y as f64).cos() + 8.0 * normal(&mut r);
        v.round().clamp(0.0, 255.0) as u8
    })
}
