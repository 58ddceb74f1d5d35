//! Property checks shared by the property and acceptance test targets.
//! Each returns `Err` with the minimal failing case.

use nalgebra::DMatrix;
use pathgbt::codec::entropy::{BitReader, BitWriter, BlockCoder};
use pathgbt::eval::{self, bd_rate, pse, GmrfModel, RdPoint};
use pathgbt::transforms::{self, OrthonormalBasis, PathGraphWeights};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub type Check = Result<(), String>;
pub type NamedCheck = (&'static str, fn() -> Check);

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Check {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn weights(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    (2..=max_n).prop_flat_map(|n| prop::collection::vec(1e-3f64..1e3, n - 1))
}

fn basis_of(w: &[f64]) -> OrthonormalBasis {
    transforms::path_gbt(&PathGraphWeights::new(w.to_vec()).unwrap()).unwrap()
}

pub fn orthonormality() -> Check {
    run(256, weights(32), |w| {
        let err = basis_of(&w).orthonormality_error();
        prop_assert!(err < 1e-10, "UᵀU deviates from I by {err}");
        Ok(())
    })
}

/// Square block size, two weight vectors and matching block entries.
fn separable_case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..=16).prop_flat_map(|n| {
        (
            prop::collection::vec(1e-3f64..1e3, n - 1),
            prop::collection::vec(1e-3f64..1e3, n - 1),
            prop::collection::vec(-255.0f64..255.0, n * n),
        )
    })
}

pub fn separable_round_trip() -> Check {
    run(256, separable_case(), |(wv, wh, data)| {
        let n = wv.len() + 1;
        let b = DMatrix::from_row_slice(n, n, &data);
        let (uv, uh) = (basis_of(&wv), basis_of(&wh));
        let c = transforms::forward_separable(&b, &uv, &uh).unwrap();
        let back = transforms::inverse_separable(&c, &uv, &uh).unwrap();
        prop_assert!((&back - &b).amax() < 1e-9);
        // Parseval across the separable transform
        let gap = (c.norm_squared() - b.norm_squared()).abs();
        prop_assert!(gap < 1e-9 * b.norm_squared().max(1.0));
        Ok(())
    })
}

pub fn parseval() -> Check {
    let case = (2usize..=32).prop_flat_map(|n| {
        (
            prop::collection::vec(1e-3f64..1e3, n - 1),
            prop::collection::vec(-1e3f64..1e3, n),
        )
    });
    run(512, case, |(w, x)| {
        let n = x.len();
        let energy: f64 = x.iter().map(|v| v * v).sum();
        for basis in [
            basis_of(&w),
            transforms::dct_basis(n).unwrap(),
            transforms::dst_basis(n).unwrap(),
        ] {
            let c = basis.analyze(&x).unwrap();
            let total: f64 = c.iter().map(|v| v * v).sum();
            prop_assert!((total - energy).abs() <= 1e-9 * energy.max(1.0), "{:?}", basis.kind());
        }
        Ok(())
    })
}

fn sparse_levels() -> impl Strategy<Value = (usize, Vec<i32>)> {
    prop_oneof![Just(4usize), Just(8), Just(16), Just(32)].prop_flat_map(|n| {
        let level = prop_oneof![
            6 => Just(0i32),
            3 => -8i32..=8,
            1 => -100_000i32..=100_000,
        ];
        (Just(n), prop::collection::vec(level, n * n))
    })
}

/// 10⁴ random sparse blocks through the run/level coder.
pub fn entropy_round_trip() -> Check {
    run(10_000, sparse_levels(), |(n, levels)| {
        let coder = BlockCoder::new(n);
        let mut w = BitWriter::new();
        coder.encode(&levels, &mut w);
        prop_assert_eq!(w.bit_len(), coder.cost(&levels));
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        let back = coder.decode(&mut r).unwrap();
        prop_assert_eq!(back, levels);
        prop_assert!(r.remaining() < 8);
        Ok(())
    })
}

pub fn pse_bounds() -> Check {
    let case = (1usize..=32)
        .prop_flat_map(|n| prop::collection::vec(-1e6f64..1e6, n))
        .prop_filter("not all zero", |x| x.iter().any(|&v| v != 0.0));
    run(1024, case, |x| {
        let e = pse(&x).unwrap();
        let max = (x.len() as f64).ln();
        prop_assert!(e >= 0.0 && e <= max + 1e-12, "pse {e} outside [0, {max}]");
        Ok(())
    })
}

pub fn bd_rate_self_comparison() -> Check {
    let point = (0.01f64..8.0, 20.0f64..50.0).prop_map(|(rate, psnr)| RdPoint { rate, psnr, ssim: 0.9 });
    let curve = prop::collection::vec(point, 4..=8).prop_filter("distinct psnr", |pts| {
        let mut q: Vec<f64> = pts.iter().map(|p| p.psnr).collect();
        q.sort_by(f64::total_cmp);
        q.windows(2).all(|w| w[1] - w[0] > 0.05)
    });
    run(256, curve, |pts| {
        prop_assert_eq!(bd_rate(&pts, &pts).unwrap(), 0.0);
        Ok(())
    })
}

/// Matched-GBT coefficients of 10⁵ GMRF samples are uncorrelated.
pub fn decorrelation() -> Check {
    let w = PathGraphWeights::new(eval::NONUNIFORM_WEIGHTS.to_vec()).unwrap();
    let model = GmrfModel::path(&w).map_err(|e| e.to_string())?;
    let basis = transforms::path_gbt(&w).map_err(|e| e.to_string())?;
    let coeffs: Vec<Vec<f64>> = model
        .sample(100_000, 21)
        .iter()
        .map(|x| basis.analyze(x).unwrap())
        .collect();
    let cov = eval::empirical_covariance(&coeffs).map_err(|e| e.to_string())?;
    let max_diag = cov.diagonal().amax();
    let mut max_off: f64 = 0.0;
    for i in 0..cov.nrows() {
        for j in 0..cov.ncols() {
            if i != j {
                max_off = max_off.max(cov[(i, j)].abs());
            }
        }
    }
    if max_off < 0.05 * max_diag {
        Ok(())
    } else {
        Err(format!("off-diagonal {max_off} vs max diagonal {max_diag}"))
    }
}

pub fn all() -> Vec<NamedCheck> {
    vec![
        ("orthonormality", orthonormality as fn() -> Check),
        ("separable round trip", separable_round_trip),
        ("entropy coder round trip", entropy_round_trip),
        ("parseval", parseval),
        ("pse bounds", pse_bounds),
        ("decorrelation", decorrelation),
        ("bd_rate self comparison", bd_rate_self_comparison),
    ]
}
