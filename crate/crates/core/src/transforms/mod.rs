//! Path-graph Laplacians, orthonormal bases and separable 2D transforms.
//!
//! Every basis produced here follows one column convention: within each
//! column the entry of largest magnitude is non-negative, with near-ties
//! (within a relative `1e-9`) resolved toward the lowest row index. Encoder
//! and decoder therefore agree on signs without signaling them.

pub mod eigen;

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Block of transform coefficients.
pub type CoeffBlock = DMatrix<f64>;

/// Regularizer added to MSDs before inversion, in squared 8-bit pixel units.
pub const DEFAULT_ALPHA: f64 = 1e-2;

const SIGN_TIE_TOLERANCE: f64 = 1e-9;

/// Positive edge weights of a path graph on `n` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGraphWeights {
    weights: Vec<f64>,
}

impl PathGraphWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("a path needs at least one edge".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidWeights(format!("weight {i} is {w}")));
        }
        Ok(PathGraphWeights { weights })
    }

    /// All edges set to one.
    pub fn unit(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(format!("path needs n >= 2, got {n}")));
        }
        Self::new(vec![1.0; n - 1])
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.weights.len() + 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

/// Combinatorial graph Laplacian `D - W`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix(DMatrix<f64>);

impl LaplacianMatrix {
    /// Wraps an arbitrary matrix after checking the CGL invariants.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() || n < 2 {
            return Err(Error::InvalidSize(format!(
                "Laplacian must be square with n >= 2, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.amax().max(1.0);
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                row_sum += m[(i, j)];
                if i != j && m[(i, j)] > 0.0 {
                    return Err(Error::InvalidWeights(format!("positive off-diagonal at ({i}, {j})")));
                }
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::NotSymmetric((m[(i, j)] - m[(j, i)]).abs()));
                }
            }
            if row_sum.abs() > 1e-9 * scale {
                return Err(Error::InvalidWeights(format!("row {i} sums to {row_sum:e}")));
            }
        }
        Ok(LaplacianMatrix(m))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    fn is_tridiagonal(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) <= 1 || self.0[(i, j)] == 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Dct,
    Dst,
    Gbt,
    Klt,
}

/// Orthonormal `n×n` transform; columns are basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    kind: BasisKind,
    matrix: DMatrix<f64>,
    eigenvalues: Vec<f64>,
}

impl OrthonormalBasis {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Spectrum paired with the columns; empty for fixed bases.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Largest entry of `|UᵀU - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.n();
        (self.matrix.tr_mul(&self.matrix) - DMatrix::<f64>::identity(n, n)).amax()
    }

    /// `Uᵀx` for a single vector.
    pub fn analyze(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("vector of length {n}"),
                actual: format!("{}", x.len()),
            });
        }
        Ok((0..n)
            .map(|k| (0..n).map(|j| self.matrix[(j, k)] * x[j]).sum())
            .collect())
    }
}

/// Flips each column so its dominant entry is non-negative.
fn normalize_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let peak = col.amax();
        if peak == 0.0 {
            continue;
        }
        let lead = col
            .iter()
            .position(|v| v.abs() >= peak * (1.0 - SIGN_TIE_TOLERANCE))
            .expect("column has a dominant entry");
        if col[lead] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Reorders eigenpairs (stable, so equal eigenvalues keep solver order) and
/// applies the sign convention.
fn assemble(kind: BasisKind, values: Vec<f64>, vectors: DMatrix<f64>, descending: bool) -> OrthonormalBasis {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    if descending {
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    } else {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    }
    let mut matrix = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        matrix.set_column(dst, &vectors.column(src));
    }
    normalize_signs(&mut matrix);
    OrthonormalBasis {
        kind,
        matrix,
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
    }
}

/// Tridiagonal CGL of a weighted path.
pub fn build_cgl(w: &PathGraphWeights) -> LaplacianMatrix {
    let n = w.n();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for (i, &wi) in w.as_slice().iter().enumerate() {
        l[(i, i + 1)] = -wi;
        l[(i + 1, i)] = -wi;
        l[(i, i)] += wi;
        l[(i + 1, i + 1)] += wi;
    }
    LaplacianMatrix(l)
}

/// Graph Fourier basis of a CGL, columns in ascending eigenvalue order.
///
/// Path graphs (tridiagonal Laplacians) go through implicit-shift QL; any
/// other topology falls back to cyclic Jacobi.
pub fn eigendecompose_cgl(l: &LaplacianMatrix) -> Result<OrthonormalBasis> {
    let m = l.matrix();
    let n = l.n();
    let (values, vectors) = if l.is_tridiagonal() {
        let diag: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| m[(i, i + 1)]).collect();
        eigen::tridiagonal_ql(&diag, &off)?
    } else {
        eigen::jacobi(m)?
    };
    Ok(assemble(BasisKind::Gbt, values, vectors, false))
}

/// Convenience: `eigendecompose_cgl(build_cgl(w))`.
pub fn path_gbt(w: &PathGraphWeights) -> Result<OrthonormalBasis> {
    eigendecompose_cgl(&build_cgl(w))
}

/// Orthonormal DCT-II.
pub fn dct_basis(n: usize) -> Result<OrthonormalBasis> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("DCT needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    let mut matrix = DMatrix::from_fn(n, n, |j, k| {
        let c = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        c * (PI * (2 * j + 1) as f64 * k as f64 / (2.0 * nf)).cos()
    });
    normalize_signs(&mut matrix);
    Ok(OrthonormalBasis {
        kind: BasisKind::Dct,
        matrix,
        eigenvalues: Vec::new(),
    })
}

/// Orthonormal DST-VII (the ADST of video coding). Basis vector `k`
/// sampled at position `j` is `2/√(2n+1)·sin(π(2k+1)(j+1)/(2n+1))`.
pub fn dst_basis(n: usize) -> Result<OrthonormalBasis> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("DST needs n >= 2, got {n}")));
    }
    let denom = (2 * n + 1) as f64;
    let scale = 2.0 / denom.sqrt();
    let mut matrix = DMatrix::from_fn(n, n, |j, k| {
        scale * (PI * (2 * k + 1) as f64 * (j + 1) as f64 / denom).sin()
    });
    normalize_signs(&mut matrix);
    Ok(OrthonormalBasis {
        kind: BasisKind::Dst,
        matrix,
        eigenvalues: Vec::new(),
    })
}

/// Edge weights `1 / (msd + 2α)` from mean-square differences.
pub fn weights_from_msd(msd: &[f64], alpha: f64) -> Result<PathGraphWeights> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if let Some(bad) = msd.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "MSD entries must be finite and non-negative, got {bad}"
        )));
    }
    PathGraphWeights::new(msd.iter().map(|d| 1.0 / (d + 2.0 * alpha)).collect())
}

fn check_dims(block: &DMatrix<f64>, u_vert: &OrthonormalBasis, u_horiz: &OrthonormalBasis) -> Result<()> {
    if block.nrows() != u_vert.n() || block.ncols() != u_horiz.n() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{} block", u_vert.n(), u_horiz.n()),
            actual: format!("{}x{}", block.nrows(), block.ncols()),
        });
    }
    Ok(())
}

/// `U_vertᵀ · B · U_horiz`: columns go through the vertical basis, rows
/// through the horizontal one.
pub fn forward_separable(
    block: &DMatrix<f64>,
    u_vert: &OrthonormalBasis,
    u_horiz: &OrthonormalBasis,
) -> Result<CoeffBlock> {
    check_dims(block, u_vert, u_horiz)?;
    Ok(u_vert.matrix.tr_mul(block) * &u_horiz.matrix)
}

/// `U_vert · C · U_horizᵀ`.
pub fn inverse_separable(
    coeffs: &CoeffBlock,
    u_vert: &OrthonormalBasis,
    u_horiz: &OrthonormalBasis,
) -> Result<DMatrix<f64>> {
    check_dims(coeffs, u_vert, u_horiz)?;
    Ok(&u_vert.matrix * coeffs * u_horiz.matrix.transpose())
}

/// KLT of a covariance: eigenvectors in descending eigenvalue order.
pub fn klt_from_covariance(s: &DMatrix<f64>) -> Result<OrthonormalBasis> {
    let n = s.nrows();
    if n == 0 || n != s.ncols() {
        return Err(Error::InvalidSize(format!(
            "covariance must be square, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    let asym = (s - s.transpose()).amax();
    if asym > 1e-9 {
        return Err(Error::NotSymmetric(asym));
    }
    let (values, vectors) = eigen::jacobi(s)?;
    Ok(assemble(BasisKind::Klt, values, vectors, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn weights(w: &[f64]) -> PathGraphWeights {
        PathGraphWeights::new(w.to_vec()).unwrap()
    }

    #[test]
    fn cgl_small_examples() {
        let l = build_cgl(&weights(&[1.0, 2.0]));
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 3.0, -2.0, 0.0, -2.0, 2.0]);
        assert_eq!(l.matrix(), &expected);

        let l = build_cgl(&weights(&[1.0]));
        assert_eq!(l.matrix(), &DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));

        let l = build_cgl(&weights(&[1.0, 1.0, 1.0]));
        let diag: Vec<f64> = (0..4).map(|i| l.matrix()[(i, i)]).collect();
        assert_eq!(diag, vec![1.0, 2.0, 2.0, 1.0]);
        for row in l.matrix().row_iter() {
            assert_eq!(row.sum(), 0.0);
        }
        assert!(LaplacianMatrix::from_matrix(l.matrix().clone()).is_ok());
    }

    #[test]
    fn invalid_weights_rejected() {
        assert!(matches!(
            PathGraphWeights::new(vec![1.0, 0.0]),
            Err(Error::InvalidWeights(_))
        ));
        assert!(PathGraphWeights::new(vec![-1.0]).is_err());
        assert!(PathGraphWeights::new(vec![f64::NAN]).is_err());
        assert!(PathGraphWeights::new(vec![f64::INFINITY]).is_err());
        assert!(PathGraphWeights::new(vec![]).is_err());
    }

    #[test]
    fn laplacian_validation() {
        let bad_sum = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 2.0]);
        assert!(LaplacianMatrix::from_matrix(bad_sum).is_err());
        let positive_off = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        assert!(LaplacianMatrix::from_matrix(positive_off).is_err());
    }

    #[test]
    fn unit_path_spectrum_n4() {
        let basis = path_gbt(&PathGraphWeights::unit(4).unwrap()).unwrap();
        let s2 = 2f64.sqrt();
        let expected = [0.0, 2.0 - s2, 2.0, 2.0 + s2];
        for (got, want) in basis.eigenvalues().iter().zip(expected) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn null_vector_is_constant() {
        let basis = path_gbt(&weights(&[0.3, 5.0, 1.2, 0.01, 2.5])).unwrap();
        let c = 1.0 / 6f64.sqrt();
        for j in 0..6 {
            assert!((basis.matrix()[(j, 0)] - c).abs() < 1e-10);
        }
        assert!(basis.eigenvalues()[0].abs() < 1e-10);
    }

    #[test]
    fn general_topology_uses_dense_solver() {
        // triangle graph: not a path
        let m = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, -1.0, -1.0, 2.0, -1.0, -1.0, -1.0, 2.0]);
        let basis = eigendecompose_cgl(&LaplacianMatrix::from_matrix(m).unwrap()).unwrap();
        assert!(basis.orthonormality_error() < 1e-12);
        assert!(basis.eigenvalues()[0].abs() < 1e-12);
        assert!((basis.eigenvalues()[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn dct_n2_and_dc_column() {
        let u = dct_basis(2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let expected = DMatrix::from_row_slice(2, 2, &[h, h, h, -h]);
        assert!((u.matrix() - expected).amax() < 1e-15);
        for n in [3, 8, 16] {
            let u = dct_basis(n).unwrap();
            for j in 0..n {
                assert!((u.matrix()[(j, 0)] - 1.0 / (n as f64).sqrt()).abs() < 1e-15);
            }
            assert!(u.orthonormality_error() < 1e-12);
        }
        assert!(matches!(dct_basis(1), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn dst_examples() {
        assert!(dst_basis(4).unwrap().orthonormality_error() < 1e-12);
        let u2 = dst_basis(2).unwrap();
        assert!(u2.matrix()[(0, 0)] < u2.matrix()[(1, 0)]);
        let u8 = dst_basis(8).unwrap();
        let col0 = u8.matrix().column(0);
        assert!(col0.max() - col0.min() > 0.1);
        // first ADST vector ramps up monotonically
        assert!((1..8).all(|j| col0[j] > col0[j - 1]));
        assert!(dst_basis(0).is_err());
    }

    #[test]
    fn msd_to_weights() {
        assert_eq!(
            weights_from_msd(&[0.0, 0.0, 0.0], 0.5).unwrap().as_slice(),
            &[1.0, 1.0, 1.0]
        );
        assert_eq!(weights_from_msd(&[0.5], 0.25).unwrap().as_slice(), &[1.0]);
        assert_eq!(weights_from_msd(&[1.0, 3.0], 0.5).unwrap().as_slice(), &[0.5, 0.25]);
        assert!(matches!(weights_from_msd(&[1.0], 0.0), Err(Error::InvalidParameter(_))));
        assert!(weights_from_msd(&[1.0], -1.0).is_err());
        assert!(weights_from_msd(&[-1.0], 0.1).is_err());
    }

    #[test]
    fn forward_dc_only() {
        let u = dct_basis(4).unwrap();
        let b = DMatrix::from_element(4, 4, 1.0);
        let c = forward_separable(&b, &u, &u).unwrap();
        assert!((c[(0, 0)] - 4.0).abs() < 1e-12);
        let mut rest = c.clone();
        rest[(0, 0)] = 0.0;
        assert!(rest.amax() < 1e-12);

        let z = forward_separable(&DMatrix::zeros(4, 4), &u, &u).unwrap();
        assert_eq!(z.amax(), 0.0);
    }

    #[test]
    fn inverse_single_dc() {
        let u = dct_basis(4).unwrap();
        let mut c = DMatrix::zeros(4, 4);
        c[(0, 0)] = 4.0;
        let b = inverse_separable(&c, &u, &u).unwrap();
        assert!((b - DMatrix::from_element(4, 4, 1.0)).amax() < 1e-12);
    }

    #[test]
    fn separable_dimension_mismatch() {
        let u4 = dct_basis(4).unwrap();
        let u8 = dct_basis(8).unwrap();
        let b = DMatrix::zeros(4, 4);
        assert!(matches!(
            forward_separable(&b, &u4, &u8),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(inverse_separable(&b, &u8, &u4).is_err());
    }

    #[test]
    fn klt_examples() {
        let id = klt_from_covariance(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(id.matrix(), &DMatrix::identity(3, 3));

        let s = DMatrix::from_diagonal(&DVector::from_row_slice(&[1.0, 4.0]));
        let k = klt_from_covariance(&s).unwrap();
        assert_eq!(k.matrix().column(0).as_slice(), &[0.0, 1.0]);
        assert_eq!(k.eigenvalues(), &[4.0, 1.0]);

        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(klt_from_covariance(&asym), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn sign_convention_ties_go_to_lowest_index() {
        let mut m = DMatrix::from_row_slice(2, 2, &[-0.5, 0.5, 0.5, 0.5]);
        normalize_signs(&mut m);
        assert_eq!(m.column(0).as_slice(), &[0.5, -0.5]);
        assert_eq!(m.column(1).as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn analyze_matches_matrix_product() {
        let u = dct_basis(8).unwrap();
        let x: Vec<f64> = (0..8).map(|i| (i * i) as f64 - 3.0).collect();
        let got = u.analyze(&x).unwrap();
        let want = u.matrix().transpose() * DVector::from_vec(x);
        for (a, b) in got.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(u.analyze(&[1.0]).is_err());
    }
}
