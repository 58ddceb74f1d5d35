//! Online clustering of blocks and per-cluster path-graph statistics.
//!
//! Each block is described by its template: the L-shaped `2n×2n` neighbourhood
//! of previously reconstructed pixels above and to the left of it. A
//! sequential K-means bank assigns the template to the closest centroid, and
//! that cluster accumulates the mean-square differences between adjacent
//! rows and columns of the reconstructed block. Those MSDs determine the
//! cluster's vertical and horizontal path GBTs.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::image::Plane;
use crate::transforms::{self, OrthonormalBasis};

pub const DEFAULT_CLUSTERS: usize = 8;
pub const DEFAULT_RHO: f64 = 0.1;
pub const DEFAULT_M_MIN: usize = 4;

/// Vectorized L-shaped neighbourhood of a block, `3n²` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    values: Vec<f64>,
    row: usize,
    col: usize,
}

impl Template {
    pub fn new(values: Vec<f64>, n: usize, row: usize, col: usize) -> Result<Self> {
        if values.len() != 3 * n * n {
            return Err(Error::DimensionMismatch {
                expected: format!("{} template values", 3 * n * n),
                actual: format!("{}", values.len()),
            });
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=255.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "template value {v} outside pixel range"
            )));
        }
        Ok(Template { values, row, col })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn position(&self) -> (usize, usize) {
        (self.row, self.col)
    }
}

/// Template for the block whose top-left pixel is `(row, col)`.
///
/// Covers the `2n×2n` square ending at the block's bottom-right corner, minus
/// the block itself, in raster order. Blocks in the first block row or column
/// have no template.
pub fn extract_template(recon: &Plane, row: usize, col: usize, n: usize) -> Result<Template> {
    if row < n || col < n || row + n > recon.height() || col + n > recon.width() {
        return Err(Error::TemplateUnavailable { row, col });
    }
    let mut values = Vec::with_capacity(3 * n * n);
    for r in row - n..row + n {
        for c in col - n..col + n {
            if r >= row && c >= col {
                continue;
            }
            values.push(f64::from(recon.get(r, c)));
        }
    }
    Ok(Template { values, row, col })
}

/// Sums of squared differences between adjacent rows (`vert`) and adjacent
/// columns (`horiz`) of a block.
///
/// `vert[u]` sums `(B[u][j] - B[u+1][j])²` over every column `j`, which is
/// the vertical path edge `(u, u+1)` seen by each column vector.
pub fn block_ssd_sums(block: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = block.nrows();
    let mut vert = vec![0.0; n.saturating_sub(1)];
    let mut horiz = vec![0.0; n.saturating_sub(1)];
    for u in 0..n.saturating_sub(1) {
        for i in 0..n {
            let dv = block[(u, i)] - block[(u + 1, i)];
            vert[u] += dv * dv;
            let dh = block[(i, u)] - block[(i, u + 1)];
            horiz[u] += dh * dh;
        }
    }
    (vert, horiz)
}

/// Per-cluster bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    /// Number of blocks absorbed so far.
    pub count: usize,
    pub centroid: Vec<f64>,
    pub msd_vert: Vec<f64>,
    pub msd_horiz: Vec<f64>,
}

impl ClusterState {
    /// Fresh cluster seeded with a template; no block samples yet.
    pub fn seeded(template: &Template, n: usize) -> Self {
        ClusterState {
            count: 0,
            centroid: template.values.clone(),
            msd_vert: vec![0.0; n - 1],
            msd_horiz: vec![0.0; n - 1],
        }
    }

    pub fn n(&self) -> usize {
        self.msd_vert.len() + 1
    }

    /// `c ← c + ρ(z − c)`.
    pub fn update_centroid(&mut self, z: &Template, rho: f64) -> Result<()> {
        check_rho(rho)?;
        if z.values.len() != self.centroid.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("template of length {}", self.centroid.len()),
                actual: format!("{}", z.values.len()),
            });
        }
        for (c, &v) in self.centroid.iter_mut().zip(&z.values) {
            *c += rho * (v - *c);
        }
        Ok(())
    }

    /// Folds one reconstructed block into the running MSDs and bumps the
    /// sample count.
    pub fn update_msd(&mut self, block: &DMatrix<f64>) -> Result<()> {
        let n = self.n();
        if block.nrows() != n || block.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n} block"),
                actual: format!("{}x{}", block.nrows(), block.ncols()),
            });
        }
        let (vert, horiz) = block_ssd_sums(block);
        let nf = n as f64;
        let m = self.count as f64;
        let denom = nf * (m + 1.0);
        for (d, s) in self.msd_vert.iter_mut().zip(&vert) {
            *d = (nf * m * *d + s) / denom;
        }
        for (d, s) in self.msd_horiz.iter_mut().zip(&horiz) {
            *d = (nf * m * *d + s) / denom;
        }
        self.count += 1;
        Ok(())
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "learning rate must lie in (0, 1], got {rho}"
        )))
    }
}

pub fn gbt_available(cluster: &ClusterState, m_min: usize) -> bool {
    cluster.count >= m_min
}

/// Vertical and horizontal path GBTs of a cluster.
pub fn derive_gbt(cluster: &ClusterState, alpha: f64, m_min: usize) -> Result<(OrthonormalBasis, OrthonormalBasis)> {
    if !gbt_available(cluster, m_min) {
        return Err(Error::GbtUnavailable {
            count: cluster.count,
            required: m_min,
        });
    }
    let u_vert = transforms::path_gbt(&transforms::weights_from_msd(&cluster.msd_vert, alpha)?)?;
    let u_horiz = transforms::path_gbt(&transforms::weights_from_msd(&cluster.msd_horiz, alpha)?)?;
    Ok((u_vert, u_horiz))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankConfig {
    pub k: usize,
    pub n: usize,
    pub rho: f64,
    pub alpha: f64,
    pub m_min: usize,
}

impl BankConfig {
    pub fn new(n: usize) -> Self {
        BankConfig {
            k: DEFAULT_CLUSTERS,
            n,
            rho: DEFAULT_RHO,
            alpha: transforms::DEFAULT_ALPHA,
            m_min: DEFAULT_M_MIN,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("need at least one cluster".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidSize(format!("block size {} too small", self.n)));
        }
        check_rho(self.rho)?;
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Sequential K-means bank. The first `k` eligible blocks seed the clusters;
/// afterwards every block updates its nearest cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterBank {
    config: BankConfig,
    clusters: Vec<ClusterState>,
}

impl ClusterBank {
    pub fn new(config: BankConfig) -> Result<Self> {
        config.validate()?;
        Ok(ClusterBank {
            config,
            clusters: Vec::with_capacity(config.k),
        })
    }

    pub fn config(&self) -> &BankConfig {
        &self.config
    }

    /// Clusters initialized so far, in creation order.
    pub fn clusters(&self) -> &[ClusterState] {
        &self.clusters
    }

    pub fn init_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_initialized(&self) -> bool {
        self.clusters.len() == self.config.k
    }

    /// Index of the centroid closest to `z` in squared Euclidean distance;
    /// ties go to the lower index.
    pub fn nearest_cluster(&self, z: &Template) -> Result<usize> {
        if !self.is_initialized() {
            return Err(Error::BankNotInitialized {
                initialized: self.clusters.len(),
                k: self.config.k,
            });
        }
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (k, cluster) in self.clusters.iter().enumerate() {
            let dist: f64 = cluster
                .centroid
                .iter()
                .zip(&z.values)
                .map(|(c, v)| (v - c) * (v - c))
                .sum();
            if dist < best_dist {
                best = k;
                best_dist = dist;
            }
        }
        Ok(best)
    }

    /// Cluster whose GBT would code the block with template `z`, if that
    /// GBT is available yet.
    pub fn available_gbt(&self, z: &Template) -> Result<Option<(OrthonormalBasis, OrthonormalBasis)>> {
        if !self.is_initialized() {
            return Ok(None);
        }
        let k = self.nearest_cluster(z)?;
        let cluster = &self.clusters[k];
        if !gbt_available(cluster, self.config.m_min) {
            return Ok(None);
        }
        derive_gbt(cluster, self.config.alpha, self.config.m_min).map(Some)
    }

    /// Absorbs a coded block and its template; returns the cluster index.
    pub fn process_block(&mut self, z: &Template, recon_block: &DMatrix<f64>) -> Result<usize> {
        let n = self.config.n;
        if z.values.len() != 3 * n * n {
            return Err(Error::DimensionMismatch {
                expected: format!("template of length {}", 3 * n * n),
                actual: format!("{}", z.values.len()),
            });
        }
        if !self.is_initialized() {
            let mut cluster = ClusterState::seeded(z, n);
            cluster.update_msd(recon_block)?;
            self.clusters.push(cluster);
            return Ok(self.clusters.len() - 1);
        }
        let k = self.nearest_cluster(z)?;
        let rho = self.config.rho;
        let cluster = &mut self.clusters[k];
        cluster.update_centroid(z, rho)?;
        cluster.update_msd(recon_block)?;
        Ok(k)
    }

    /// Plain-text listing of the full state. Floats use the shortest
    /// round-trip representation, so two dumps are byte-identical exactly
    /// when the states are bitwise identical.
    pub fn dump(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "K {} n {} rho {:?} alpha {:?} m_min {} initialized {}",
            c.k,
            c.n,
            c.rho,
            c.alpha,
            c.m_min,
            self.clusters.len()
        );
        for (k, cluster) in self.clusters.iter().enumerate() {
            let _ = writeln!(out, "cluster {k} M {}", cluster.count);
            write_vec(&mut out, "centroid", &cluster.centroid);
            write_vec(&mut out, "msd_vert", &cluster.msd_vert);
            write_vec(&mut out, "msd_horiz", &cluster.msd_horiz);
        }
        out
    }
}

fn write_vec(out: &mut String, label: &str, values: &[f64]) {
    out.push_str(label);
    for v in values {
        let _ = write!(out, " {v:?}");
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template(n: usize, fill: f64) -> Template {
        Template::new(vec![fill; 3 * n * n], n, n, n).unwrap()
    }

    fn bank(k: usize, n: usize) -> ClusterBank {
        ClusterBank::new(BankConfig {
            k,
            ..BankConfig::new(n)
        })
        .unwrap()
    }

    #[test]
    fn template_shapes() {
        let img = Plane::new(8, 8, 100);
        let z = extract_template(&img, 2, 2, 2).unwrap();
        assert_eq!(z.values(), &[100.0; 12]);
        assert_eq!(z.position(), (2, 2));

        let img = Plane::new(64, 64, 7);
        assert_eq!(extract_template(&img, 16, 32, 16).unwrap().values().len(), 768);
        assert!(matches!(
            extract_template(&img, 0, 16, 16),
            Err(Error::TemplateUnavailable { row: 0, col: 16 })
        ));
        assert!(extract_template(&img, 16, 0, 16).is_err());
    }

    #[test]
    fn template_raster_order() {
        let img = Plane::from_fn(4, 4, |r, c| (r * 4 + c) as u8);
        let z = extract_template(&img, 2, 2, 2).unwrap();
        // rows 0..4, cols 0..4, skipping the bottom-right 2x2
        assert_eq!(
            z.values(),
            &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 12.0, 13.0]
        );
    }

    #[test]
    fn template_rejects_out_of_range() {
        assert!(Template::new(vec![300.0; 12], 2, 2, 2).is_err());
        assert!(Template::new(vec![0.0; 11], 2, 2, 2).is_err());
    }

    #[test]
    fn nearest_examples() {
        let mut b = bank(2, 2);
        let blk = DMatrix::zeros(2, 2);
        b.process_block(&template(2, 0.0), &blk).unwrap();
        b.process_block(&template(2, 200.0), &blk).unwrap();
        assert_eq!(b.nearest_cluster(&template(2, 50.0)).unwrap(), 0);

        let mut b = bank(5, 2);
        for v in [0.0, 10.0, 20.0, 30.0, 10.0] {
            b.process_block(&template(2, v), &blk).unwrap();
        }
        assert_eq!(b.nearest_cluster(&template(2, 30.0)).unwrap(), 3);
        // clusters 1 and 4 share a centroid
        assert_eq!(b.nearest_cluster(&template(2, 11.0)).unwrap(), 1);
    }

    #[test]
    fn nearest_requires_full_bank() {
        let b = bank(3, 2);
        assert!(matches!(
            b.nearest_cluster(&template(2, 0.0)),
            Err(Error::BankNotInitialized { initialized: 0, k: 3 })
        ));
    }

    #[test]
    fn centroid_updates() {
        let mut c = ClusterState::seeded(&template(2, 0.0), 2);
        c.update_centroid(&template(2, 1.0), 0.1).unwrap();
        assert!(c.centroid.iter().all(|v| (v - 0.1).abs() < 1e-15));

        let mut c = ClusterState::seeded(&template(2, 40.0), 2);
        c.update_centroid(&template(2, 9.0), 1.0).unwrap();
        assert_eq!(c.centroid, vec![9.0; 12]);

        let before = c.clone();
        c.update_centroid(&template(2, 9.0), 0.3).unwrap();
        assert_eq!(c, before);

        assert!(c.update_centroid(&template(2, 9.0), 0.0).is_err());
        assert!(c.update_centroid(&template(2, 9.0), 1.5).is_err());
    }

    #[test]
    fn ssd_sums_by_hand() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 5.0]);
        assert_eq!(block_ssd_sums(&b), (vec![5.0], vec![13.0]));

        let flat = DMatrix::from_element(4, 4, 9.0);
        assert_eq!(block_ssd_sums(&flat), (vec![0.0; 3], vec![0.0; 3]));

        let rows_equal = DMatrix::from_fn(4, 4, |_, c| (c * c) as f64);
        let (v, h) = block_ssd_sums(&rows_equal);
        assert_eq!(v, vec![0.0; 3]);
        assert!(h.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn msd_update_examples() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 5.0]);
        let mut c = ClusterState::seeded(&template(2, 0.0), 2);
        c.update_msd(&b).unwrap();
        assert_eq!(c.msd_vert, vec![2.5]);
        assert_eq!(c.msd_horiz, vec![6.5]);
        assert_eq!(c.count, 1);
        c.update_msd(&b).unwrap();
        assert_eq!(c.msd_vert, vec![2.5]);
        assert_eq!(c.count, 2);
        assert!(c.update_msd(&DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn availability_threshold() {
        let mut c = ClusterState::seeded(&template(2, 0.0), 2);
        assert!(!gbt_available(&c, 4));
        c.count = 3;
        assert!(!gbt_available(&c, 4));
        c.count = 4;
        assert!(gbt_available(&c, 4));
        c.count = 3;
        assert!(matches!(
            derive_gbt(&c, 0.01, 4),
            Err(Error::GbtUnavailable { count: 3, required: 4 })
        ));
    }

    #[test]
    fn derive_gbt_zero_msd_is_dct() {
        let mut c = ClusterState::seeded(&template(8, 0.0), 8);
        c.count = 10;
        let (v, h) = derive_gbt(&c, 0.5, 4).unwrap();
        let dct = transforms::dct_basis(8).unwrap();
        assert!((v.matrix() - dct.matrix()).amax() < 1e-10);
        assert_eq!(v, h);
    }

    #[test]
    fn warm_up_then_assignment() {
        let mut b = bank(2, 2);
        let blk = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 2.0, 5.0]);
        assert_eq!(b.process_block(&template(2, 10.0), &blk).unwrap(), 0);
        assert_eq!(b.clusters()[0].count, 1);
        assert_eq!(b.process_block(&template(2, 100.0), &blk).unwrap(), 1);
        assert!(b.is_initialized());
        assert_eq!(b.process_block(&template(2, 90.0), &blk).unwrap(), 1);
        assert_eq!(b.clusters()[1].count, 2);
        assert_eq!(b.clusters()[0].count, 1);
    }

    #[test]
    fn dump_is_stable() {
        let mut b = bank(1, 2);
        b.process_block(&template(2, 0.5), &DMatrix::zeros(2, 2)).unwrap();
        let d = b.dump();
        assert!(d.starts_with("K 1 n 2 rho 0.1 alpha 0.01 m_min 4 initialized 1\n"));
        assert!(d.contains("cluster 0 M 1\n"));
        assert!(d.contains("msd_vert 0.0\n"));
        assert_eq!(d, b.clone().dump());
    }

    #[test]
    fn bad_config() {
        assert!(ClusterBank::new(BankConfig {
            k: 0,
            ..BankConfig::new(4)
        })
        .is_err());
        assert!(ClusterBank::new(BankConfig {
            rho: 0.0,
            ..BankConfig::new(4)
        })
        .is_err());
        assert!(ClusterBank::new(BankConfig {
            alpha: 0.0,
            ..BankConfig::new(4)
        })
        .is_err());
    }
}
