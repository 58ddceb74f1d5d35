//! Synthetic GMRF experiments, image metrics and RD evaluation.

pub mod gmrf;
pub mod metrics;
pub mod rd;
pub mod textures;

pub use gmrf::{
    empirical_covariance, learn_klt, learn_nonseparable_path_gbt, pse, run_pse_experiment, GmrfModel, PseExperiment,
    PseResult, NONUNIFORM_WEIGHTS,
};
pub use metrics::{bd_rate, glnu, mse, psnr, ssim, RdPoint, RunDirection};
pub use rd::{bd_rate_table, parse_rd_csv, rd_curve, rd_point, write_pse_csv, write_rd_csv, RdRow};
