//! Dispatch from a method name and flag values to a band computation.

use tdaband::confidence::{
    concentration_band, conservative_band, default_subsample_size, density_bootstrap, density_grid,
    density_hoeffding, shells_band, subsample_band, BandResult, Method, DEFAULT_SUBSAMPLE_REPS,
};
use tdaband::density::{default_grid, KernelSpec, DEFAULT_BOOTSTRAP_REPS, DEFAULT_GRID_RES};
use tdaband::{DensityParams, GridGeometry, PointCloud};

use crate::error::{CliError, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_BANDWIDTH: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct BandOptions {
    pub alpha: f64,
    pub seed: u64,
    /// Intrinsic dimension for the distance-based bands.
    pub intrinsic_dim: usize,
    pub h: f64,
    pub grid_res: usize,
    pub subsample_size: Option<usize>,
    pub subsample_reps: usize,
    pub bootstrap_reps: usize,
}

impl Default for BandOptions {
    fn default() -> Self {
        BandOptions {
            alpha: DEFAULT_ALPHA,
            seed: 0,
            intrinsic_dim: 1,
            h: DEFAULT_BANDWIDTH,
            grid_res: DEFAULT_GRID_RES,
            subsample_size: None,
            subsample_reps: DEFAULT_SUBSAMPLE_REPS,
            bootstrap_reps: DEFAULT_BOOTSTRAP_REPS,
        }
    }
}

impl BandOptions {
    pub fn kernel(&self, dim: usize) -> Result<KernelSpec> {
        Ok(KernelSpec::gaussian(self.h, dim)?)
    }

    pub fn grid(&self, cloud: &PointCloud) -> Result<GridGeometry> {
        Ok(default_grid(cloud, &self.kernel(cloud.dim())?, self.grid_res)?)
    }

    pub fn density_params(&self, n: usize) -> Result<DensityParams> {
        if self.intrinsic_dim == 0 || self.intrinsic_dim > 64 {
            return Err(CliError::config(format!("bad intrinsic dimension {}", self.intrinsic_dim)));
        }
        Ok(DensityParams::with_default_radius(n, self.intrinsic_dim)?)
    }
}

/// The split variant of a method, if it has one.
pub fn split_variant(method: Method) -> Result<Method> {
    match method {
        Method::Concentration | Method::ConcentrationSplit => Ok(Method::ConcentrationSplit),
        Method::Shells | Method::ShellsSplit => Ok(Method::ShellsSplit),
        other => Err(CliError::config(format!("method {other} has no split variant"))),
    }
}

/// Radius for the local densities: the default for the sample size the
/// densities are estimated from.
fn params_for(method: Method, cloud: &PointCloud, opts: &BandOptions) -> Result<DensityParams> {
    let n = match method {
        Method::ConcentrationSplit | Method::ShellsSplit => cloud.len() / 2,
        _ => cloud.len(),
    };
    opts.density_params(n.max(2))
}

pub fn compute_band(method: Method, cloud: &PointCloud, opts: &BandOptions) -> Result<BandResult> {
    let band = match method {
        Method::Subsample => {
            let b = opts.subsample_size.unwrap_or_else(|| default_subsample_size(cloud.len()));
            subsample_band(cloud, b, opts.subsample_reps, opts.alpha, opts.seed)?
        }
        Method::Concentration | Method::ConcentrationSplit => {
            let p = params_for(method, cloud, opts)?;
            concentration_band(cloud, &p, opts.alpha, method == Method::ConcentrationSplit, opts.seed)?
        }
        Method::Conservative => {
            let p = params_for(method, cloud, opts)?;
            conservative_band(cloud, &p, opts.alpha)?
        }
        Method::Shells | Method::ShellsSplit => {
            let p = params_for(method, cloud, opts)?;
            shells_band(cloud, &p, opts.alpha, method == Method::ShellsSplit, opts.seed, None)?
        }
        Method::DensityHoeffding => {
            density_hoeffding(cloud.len(), &opts.kernel(cloud.dim())?, &opts.grid(cloud)?, opts.alpha)?
        }
        Method::DensityGrid => density_grid(cloud.len(), &opts.kernel(cloud.dim())?, &opts.grid(cloud)?, opts.alpha)?,
        Method::DensityBootstrap => density_bootstrap(
            cloud,
            &opts.kernel(cloud.dim())?,
            &opts.grid(cloud)?,
            opts.alpha,
            opts.bootstrap_reps,
            opts.seed,
        )?,
    };
    Ok(band)
}
