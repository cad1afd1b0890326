//! Kernel density estimates on grids, their upper-level-set diagrams, and
//! sup-norm confidence bands for them.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::str::FromStr;

use statrs::function::gamma::gamma;

use crate::complex::lower_star_filtration;
use crate::error::{Error, Result};
use crate::geometry::{squared_euclidean, PointCloud};
use crate::grid::{GridField, GridGeometry};
use crate::persistence::{reduce, PersistenceDiagram, PersistencePair};
use crate::resample::{bootstrap_indices, check_alpha, stream, upper_quantile};
use crate::solve::{solve_decreasing, T_MIN};

/// Grid points per axis when none is given.
pub const DEFAULT_GRID_RES: usize = 64;
/// Bootstrap replicates when none is given.
pub const DEFAULT_BOOTSTRAP_REPS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// Standard normal density.
    Gaussian,
    /// `c (1 - u^2)` on the unit ball.
    Epanechnikov,
    /// `c (1 - u)` on the unit ball.
    Triangular,
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(KernelKind::Gaussian),
            "epanechnikov" => Ok(KernelKind::Epanechnikov),
            "triangular" => Ok(KernelKind::Triangular),
            other => Err(Error::param(format!("unknown kernel {other:?}"))),
        }
    }
}

/// A radial kernel normalized to integrate to one over `R^D`, with
/// bandwidth `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub h: f64,
    pub dim: usize,
}

/// Surface area of the unit sphere in `R^D`.
fn sphere_area(dim: usize) -> f64 {
    2.0 * PI.powf(dim as f64 / 2.0) / gamma(dim as f64 / 2.0)
}

impl KernelSpec {
    pub fn new(kind: KernelKind, h: f64, dim: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::param(format!("bandwidth must be positive, got {h}")));
        }
        if dim == 0 {
            return Err(Error::param("kernel dimension must be positive"));
        }
        Ok(KernelSpec { kind, h, dim })
    }

    pub fn gaussian(h: f64, dim: usize) -> Result<Self> {
        KernelSpec::new(KernelKind::Gaussian, h, dim)
    }

    fn scale(&self) -> f64 {
        let d = self.dim as f64;
        match self.kind {
            KernelKind::Gaussian => (2.0 * PI).powf(-d / 2.0),
            KernelKind::Epanechnikov => d * (d + 2.0) / (2.0 * sphere_area(self.dim)),
            KernelKind::Triangular => d * (d + 1.0) / sphere_area(self.dim),
        }
    }

    /// `K(u)` at radius `u = |x|`, before bandwidth scaling.
    pub fn profile(&self, u: f64) -> f64 {
        let c = self.scale();
        match self.kind {
            KernelKind::Gaussian => c * (-0.5 * u * u).exp(),
            KernelKind::Epanechnikov => c * (1.0 - u * u).max(0.0),
            KernelKind::Triangular => c * (1.0 - u).max(0.0),
        }
    }

    /// `K(0) = sup K`.
    pub fn k0(&self) -> f64 {
        self.scale()
    }

    /// Lipschitz constant of `x ↦ K(|x|)`.
    pub fn lipschitz(&self) -> f64 {
        let c = self.scale();
        match self.kind {
            KernelKind::Gaussian => c * (-0.5f64).exp(),
            KernelKind::Epanechnikov => 2.0 * c,
            KernelKind::Triangular => c,
        }
    }

    /// `K(|x|/h) / h^D` from the squared distance `|x|^2`.
    pub fn eval_sq(&self, dist_sq: f64) -> f64 {
        self.profile(dist_sq.sqrt() / self.h) / self.h.powi(self.dim as i32)
    }
}

/// The default KDE grid: the data bounding box inflated by `3h`.
pub fn default_grid(cloud: &PointCloud, kernel: &KernelSpec, res: usize) -> Result<GridGeometry> {
    GridGeometry::around(cloud, 3.0 * kernel.h, res)
}

fn check_dims(cloud: &PointCloud, kernel: &KernelSpec, grid: &GridGeometry) -> Result<()> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    for found in [kernel.dim, grid.dim()] {
        if found != cloud.dim() {
            return Err(Error::DimensionMismatch {
                expected: cloud.dim(),
                found,
            });
        }
    }
    Ok(())
}

/// `p̂_h(x) = (1/n) Σ K(|x - X_i|/h) / h^D` at every grid vertex.
pub fn kde(cloud: &PointCloud, kernel: &KernelSpec, grid: &GridGeometry) -> Result<GridField> {
    check_dims(cloud, kernel, grid)?;
    let n = cloud.len() as f64;
    let values = (0..grid.len())
        .map(|g| {
            let x = grid.point(g);
            cloud
                .points()
                .map(|p| kernel.eval_sq(squared_euclidean(&x, p)))
                .sum::<f64>()
                / n
        })
        .collect();
    GridField::new(grid.clone(), values)
}

/// Kernel values between every grid vertex and every distinct sample
/// point, so that estimates from reweighted samples (bootstrap, subsets)
/// are one matrix-vector product.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    grid: GridGeometry,
    n: usize,
    /// Column of each sample point; repeated points share a column.
    column_of: Vec<usize>,
    columns: usize,
    /// Row-major: `values[g * columns + c]`.
    values: Vec<f64>,
}

impl KernelMatrix {
    pub fn new(cloud: &PointCloud, kernel: &KernelSpec, grid: &GridGeometry) -> Result<Self> {
        check_dims(cloud, kernel, grid)?;
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut distinct: Vec<&[f64]> = Vec::new();
        let column_of = cloud
            .points()
            .map(|p| {
                let key: Vec<u64> = p.iter().map(|x| x.to_bits()).collect();
                *seen.entry(key).or_insert_with(|| {
                    distinct.push(p);
                    distinct.len() - 1
                })
            })
            .collect();
        let columns = distinct.len();
        let mut values = Vec::with_capacity(grid.len() * columns);
        for g in 0..grid.len() {
            let x = grid.point(g);
            values.extend(distinct.iter().map(|p| kernel.eval_sq(squared_euclidean(&x, p))));
        }
        Ok(KernelMatrix {
            grid: grid.clone(),
            n: cloud.len(),
            column_of,
            columns,
            values,
        })
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    /// The estimate from a sample holding `counts[i]` copies of point `i`.
    pub fn field(&self, counts: &[f64]) -> Result<GridField> {
        if counts.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: counts.len(),
            });
        }
        let total: f64 = counts.iter().sum();
        if !(total > 0.0) {
            return Err(Error::param("weights must have a positive sum"));
        }
        let mut weights = vec![0.0; self.columns];
        for (&c, &w) in self.column_of.iter().zip(counts) {
            weights[c] += w;
        }
        for w in &mut weights {
            *w /= total;
        }
        let values = self
            .values
            .chunks(self.columns)
            .map(|row| row.iter().zip(&weights).map(|(k, w)| k * w).sum::<f64>())
            .collect();
        GridField::new(self.grid.clone(), values)
    }

    pub fn full(&self) -> Result<GridField> {
        self.field(&vec![1.0; self.n])
    }

    /// The estimate from a bootstrap draw of indices.
    pub fn resampled(&self, indices: &[usize]) -> Result<GridField> {
        let mut counts = vec![0.0; self.n];
        for &i in indices {
            counts[i] += 1.0;
        }
        self.field(&counts)
    }
}

/// Natural log of the right-hand side of the Hoeffding tail bound for
/// `P(|p̂_h - p_h|∞ > δ)` on `[-C, C]^D`.
fn hoeffding_log_tail(n: usize, kernel: &KernelSpec, c: f64, delta: f64) -> f64 {
    let d = kernel.dim as f64;
    let h = kernel.h;
    let k0 = kernel.k0();
    let inner = 4.0 * c * kernel.lipschitz() * d.sqrt() / (delta * h.powf(d + 1.0));
    2f64.ln() + d * inner.ln() - n as f64 * delta * delta * h.powf(2.0 * d) / (2.0 * k0 * k0)
}

/// `2 (4CL√D / (δ h^{D+1}))^D exp(-n δ² h^{2D} / (2 K(0)²))`.
pub fn hoeffding_tail(n: usize, kernel: &KernelSpec, c: f64, delta: f64) -> f64 {
    hoeffding_log_tail(n, kernel, c, delta).exp()
}

/// The `δ` at which [`hoeffding_tail`] equals `alpha`.
pub fn hoeffding_band(n: usize, kernel: &KernelSpec, c: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if n == 0 || !(c > 0.0) {
        return Err(Error::param(format!("need n > 0 and C > 0, got n = {n}, C = {c}")));
    }
    // |p̂_h - p_h| never exceeds K(0)/h^D; the solve may still land above.
    let hi = kernel.k0() / kernel.h.powi(kernel.dim as i32);
    solve_decreasing(|d| hoeffding_log_tail(n, kernel, c, d), alpha, T_MIN, hi, 200)
}

/// `(K(0)/h)^D sqrt(log(2N/α) / (2n))`.
///
/// Any `0 < α <= 2N` is accepted; `α = 2N` gives zero.
pub fn grid_band(n: usize, kernel: &KernelSpec, grid_size: usize, alpha: f64) -> Result<f64> {
    let two_n = 2.0 * grid_size as f64;
    if !(alpha > 0.0 && alpha <= two_n) || n == 0 {
        return Err(Error::param(format!(
            "grid band needs n > 0 and 0 < alpha <= 2N, got n = {n}, alpha = {alpha}"
        )));
    }
    let d = kernel.dim as i32;
    Ok((kernel.k0() / kernel.h).powi(d) * ((two_n / alpha).ln() / (2.0 * n as f64)).sqrt())
}

/// Bootstrap sup-norm band for the KDE.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapBand {
    /// `Z_α / sqrt(n h^D)`.
    pub c: f64,
    pub z_alpha: f64,
    /// `T_j = sqrt(n h^D) |p̂*_h - p̂_h|∞` per replicate.
    pub statistics: Vec<f64>,
}

pub fn bootstrap_band(
    cloud: &PointCloud,
    kernel: &KernelSpec,
    grid: &GridGeometry,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<BootstrapBand> {
    let matrix = KernelMatrix::new(cloud, kernel, grid)?;
    bootstrap_band_with(&matrix, kernel, alpha, reps, seed)
}

/// [`bootstrap_band`] reusing a precomputed kernel matrix.
pub fn bootstrap_band_with(
    matrix: &KernelMatrix,
    kernel: &KernelSpec,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<BootstrapBand> {
    check_alpha(alpha)?;
    if reps == 0 {
        return Err(Error::param("need at least one bootstrap replicate"));
    }
    let n = matrix.sample_size();
    let scale = (n as f64 * kernel.h.powi(kernel.dim as i32)).sqrt();
    let base = matrix.full()?;
    let statistics = (0..reps)
        .map(|j| {
            let idx = bootstrap_indices(&mut stream(seed, j as u64), n);
            let star = matrix.resampled(&idx)?;
            Ok(scale * crate::metrics::sup_distance(&star, &base)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let z_alpha = upper_quantile(&statistics, alpha)?;
    Ok(BootstrapBand {
        c: z_alpha / scale,
        z_alpha,
        statistics,
    })
}

/// Upper-level-set diagram of a field, in the field's own units: each pair
/// has `birth >= death`, and the class of the global maximum dies at `-∞`.
pub fn density_diagram(field: &GridField) -> Result<PersistenceDiagram> {
    let lower = reduce(&lower_star_filtration(&field.negated())?)?;
    Ok(PersistenceDiagram::new(
        lower
            .into_pairs()
            .into_iter()
            .map(|p| PersistencePair::new(p.dim, -p.birth, -p.death))
            .collect(),
    ))
}
