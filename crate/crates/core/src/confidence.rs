//! Confidence bands for persistence diagrams: subsampling, concentration of
//! measure, the method of shells, and wrappers around the density bands.
//!
//! Every band is a half-width `c`; a diagram point whose L∞ distance to the
//! diagonal is at most `c` is indistinguishable from noise.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::density::{bootstrap_band_with, grid_band, hoeffding_band, KernelMatrix, KernelSpec};
use crate::error::{Error, Result};
use crate::geometry::{directed_hausdorff, local_densities, rho_hat, DensityParams, PointCloud};
use crate::grid::GridGeometry;
use crate::persistence::{PersistenceDiagram, PersistencePair};
use crate::quadrature::integrate_pieces;
use crate::resample::{check_alpha, split_halves, SPLIT_STREAM, stream, subsample_indices, upper_quantile};
use crate::solve::{solve_decreasing, T_MIN};

/// Subsample replicates when none is given.
pub const DEFAULT_SUBSAMPLE_REPS: usize = 500;
/// How far the solver may double the upper end of its bracket.
const MAX_DOUBLINGS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Subsample,
    Concentration,
    ConcentrationSplit,
    Conservative,
    Shells,
    ShellsSplit,
    DensityHoeffding,
    DensityGrid,
    DensityBootstrap,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Subsample,
        Method::Concentration,
        Method::ConcentrationSplit,
        Method::Conservative,
        Method::Shells,
        Method::ShellsSplit,
        Method::DensityHoeffding,
        Method::DensityGrid,
        Method::DensityBootstrap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Subsample => "subsample",
            Method::Concentration => "concentration",
            Method::ConcentrationSplit => "concentration_split",
            Method::Conservative => "conservative",
            Method::Shells => "shells",
            Method::ShellsSplit => "shells_split",
            Method::DensityHoeffding => "density_hoeffding",
            Method::DensityGrid => "density_grid",
            Method::DensityBootstrap => "density_bootstrap",
        }
    }

    /// True for the bands on density diagrams.
    pub fn is_density(&self) -> bool {
        matches!(
            self,
            Method::DensityHoeffding | Method::DensityGrid | Method::DensityBootstrap
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::param(format!("unknown band method {s:?}")))
    }
}

/// A band half-width with the level it was built for and method-specific
/// diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandResult {
    pub method: Method,
    pub alpha: f64,
    pub c: f64,
    pub diagnostics: BTreeMap<String, Value>,
}

impl BandResult {
    pub fn new(method: Method, alpha: f64, c: f64) -> Self {
        BandResult {
            method,
            alpha,
            c,
            diagnostics: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.diagnostics.insert(key.to_string(), value.into());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::param(format!("serialize band: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
    }
}

/// Subsample size when none is given: `⌈n / (ln n)²⌉`.
pub fn default_subsample_size(n: usize) -> usize {
    let ln = (n.max(2) as f64).ln();
    ((n as f64 / (ln * ln)).ceil() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// `c = 2 t̂` where `t̂` is the upper `alpha` quantile of the Hausdorff
/// distances between `reps` random size-`b` subsamples and the full sample.
pub fn subsample_band(cloud: &PointCloud, b: usize, reps: usize, alpha: f64, seed: u64) -> Result<BandResult> {
    check_alpha(alpha)?;
    let n = cloud.len();
    if n == 0 {
        return Err(Error::EmptyCloud);
    }
    if b == 0 || b >= n {
        return Err(Error::param(format!("subsample size must satisfy 1 <= b < n = {n}, got {b}")));
    }
    if reps == 0 {
        return Err(Error::param("need at least one subsample"));
    }
    let stats = (0..reps)
        .map(|j| {
            let idx = subsample_indices(&mut stream(seed, j as u64), n, b);
            // The subsample sits inside the sample, so only one direction counts.
            directed_hausdorff(cloud, &cloud.select(&idx))
        })
        .collect::<Result<Vec<f64>>>()?;
    let t = upper_quantile(&stats, alpha)?;
    Ok(BandResult::new(Method::Subsample, alpha, 2.0 * t)
        .with("b", b)
        .with("reps", reps)
        .with("quantile", t)
        .with("seed", seed))
}

/// `ln` of `2^{d+1} / (t^d ρ) · exp(-n ρ t^d / 2)`.
fn lambert_log_lhs(t: f64, rho: f64, n: f64, d: f64) -> f64 {
    (d + 1.0) * std::f64::consts::LN_2 - d * t.ln() - rho.ln() - n * rho * t.powf(d) / 2.0
}

/// `2^{d+1} / (t^d ρ) · exp(-n ρ t^d / 2)`.
pub fn lambert_lhs(t: f64, rho: f64, n: usize, d: usize) -> f64 {
    lambert_log_lhs(t, rho, n as f64, d as f64).exp()
}

/// Solves `lambert_lhs(t) = alpha` on `[T_MIN, hi]`, doubling `hi` while
/// the root lies above it.
pub fn lambert_solve_in(rho: f64, n: usize, d: usize, alpha: f64, hi: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(rho > 0.0 && rho.is_finite()) || n == 0 || d == 0 {
        return Err(Error::param(format!(
            "need rho > 0, n > 0, d > 0; got rho = {rho}, n = {n}, d = {d}"
        )));
    }
    let (nf, df) = (n as f64, d as f64);
    solve_decreasing(|t| lambert_log_lhs(t, rho, nf, df), alpha, T_MIN, hi.max(2.0 * T_MIN), MAX_DOUBLINGS)
}

pub fn lambert_solve(rho: f64, n: usize, d: usize, alpha: f64) -> Result<f64> {
    lambert_solve_in(rho, n, d, alpha, 1.0)
}

/// Plug-in concentration band. With `split`, `ρ̂` comes from a random half
/// and the equation uses the other half's size, so the band applies to the
/// diagram of that second half.
pub fn concentration_band(
    cloud: &PointCloud,
    params: &DensityParams,
    alpha: f64,
    split: bool,
    seed: u64,
) -> Result<BandResult> {
    check_alpha(alpha)?;
    let diam = cloud.diameter();
    let d = params.intrinsic_dim;
    if split {
        let (first, second) = halves(cloud, seed)?;
        let (est, target) = (cloud.select(&first), second.len());
        let rho = rho_hat(&est, params)?;
        let t = lambert_solve_in(rho, target, d, alpha, diam)?;
        Ok(BandResult::new(Method::ConcentrationSplit, alpha, t)
            .with("rho_hat", rho)
            .with("r_n", params.radius)
            .with("d", d)
            .with("n_equation", target))
    } else {
        let rho = rho_hat(cloud, params)?;
        let t = lambert_solve_in(rho, cloud.len(), d, alpha, diam)?;
        Ok(BandResult::new(Method::Concentration, alpha, t)
            .with("rho_hat", rho)
            .with("r_n", params.radius)
            .with("d", d)
            .with("n_equation", cloud.len()))
    }
    .map(|b| if split { with_partition(b, cloud.len(), seed) } else { b })
}

fn halves(cloud: &PointCloud, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if cloud.len() < 2 || cloud.len() % 2 != 0 {
        return Err(Error::param(format!(
            "sample splitting needs an even sample size, got {}",
            cloud.len()
        )));
    }
    Ok(split_halves(seed, cloud.len()))
}

/// Records enough to rebuild the halves with [`partition`].
fn with_partition(band: BandResult, n: usize, seed: u64) -> BandResult {
    band.with("split_seed", seed)
        .with("split_stream", SPLIT_STREAM.to_string())
        .with("split_n", n)
        .with("estimation_half", "first")
        .with("band_half", "second")
}

/// The two halves used by the split variants for a given seed.
pub fn partition(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    split_halves(seed, n)
}

/// `t̂ = ((2 / (n ρ̂)) ln(n / α))^{1/d}`.
///
/// Any `0 < alpha <= n` is accepted; `alpha = n` gives zero.
pub fn conservative_band(cloud: &PointCloud, params: &DensityParams, alpha: f64) -> Result<BandResult> {
    let n = cloud.len() as f64;
    if !(alpha > 0.0 && alpha <= n) {
        return Err(Error::param(format!("alpha must lie in (0, n], got {alpha}")));
    }
    let rho = rho_hat(cloud, params)?;
    let d = params.intrinsic_dim as f64;
    let t = (2.0 / (n * rho) * (n / alpha).ln()).powf(1.0 / d);
    Ok(BandResult::new(Method::Conservative, alpha, t)
        .with("rho_hat", rho)
        .with("r_n", params.radius)
        .with("d", params.intrinsic_dim))
}

/// Gaussian kernel estimate `ĝ` of the density of the local densities
/// `V_i = ρ̂(X_i, r_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellDensityEstimate {
    /// Distinct `V_i` values with their multiplicities.
    atoms: Vec<(f64, f64)>,
    count: usize,
    pub bandwidth: f64,
    pub rho_hat: f64,
}

/// `b = r_n^{1/4}`.
pub fn default_shell_bandwidth(params: &DensityParams) -> f64 {
    params.radius.powf(0.25)
}

pub fn shell_g_hat(cloud: &PointCloud, params: &DensityParams, bandwidth: f64) -> Result<ShellDensityEstimate> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::param(format!("shell bandwidth must be positive, got {bandwidth}")));
    }
    let mut v = local_densities(cloud, params)?;
    v.sort_by(f64::total_cmp);
    let rho_hat = v[0];
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for x in v {
        match atoms.last_mut() {
            Some((y, w)) if *y == x => *w += 1.0,
            _ => atoms.push((x, 1.0)),
        }
    }
    Ok(ShellDensityEstimate {
        atoms,
        count: cloud.len(),
        bandwidth,
        rho_hat,
    })
}

impl ShellDensityEstimate {
    /// `ĝ(v)`.
    pub fn pdf(&self, v: f64) -> f64 {
        let b = self.bandwidth;
        let norm = 1.0 / (self.count as f64 * b * (2.0 * std::f64::consts::PI).sqrt());
        self.atoms
            .iter()
            .map(|&(x, w)| w * (-0.5 * ((v - x) / b).powi(2)).exp())
            .sum::<f64>()
            * norm
    }

    /// Distinct values of `V_i`.
    pub fn support_points(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.0)
    }

    /// An interval carrying all but a negligible part of `ĝ`'s mass.
    pub fn support(&self) -> (f64, f64) {
        let lo = self.atoms.first().map_or(0.0, |a| a.0);
        let hi = self.atoms.last().map_or(0.0, |a| a.0);
        (lo - 12.0 * self.bandwidth, hi + 12.0 * self.bandwidth)
    }

    /// `ln ∫_{ρ̂}^{∞} ĝ(v)/v · exp(-n v s/2) dv + n ρ̂ s/2`, the shell integral
    /// with the exponential factor at the lower end taken out.
    fn log_scaled_integral(&self, n: f64, s: f64) -> Result<f64> {
        let lo = self.rho_hat;
        let (_, hi) = self.support();
        if hi <= lo {
            return Err(Error::Quadrature("empty shell integration range".into()));
        }
        let rate = n * s / 2.0;
        let integrand = |v: f64| self.pdf(v) / v * (-(rate * (v - lo))).exp();
        // Cut finely where the exponential decays, then evenly.
        let mut cuts = vec![lo];
        let mut step = 1.0 / rate.max(1e-300);
        while lo + step < hi && cuts.len() < 64 {
            cuts.push(lo + step);
            step *= 2.0;
        }
        let last = *cuts.last().unwrap_or(&lo);
        for k in 1..=32 {
            cuts.push(last + (hi - last) * k as f64 / 32.0);
        }
        let value = integrate_pieces(integrand, &cuts, 1e-300, 1e-13)?;
        if !(value > 0.0) {
            return Err(Error::Quadrature(format!("shell integral is {value:e}")));
        }
        Ok(value.ln())
    }

    /// Left-hand side of the shells equation at `t`.
    pub fn shells_lhs(&self, t: f64, n: usize, d: usize) -> Result<f64> {
        let (nf, df) = (n as f64, d as f64);
        let s = t.powf(df);
        Ok(((df + 1.0) * std::f64::consts::LN_2 - df * t.ln() - nf * self.rho_hat * s / 2.0
            + self.log_scaled_integral(nf, s)?)
        .exp())
    }
}

/// Solves `(2^{d+1}/t^d) · I(t) = alpha`, where `log_scaled(s)` returns
/// `ln I` at `s = t^d` plus `n ρ̂ s/2`.
pub fn shells_solve_with<F>(log_scaled: F, rho_hat: f64, n: usize, d: usize, alpha: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    check_alpha(alpha)?;
    let (nf, df) = (n as f64, d as f64);
    let failure = std::cell::RefCell::new(None);
    let log_lhs = |t: f64| {
        let s = t.powf(df);
        match log_scaled(s) {
            Ok(v) => (df + 1.0) * std::f64::consts::LN_2 - df * t.ln() - nf * rho_hat * s / 2.0 + v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = solve_decreasing(log_lhs, alpha, T_MIN, hi.max(2.0 * T_MIN), MAX_DOUBLINGS);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => result,
    }
}

/// Root of the shells equation for an estimate `ĝ`.
pub fn shells_solve(g: &ShellDensityEstimate, n: usize, d: usize, alpha: f64, hi: f64) -> Result<f64> {
    let nf = n as f64;
    shells_solve_with(|s| g.log_scaled_integral(nf, s), g.rho_hat, n, d, alpha, hi)
}

/// Method of shells. With `split`, `ĝ` and `ρ̂` come from a random half and
/// the equation uses the other half's size.
pub fn shells_band(
    cloud: &PointCloud,
    params: &DensityParams,
    alpha: f64,
    split: bool,
    seed: u64,
    bandwidth: Option<f64>,
) -> Result<BandResult> {
    check_alpha(alpha)?;
    let b = bandwidth.unwrap_or_else(|| default_shell_bandwidth(params));
    let diam = cloud.diameter();
    let d = params.intrinsic_dim;
    let (est, target, method) = if split {
        let (first, second) = halves(cloud, seed)?;
        (cloud.select(&first), second.len(), Method::ShellsSplit)
    } else {
        (cloud.clone(), cloud.len(), Method::Shells)
    };
    let g = shell_g_hat(&est, params, b)?;
    let t = shells_solve(&g, target, d, alpha, diam)?;
    let residual = g.shells_lhs(t, target, d)? - alpha;
    let band = BandResult::new(method, alpha, t)
        .with("rho_hat", g.rho_hat)
        .with("r_n", params.radius)
        .with("d", d)
        .with("shell_bandwidth", b)
        .with("n_equation", target)
        .with("residual", residual);
    Ok(if split { with_partition(band, cloud.len(), seed) } else { band })
}

/// Hoeffding band for the KDE on `grid`, with `C` the grid's half-width.
pub fn density_hoeffding(n: usize, kernel: &KernelSpec, grid: &GridGeometry, alpha: f64) -> Result<BandResult> {
    let c = grid.half_width();
    let delta = hoeffding_band(n, kernel, c, alpha)?;
    Ok(BandResult::new(Method::DensityHoeffding, alpha, delta)
        .with("h", kernel.h)
        .with("C", c)
        .with("D", kernel.dim)
        .with("n", n))
}

pub fn density_grid(n: usize, kernel: &KernelSpec, grid: &GridGeometry, alpha: f64) -> Result<BandResult> {
    check_alpha(alpha)?;
    let delta = grid_band(n, kernel, grid.len(), alpha)?;
    Ok(BandResult::new(Method::DensityGrid, alpha, delta)
        .with("h", kernel.h)
        .with("N", grid.len())
        .with("D", kernel.dim)
        .with("n", n))
}

pub fn density_bootstrap(
    cloud: &PointCloud,
    kernel: &KernelSpec,
    grid: &GridGeometry,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<BandResult> {
    let matrix = KernelMatrix::new(cloud, kernel, grid)?;
    let band = bootstrap_band_with(&matrix, kernel, alpha, reps, seed)?;
    Ok(BandResult::new(Method::DensityBootstrap, alpha, band.c)
        .with("z_alpha", band.z_alpha)
        .with("h", kernel.h)
        .with("B", reps)
        .with("N", grid.len())
        .with("seed", seed))
}

/// Diagram points split by a band.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Significance {
    pub signal: Vec<PersistencePair>,
    pub noise: Vec<PersistencePair>,
}

impl Significance {
    /// Number of signal points in dimension `dim`.
    pub fn signal_in(&self, dim: usize) -> usize {
        self.signal.iter().filter(|p| p.dim == dim).count()
    }
}

/// A point is signal when `|death - birth|/2 > c`; essential points always
/// are.
pub fn significant_features(diagram: &PersistenceDiagram, band: &BandResult) -> Significance {
    classify(diagram, band.c)
}

pub fn classify(diagram: &PersistenceDiagram, c: f64) -> Significance {
    let (signal, noise) = diagram
        .pairs()
        .iter()
        .partition(|p| p.is_essential() || p.diagonal_distance() > c);
    Significance { signal, noise }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate, GeneratorSpec};

    fn circle(n: usize, seed: u64) -> PointCloud {
        generate(&GeneratorSpec::parse("uniform_circle", n, seed).unwrap()).unwrap()
    }

    #[test]
    fn subsample_degenerate_cases() {
        let same = PointCloud::from_points(&[[1.0, 1.0]; 20]).unwrap();
        assert_eq!(subsample_band(&same, 5, 30, 0.05, 1).unwrap().c, 0.0);
        let cloud = circle(50, 2);
        let one = subsample_band(&cloud, 10, 1, 0.05, 3).unwrap();
        let idx = subsample_indices(&mut stream(3, 0), 50, 10);
        let t = directed_hausdorff(&cloud, &cloud.select(&idx)).unwrap();
        assert_eq!(one.c, 2.0 * t);
        assert!(subsample_band(&cloud, 50, 10, 0.05, 1).is_err());
    }

    #[test]
    fn lambert_residual_and_monotonicity() {
        let rho = 1.0 / (2.0 * std::f64::consts::PI);
        let t = lambert_solve(rho, 500, 1, 0.05).unwrap();
        assert!((lambert_lhs(t, rho, 500, 1) - 0.05).abs() < 1e-10);
        let mut prev_n = f64::INFINITY;
        for n in [250, 500, 1000] {
            let mut prev_a = f64::INFINITY;
            for a in [0.01, 0.05, 0.1] {
                let t = lambert_solve(rho, n, 1, a).unwrap();
                assert!(t < prev_a);
                prev_a = t;
            }
            let t = lambert_solve(rho, n, 1, 0.05).unwrap();
            assert!(t < prev_n);
            prev_n = t;
        }
        assert!(lambert_solve(2.0 * rho, 500, 1, 0.05).unwrap() < t);
    }

    #[test]
    fn conservative_degenerate_alpha() {
        let cloud = circle(40, 1);
        let p = DensityParams::with_default_radius(40, 1).unwrap();
        assert_eq!(conservative_band(&cloud, &p, 40.0).unwrap().c, 0.0);
    }

    #[test]
    fn conservative_exceeds_concentration() {
        for seed in 0..5 {
            let cloud = circle(200, seed);
            let p = DensityParams::with_default_radius(200, 1).unwrap();
            let cons = conservative_band(&cloud, &p, 0.05).unwrap().c;
            let conc = concentration_band(&cloud, &p, 0.05, false, seed).unwrap().c;
            assert!(cons >= conc, "{cons} < {conc}");
        }
    }

    #[test]
    fn shells_with_point_mass_reduces_to_lambert() {
        let rho = 0.2;
        let (n, d) = (500, 1);
        // ∫ δ_ρ(v)/v e^{-nvs/2} dv scaled by e^{nρs/2} is 1/ρ.
        let t = shells_solve_with(|_| Ok(-rho.ln()), rho, n, d, 0.05, 1.0).unwrap();
        let l = lambert_solve(rho, n, d, 0.05).unwrap();
        assert!((t - l).abs() < 1e-6);
    }

    #[test]
    fn shells_residual() {
        let cloud = circle(300, 4);
        let p = DensityParams::with_default_radius(300, 1).unwrap();
        let band = shells_band(&cloud, &p, 0.05, false, 0, None).unwrap();
        let r = band.diagnostics["residual"].as_f64().unwrap();
        assert!(r.abs() <= 1e-8, "{r}");
    }

    #[test]
    fn g_hat_single_value_is_one_bump() {
        let cloud = PointCloud::from_points(&[[0.0, 0.0]; 5]).unwrap();
        let p = DensityParams::new(1, 1.0).unwrap();
        let g = shell_g_hat(&cloud, &p, 0.1).unwrap();
        assert_eq!(g.support_points().collect::<Vec<_>>(), vec![1.0]);
        let peak = 1.0 / (0.1 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((g.pdf(1.0) - peak).abs() < 1e-12);
    }

    #[test]
    fn split_needs_even_n() {
        let cloud = circle(41, 1);
        let p = DensityParams::with_default_radius(20, 1).unwrap();
        assert!(concentration_band(&cloud, &p, 0.05, true, 1).is_err());
        assert!(shells_band(&cloud, &p, 0.05, true, 1, None).is_err());
    }

    #[test]
    fn classification_boundary() {
        let eps = 1e-9;
        let c = 0.3;
        let d = PersistenceDiagram::new(vec![
            PersistencePair::new(1, 0.0, 2.0 * c + eps),
            PersistencePair::new(1, 0.0, 2.0 * c - eps),
            PersistencePair::new(0, 0.0, f64::INFINITY),
        ]);
        let s = classify(&d, c);
        assert_eq!(s.signal_in(1), 1);
        assert_eq!(s.signal_in(0), 1);
        assert_eq!(s.noise.len(), 1);
        assert_eq!(classify(&d, 0.0).signal.len(), 3);
    }

    #[test]
    fn band_json_round_trip() {
        let cloud = circle(100, 1);
        let p = DensityParams::with_default_radius(100, 1).unwrap();
        let band = concentration_band(&cloud, &p, 0.05, true, 9).unwrap();
        let text = band.to_json().unwrap();
        assert!(text.contains("\"method\": \"concentration_split\""));
        assert_eq!(BandResult::from_json(&text).unwrap(), band);
    }
}
