//! Point clouds, Euclidean and Hausdorff distances, and the small-ball
//! mass density estimator.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A finite multiset of points in `R^D`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from flat row-major coordinates.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("ambient dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("coordinates must be finite"));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyCloud)?;
        let dim = first.as_ref().len();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        PointCloud::new(dim, coords)
    }

    pub fn empty(dim: usize) -> Result<Self> {
        PointCloud::new(dim, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.len(),
            });
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    /// The sub-multiset at the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud {
            dim: self.dim,
            coords,
        }
    }

    /// Per-axis `(min, max)` of the coordinates.
    pub fn bounding_box(&self) -> Result<Vec<(f64, f64)>> {
        if self.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for p in self.points() {
            for (b, &x) in bounds.iter_mut().zip(p) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        Ok(bounds)
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(euclidean(self.point(i), self.point(j)));
            }
        }
        best
    }

    /// Reads the headerless CSV format: one point per line.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut dim = None;
        let mut coords = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut count = 0;
            for field in line.split(',') {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|e| Error::parse(lineno + 1, format!("{field:?}: {e}")))?;
                coords.push(v);
                count += 1;
            }
            match dim {
                None => dim = Some(count),
                Some(d) if d != count => {
                    return Err(Error::parse(
                        lineno + 1,
                        format!("expected {d} columns, found {count}"),
                    ))
                }
                _ => {}
            }
        }
        let dim = dim.ok_or(Error::EmptyCloud)?;
        PointCloud::new(dim, coords)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for p in self.points() {
            let line: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Distance from `x` to the nearest point of `cloud`.
pub fn distance_to_cloud(x: &[f64], cloud: &PointCloud) -> f64 {
    cloud
        .points()
        .map(|p| squared_euclidean(x, p))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// `sup_{x in from} d(x, to)`.
pub fn directed_hausdorff(from: &PointCloud, to: &PointCloud) -> Result<f64> {
    check_pair(from, to)?;
    Ok(from
        .points()
        .map(|x| distance_to_cloud(x, to))
        .fold(0.0, f64::max))
}

/// Hausdorff distance between two finite clouds.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

fn check_pair(a: &PointCloud, b: &PointCloud) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(())
}

/// Intrinsic dimension `d` and ball diameter `r_n` of the mass density
/// estimator `P_n(B(x, r_n/2)) / r_n^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityParams {
    pub intrinsic_dim: usize,
    pub radius: f64,
}

impl DensityParams {
    pub fn new(intrinsic_dim: usize, radius: f64) -> Result<Self> {
        if intrinsic_dim == 0 {
            return Err(Error::param("intrinsic dimension must be at least 1"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::param(format!("radius must be positive, got {radius}")));
        }
        Ok(DensityParams {
            intrinsic_dim,
            radius,
        })
    }

    /// Uses [`default_rn`] for the radius.
    pub fn with_default_radius(n: usize, intrinsic_dim: usize) -> Result<Self> {
        DensityParams::new(intrinsic_dim, default_rn(n, intrinsic_dim)?)
    }

    fn check(&self, cloud: &PointCloud) -> Result<()> {
        if self.intrinsic_dim == 0 || self.intrinsic_dim > cloud.dim() {
            return Err(Error::param(format!(
                "intrinsic dimension {} outside [1, {}]",
                self.intrinsic_dim,
                cloud.dim()
            )));
        }
        if !(self.radius > 0.0) {
            return Err(Error::param("radius must be positive"));
        }
        Ok(())
    }
}

/// `(ln n / n)^(1/(d+2))`.
pub fn default_rn(n: usize, d: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::param(format!("default radius needs n >= 2, got {n}")));
    }
    if d == 0 {
        return Err(Error::param("intrinsic dimension must be at least 1"));
    }
    let n = n as f64;
    Ok((n.ln() / n).powf(1.0 / (d as f64 + 2.0)))
}

/// Fraction of the sample within distance `r/2` of `x`, divided by `r^d`.
pub fn local_density(cloud: &PointCloud, x: &[f64], params: &DensityParams) -> Result<f64> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if x.len() != cloud.dim() {
        return Err(Error::DimensionMismatch {
            expected: cloud.dim(),
            found: x.len(),
        });
    }
    params.check(cloud)?;
    let half = params.radius / 2.0;
    let count = cloud.points().filter(|p| euclidean(x, p) <= half).count();
    Ok(normalize_count(count, cloud.len(), params))
}

fn normalize_count(count: usize, n: usize, params: &DensityParams) -> f64 {
    count as f64 / n as f64 / params.radius.powi(params.intrinsic_dim as i32)
}

/// Local density at every sample point, in sample order.
pub fn local_densities(cloud: &PointCloud, params: &DensityParams) -> Result<Vec<f64>> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    params.check(cloud)?;
    let n = cloud.len();
    let half = params.radius / 2.0;
    let mut counts = vec![1usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if euclidean(cloud.point(i), cloud.point(j)) <= half {
                counts[i] += 1;
                counts[j] += 1;
            }
        }
    }
    Ok(counts
        .into_iter()
        .map(|c| normalize_count(c, n, params))
        .collect())
}

/// Plug-in estimate of the minimal normalized small-ball mass: the minimum
/// of [`local_density`] over the sample points.
pub fn rho_hat(cloud: &PointCloud, params: &DensityParams) -> Result<f64> {
    Ok(local_densities(cloud, params)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[[f64; 2]]) -> PointCloud {
        PointCloud::from_points(points).unwrap()
    }

    #[test]
    fn hausdorff_identity_and_single_pair() {
        let diamond = cloud(&[[2.0, 0.0], [0.0, 2.0], [-2.0, 0.0], [0.0, -2.0]]);
        assert_eq!(hausdorff(&diamond, &diamond).unwrap(), 0.0);
        let a = cloud(&[[0.0, 0.0]]);
        let b = cloud(&[[3.0, 4.0]]);
        assert_eq!(hausdorff(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn hausdorff_is_max_of_directed() {
        let a = cloud(&[[0.0, 0.0], [1.0, 0.0]]);
        let b = cloud(&[[0.0, 0.0]]);
        assert_eq!(directed_hausdorff(&b, &a).unwrap(), 0.0);
        assert_eq!(directed_hausdorff(&a, &b).unwrap(), 1.0);
        assert_eq!(hausdorff(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn hausdorff_errors() {
        let a = cloud(&[[0.0, 0.0]]);
        let b = PointCloud::from_points(&[[0.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            hausdorff(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
        let e = PointCloud::empty(2).unwrap();
        assert!(matches!(hausdorff(&a, &e), Err(Error::EmptyCloud)));
    }

    #[test]
    fn local_density_counts_itself() {
        let single = PointCloud::from_points(&[[0.3]]).unwrap();
        let p = DensityParams::new(1, 1.0).unwrap();
        assert_eq!(local_density(&single, &[0.3], &p).unwrap(), 1.0);
        assert_eq!(rho_hat(&single, &p).unwrap(), 1.0);

        let pair = PointCloud::from_points(&[[0.0], [10.0]]).unwrap();
        assert_eq!(local_density(&pair, &[0.0], &p).unwrap(), 0.5);
    }

    #[test]
    fn rho_hat_isolated_point_dominates() {
        let mut pts: Vec<[f64; 2]> = (0..99)
            .map(|i| {
                let a = i as f64 * 0.37;
                [0.01 * a.cos(), 0.01 * a.sin()]
            })
            .collect();
        pts.push([100.0, 0.0]);
        let c = cloud(&pts);
        let p = DensityParams::new(2, 1.0).unwrap();
        let r = rho_hat(&c, &p).unwrap();
        assert!((r - 0.01).abs() < 1e-15, "{r}");
    }

    #[test]
    fn intrinsic_dim_above_ambient_rejected() {
        let c = PointCloud::from_points(&[[0.0]]).unwrap();
        let p = DensityParams::new(2, 1.0).unwrap();
        assert!(rho_hat(&c, &p).is_err());
    }

    #[test]
    fn default_rn_values() {
        // n = 500, d = 1 and n = 1000, d = 2, evaluated independently.
        assert!((default_rn(500, 1).unwrap() - 0.231_640_546_443_433_9).abs() < 1e-12);
        assert!((default_rn(1000, 2).unwrap() - 0.288_293_091_858_711_55).abs() < 1e-12);
        assert!(default_rn(1, 1).is_err());
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let c = cloud(&[[0.1, -2.5], [1e-17, 3.0]]);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = PointCloud::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, c);
        assert!(PointCloud::read_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(PointCloud::read_csv("1,x\n".as_bytes()).is_err());
        assert!(matches!(
            PointCloud::read_csv("".as_bytes()),
            Err(Error::EmptyCloud)
        ));
    }
}
