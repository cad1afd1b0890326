//! Seeded synthetic samples: circles, the eyeglasses curve, the Bart Simpson
//! density, and uniform outliers.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution as _, Normal as NormalSampler};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::resample::stream;

/// Default angular spread of the truncated normal circle, in radians.
pub const DEFAULT_SIGMA: f64 = 1.75;
/// Default half-distance between the eyeglasses' circle centers.
pub const DEFAULT_EYEGLASSES_OFFSET: f64 = 0.9;
/// Default outlier count as a fraction of `n`.
pub const DEFAULT_OUTLIER_FRACTION: f64 = 0.05;
/// Default growth of the outlier box relative to the data bounding box.
pub const DEFAULT_OUTLIER_INFLATION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    UniformCircle { radius: f64 },
    /// Angle with density proportional to `exp(-θ²/(2σ²))` on `(-π, π]`.
    TruncatedNormalCircle { radius: f64, sigma: f64 },
    /// Outer boundary of two unit circles centered at `(±offset, 0)`,
    /// uniform in arc length.
    Eyeglasses { offset: f64 },
    /// The one-dimensional claw mixture of [`bart_simpson_pdf`].
    BartSimpson,
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::UniformCircle { .. } => "uniform_circle",
            Shape::TruncatedNormalCircle { .. } => "truncated_normal_circle",
            Shape::Eyeglasses { .. } => "eyeglasses",
            Shape::BartSimpson => "bart_simpson",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::BartSimpson => 1,
            _ => 2,
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_circle" => Ok(Shape::UniformCircle { radius: 1.0 }),
            "truncated_normal_circle" => Ok(Shape::TruncatedNormalCircle {
                radius: 1.0,
                sigma: DEFAULT_SIGMA,
            }),
            "eyeglasses" => Ok(Shape::Eyeglasses {
                offset: DEFAULT_EYEGLASSES_OFFSET,
            }),
            "bart_simpson" => Ok(Shape::BartSimpson),
            other => Err(Error::param(format!("unknown generator kind {other:?}"))),
        }
    }
}

/// Uniform points added to a sample, drawn from its bounding box grown by
/// `inflation` times its width (half on each side).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outliers {
    pub count: usize,
    pub inflation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub shape: Shape,
    pub n: usize,
    pub seed: u64,
    pub outliers: Option<Outliers>,
}

impl GeneratorSpec {
    pub fn new(shape: Shape, n: usize, seed: u64) -> Self {
        GeneratorSpec {
            shape,
            n,
            seed,
            outliers: None,
        }
    }

    pub fn with_outliers(mut self, count: usize) -> Self {
        self.outliers = Some(Outliers {
            count,
            inflation: DEFAULT_OUTLIER_INFLATION,
        });
        self
    }

    /// Parses `kind` or `kind+outliers`; the latter adds the default
    /// fraction of outliers.
    pub fn parse(kind: &str, n: usize, seed: u64) -> Result<Self> {
        match kind.strip_suffix("+outliers") {
            Some(inner) => {
                let count = (DEFAULT_OUTLIER_FRACTION * n as f64).round() as usize;
                Ok(GeneratorSpec::new(inner.parse()?, n, seed).with_outliers(count))
            }
            None => Ok(GeneratorSpec::new(kind.parse()?, n, seed)),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.shape.name())?;
        if self.outliers.is_some() {
            write!(f, "+outliers")?;
        }
        Ok(())
    }
}

/// Draws the sample. Shape points come from stream 0 of the seed and
/// outliers from stream 1; outliers follow the shape points.
pub fn generate(spec: &GeneratorSpec) -> Result<PointCloud> {
    if spec.n == 0 {
        return Err(Error::param("sample size must be positive"));
    }
    let mut rng = stream(spec.seed, 0);
    let mut cloud = match spec.shape {
        Shape::UniformCircle { radius } => {
            check_positive("radius", radius)?;
            let pts: Vec<[f64; 2]> = (0..spec.n)
                .map(|_| polar(radius, rng.random_range(0.0..TAU)))
                .collect();
            PointCloud::from_points(&pts)?
        }
        Shape::TruncatedNormalCircle { radius, sigma } => {
            check_positive("radius", radius)?;
            check_positive("sigma", sigma)?;
            let std = Normal::standard();
            let (lo, hi) = (std.cdf(-PI / sigma), std.cdf(PI / sigma));
            let pts: Vec<[f64; 2]> = (0..spec.n)
                .map(|_| {
                    let u: f64 = rng.random();
                    let theta = sigma * std.inverse_cdf(lo + u * (hi - lo));
                    polar(radius, theta.clamp(-PI, PI))
                })
                .collect();
            PointCloud::from_points(&pts)?
        }
        Shape::Eyeglasses { offset } => {
            if !(offset > 0.0 && offset < 1.0) {
                return Err(Error::param(format!(
                    "eyeglasses offset must lie in (0, 1), got {offset}"
                )));
            }
            // Left circle keeps the arc with x <= 0, i.e. θ in [a, 2π - a].
            let a = offset.acos();
            let pts: Vec<[f64; 2]> = (0..spec.n)
                .map(|_| {
                    let theta = rng.random_range(a..TAU - a);
                    let [x, y] = polar(1.0, theta);
                    if rng.random_bool(0.5) {
                        [x - offset, y]
                    } else {
                        [offset - x, y]
                    }
                })
                .collect();
            PointCloud::from_points(&pts)?
        }
        Shape::BartSimpson => {
            let pts: Vec<[f64; 1]> = (0..spec.n)
                .map(|_| {
                    let k = rng.random_range(0..10);
                    let (mean, sd) = if k < 5 {
                        (0.0, 1.0)
                    } else {
                        ((k - 5) as f64 / 2.0 - 1.0, 0.1)
                    };
                    [NormalSampler::new(mean, sd).expect("valid normal").sample(&mut rng)]
                })
                .collect();
            PointCloud::from_points(&pts)?
        }
    };

    if let Some(out) = spec.outliers {
        if !(out.inflation >= 0.0) {
            return Err(Error::param("outlier inflation must be non-negative"));
        }
        let bbox = cloud.bounding_box()?;
        let mut rng = stream(spec.seed, 1);
        for _ in 0..out.count {
            let p: Vec<f64> = bbox
                .iter()
                .map(|&(lo, hi)| {
                    let pad = 0.5 * out.inflation * (hi - lo);
                    if hi - lo + 2.0 * pad > 0.0 {
                        rng.random_range(lo - pad..hi + pad)
                    } else {
                        lo
                    }
                })
                .collect();
            cloud.push(&p)?;
        }
    }
    Ok(cloud)
}

fn polar(radius: f64, theta: f64) -> [f64; 2] {
    [radius * theta.cos(), radius * theta.sin()]
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be positive, got {v}")))
    }
}

fn bart_terms() -> [(f64, f64, f64); 6] {
    [
        (0.5, 0.0, 1.0),
        (0.1, -1.0, 0.1),
        (0.1, -0.5, 0.1),
        (0.1, 0.0, 0.1),
        (0.1, 0.5, 0.1),
        (0.1, 1.0, 0.1),
    ]
}

/// `p(x) = ½ φ(x; 0, 1) + (1/10) Σ_{j=0}^{4} φ(x; j/2 - 1, 1/10)`.
pub fn bart_simpson_pdf(x: f64) -> f64 {
    bart_terms()
        .iter()
        .map(|&(w, m, s)| w * Normal::new(m, s).expect("valid normal").pdf(x))
        .sum()
}

pub fn bart_simpson_cdf(x: f64) -> f64 {
    bart_terms()
        .iter()
        .map(|&(w, m, s)| w * Normal::new(m, s).expect("valid normal").cdf(x))
        .sum()
}

/// Distance from `p` to the eyeglasses curve with the given offset.
pub fn eyeglasses_distance(p: &[f64], offset: f64) -> f64 {
    // Each lobe is the part of its circle outside the other disk.
    let lobe = |cx: f64, keep: &dyn Fn(f64) -> bool| -> f64 {
        let (dx, dy) = (p[0] - cx, p[1]);
        let r = dx.hypot(dy);
        let qx = if r > 0.0 { cx + dx / r } else { cx - 1.0 };
        if keep(qx) {
            (r - 1.0).abs()
        } else {
            // Nearest point is one of the junctions.
            let y = (1.0 - offset * offset).sqrt();
            (p[0].hypot(p[1] - y)).min(p[0].hypot(p[1] + y))
        }
    };
    lobe(-offset, &|x| x <= 0.0).min(lobe(offset, &|x| x >= 0.0))
}
