//! Regular grids over axis-aligned boxes and scalar fields sampled on them.
//!
//! Vertices are indexed row-major: axis 0 varies slowest.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub res: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, res: usize) -> Result<Self> {
        if res < 2 {
            return Err(Error::param(format!("grid resolution must be >= 2, got {res}")));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::param(format!("invalid axis bounds [{lo}, {hi}]")));
        }
        Ok(Axis { lo, hi, res })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.res - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.res {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }
}

/// The vertex set of a regular grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    axes: Vec<Axis>,
}

impl GridGeometry {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::param("grid needs at least one axis"));
        }
        for a in &axes {
            Axis::new(a.lo, a.hi, a.res)?;
        }
        Ok(GridGeometry { axes })
    }

    /// Same bounds and resolution on every axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, res: usize) -> Result<Self> {
        GridGeometry::new(vec![Axis::new(lo, hi, res)?; dim])
    }

    /// The bounding box of `cloud` inflated by `margin` on every side.
    pub fn around(cloud: &PointCloud, margin: f64, res: usize) -> Result<Self> {
        let axes = cloud
            .bounding_box()?
            .into_iter()
            .map(|(lo, hi)| Axis::new(lo - margin, hi + margin, res))
            .collect::<Result<Vec<_>>>()?;
        GridGeometry::new(axes)
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.res).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.res).collect()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.axes[k + 1].res;
        }
        strides
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            out[k] = idx % self.axes[k].res;
            idx /= self.axes[k].res;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, a)| acc * a.res + i)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.coord(i))
            .collect()
    }

    /// All vertex coordinates, row-major, flattened.
    pub fn coordinates(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * self.dim());
        for idx in 0..self.len() {
            out.extend(self.point(idx));
        }
        out
    }

    /// Smallest `C` with the box contained in `[-C, C]^D`.
    pub fn half_width(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.lo.abs().max(a.hi.abs()))
            .fold(0.0, f64::max)
    }

    fn header(&self) -> String {
        self.axes
            .iter()
            .map(|a| format!("{},{},{}", a.lo, a.hi, a.res))
            .collect::<Vec<_>>()
            .join(";")
    }

    fn parse_header(line: &str) -> Result<Self> {
        let axes = line
            .split(';')
            .map(|spec| {
                let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Error::parse(1, format!("bad axis spec {spec:?}")));
                }
                let lo = parts[0]
                    .parse()
                    .map_err(|e| Error::parse(1, format!("{e}")))?;
                let hi = parts[1]
                    .parse()
                    .map_err(|e| Error::parse(1, format!("{e}")))?;
                let res = parts[2]
                    .parse()
                    .map_err(|e| Error::parse(1, format!("{e}")))?;
                Axis::new(lo, hi, res)
            })
            .collect::<Result<Vec<_>>>()?;
        GridGeometry::new(axes)
    }
}

/// A scalar function sampled at the vertices of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    geometry: GridGeometry,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(geometry: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} vertices",
                values.len(),
                geometry.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("grid field values must be finite"));
        }
        Ok(GridField { geometry, values })
    }

    /// A 1-D field on `[0, len-1]` with unit spacing.
    pub fn from_values_1d(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let geometry = GridGeometry::new(vec![Axis::new(0.0, (n.max(2) - 1) as f64, n)?])?;
        GridField::new(geometry, values)
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn negated(&self) -> GridField {
        GridField {
            geometry: self.geometry.clone(),
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// Header `lo,hi,res;lo,hi,res;...`, then one line per row of the last axis.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.geometry.header())?;
        let row = self.geometry.axes().last().map_or(1, |a| a.res);
        for chunk in self.values.chunks(row) {
            let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))??;
        let geometry = GridGeometry::parse_header(header.trim())?;
        let mut values = Vec::with_capacity(geometry.len());
        for (k, line) in lines.enumerate() {
            let line = line?;
            for field in line.split(',').map(str::trim).filter(|f| !f.is_empty()) {
                values.push(
                    field
                        .parse()
                        .map_err(|e| Error::parse(k + 2, format!("{field:?}: {e}")))?,
                );
            }
        }
        GridField::new(geometry, values)
    }
}
