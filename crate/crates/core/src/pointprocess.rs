//! Diagrams viewed as point processes: cell counts over the plane and
//! bootstrap intervals for the number of points far from the diagonal.

use std::io::{BufRead, Write};

use crate::density::{density_diagram, KernelMatrix, KernelSpec};
use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::grid::GridGeometry;
use crate::persistence::{PersistenceDiagram, PersistencePair};
use crate::resample::{bootstrap_indices, check_alpha, lower_quantile, stream, upper_quantile};

/// A square window `[lo, lo + cells·w)²` of the (birth, death) plane cut
/// into `cells × cells` half-open squares of side `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedDiagram {
    lo: f64,
    side: f64,
    cells: usize,
    /// Row-major, rows indexed by the birth cell.
    counts: Vec<u64>,
}

impl SmoothedDiagram {
    /// An empty histogram covering `[lo, hi)` with squares of side `w`; the
    /// last square may reach past `hi`.
    pub fn new(w: f64, window: (f64, f64)) -> Result<Self> {
        let (lo, hi) = window;
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::param(format!("cell side must be positive, got {w}")));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::param(format!("bad window [{lo}, {hi})")));
        }
        let cells = ((hi - lo) / w).ceil().max(1.0) as usize;
        Ok(SmoothedDiagram {
            lo,
            side: w,
            cells,
            counts: vec![0; cells * cells],
        })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// `(lo, hi)` of the covered window.
    pub fn window(&self) -> (f64, f64) {
        (self.lo, self.lo + self.cells as f64 * self.side)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, birth_cell: usize, death_cell: usize) -> u64 {
        self.counts[birth_cell * self.cells + death_cell]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn cell_of(&self, x: f64) -> Option<usize> {
        let k = ((x - self.lo) / self.side).floor();
        (k >= 0.0 && k < self.cells as f64).then_some(k as usize)
    }

    /// Adds the finite pairs of `diagram` lying in the window; returns how
    /// many were added.
    pub fn accumulate(&mut self, diagram: &PersistenceDiagram) -> usize {
        let mut added = 0;
        for p in diagram.pairs().iter().filter(|p| !p.is_essential()) {
            if let (Some(i), Some(j)) = (self.cell_of(p.birth), self.cell_of(p.death)) {
                self.counts[i * self.cells + j] += 1;
                added += 1;
            }
        }
        added
    }

    /// Header `lo,hi,cells;lo,hi,cells`, then one row of counts per birth
    /// cell.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let (lo, hi) = self.window();
        writeln!(w, "{lo},{hi},{c};{lo},{hi},{c}", c = self.cells)?;
        for row in self.counts.chunks(self.cells) {
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))??;
        let axes: Vec<Vec<&str>> = header.split(';').map(|a| a.split(',').collect()).collect();
        if axes.len() != 2 || axes.iter().any(|a| a.len() != 3) || axes[0] != axes[1] {
            return Err(Error::parse(1, format!("bad header {header:?}")));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::parse(1, e.to_string()));
        let (lo, hi) = (num(axes[0][0])?, num(axes[0][1])?);
        let cells: usize = axes[0][2]
            .trim()
            .parse()
            .map_err(|e: std::num::ParseIntError| Error::parse(1, e.to_string()))?;
        if cells == 0 {
            return Err(Error::parse(1, "zero cells"));
        }
        let mut out = SmoothedDiagram::new((hi - lo) / cells as f64, (lo, hi))?;
        if out.cells != cells {
            return Err(Error::parse(1, "window and cell count disagree"));
        }
        let mut row = 0;
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let values: Vec<u64> = line
                .split(',')
                .map(|s| s.trim().parse::<u64>().map_err(|e| Error::parse(k + 2, e.to_string())))
                .collect::<Result<_>>()?;
            if values.len() != cells || row >= cells {
                return Err(Error::parse(k + 2, "wrong number of counts"));
            }
            out.counts[row * cells..(row + 1) * cells].copy_from_slice(&values);
            row += 1;
        }
        if row != cells {
            return Err(Error::parse(row + 1, "missing rows"));
        }
        Ok(out)
    }
}

/// The bounding square of the finite pairs, grown by 10% of its width.
pub fn default_window(diagram: &PersistenceDiagram) -> (f64, f64) {
    match diagram.finite_extent() {
        Some((lo, hi)) => {
            let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
            (lo - pad, hi + pad)
        }
        None => (0.0, 1.0),
    }
}

/// Histogram of the finite pairs of `diagram` over the window.
pub fn smooth_diagram(diagram: &PersistenceDiagram, w: f64, window: (f64, f64)) -> Result<SmoothedDiagram> {
    let mut s = SmoothedDiagram::new(w, window)?;
    s.accumulate(diagram);
    Ok(s)
}

/// Euclidean distance from a pair to the diagonal. A class of a density
/// diagram that never dies (death `-∞`) is measured with death 0; one with
/// death `+∞` is infinitely far.
pub fn count_distance(p: &PersistencePair) -> f64 {
    if p.death == f64::NEG_INFINITY {
        p.birth.abs() / std::f64::consts::SQRT_2
    } else {
        p.euclidean_diagonal_distance()
    }
}

/// Number of pairs farther than `threshold` from the diagonal in Euclidean
/// distance.
pub fn count_beyond(diagram: &PersistenceDiagram, threshold: f64) -> usize {
    diagram
        .pairs()
        .iter()
        .filter(|p| count_distance(p) > threshold)
        .count()
}

/// Count statistics of the bootstrap replicates with the interval they
/// give.
#[derive(Debug, Clone, PartialEq)]
pub struct CountInterval {
    pub lo: usize,
    pub hi: usize,
    /// Count on the original sample.
    pub observed: usize,
    pub replicates: Vec<usize>,
}

/// Bootstrap `1 - alpha` interval for the number of density-diagram points
/// beyond `threshold`: the lower `alpha/2` and upper `alpha/2` quantiles
/// of the replicate counts.
pub fn bootstrap_count_ci(
    cloud: &PointCloud,
    kernel: &KernelSpec,
    grid: &GridGeometry,
    threshold: f64,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<CountInterval> {
    check_alpha(alpha)?;
    if reps == 0 {
        return Err(Error::param("need at least one bootstrap replicate"));
    }
    let matrix = KernelMatrix::new(cloud, kernel, grid)?;
    let observed = count_beyond(&density_diagram(&matrix.full()?)?, threshold);
    let n = matrix.sample_size();
    let replicates = (0..reps)
        .map(|j| {
            let idx = bootstrap_indices(&mut stream(seed, j as u64), n);
            Ok(count_beyond(&density_diagram(&matrix.resampled(&idx)?)?, threshold))
        })
        .collect::<Result<Vec<usize>>>()?;
    let as_f64: Vec<f64> = replicates.iter().map(|&c| c as f64).collect();
    let lo = lower_quantile(&as_f64, alpha / 2.0)? as usize;
    let hi = upper_quantile(&as_f64, alpha / 2.0)? as usize;
    Ok(CountInterval {
        lo,
        hi,
        observed,
        replicates,
    })
}

/// Sum of the smoothed bootstrap diagrams over `reps` replicates.
pub fn bootstrap_smoothed(
    cloud: &PointCloud,
    kernel: &KernelSpec,
    grid: &GridGeometry,
    w: f64,
    window: (f64, f64),
    reps: usize,
    seed: u64,
) -> Result<SmoothedDiagram> {
    let matrix = KernelMatrix::new(cloud, kernel, grid)?;
    let mut acc = SmoothedDiagram::new(w, window)?;
    let n = matrix.sample_size();
    for j in 0..reps {
        let idx = bootstrap_indices(&mut stream(seed, j as u64), n);
        acc.accumulate(&density_diagram(&matrix.resampled(&idx)?)?);
    }
    Ok(acc)
}
