//! Z2 boundary-matrix reduction, persistence diagrams, and a rank-based
//! Betti number oracle.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::complex::Filtration;
use crate::error::{Error, Result};

/// One point of a persistence diagram.
///
/// `death` is infinite for essential classes. Diagrams built from upper
/// level sets have `birth >= death`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn new(dim: usize, birth: f64, death: f64) -> Self {
        PersistencePair { dim, birth, death }
    }

    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    /// `|death - birth|`.
    pub fn persistence(&self) -> f64 {
        (self.death - self.birth).abs()
    }

    /// L∞ distance to the diagonal, `|death - birth| / 2`.
    pub fn diagonal_distance(&self) -> f64 {
        self.persistence() / 2.0
    }

    /// Euclidean distance to the diagonal, `|death - birth| / √2`.
    pub fn euclidean_diagonal_distance(&self) -> f64 {
        self.persistence() / std::f64::consts::SQRT_2
    }
}

/// A multiset of persistence pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    pairs: Vec<PersistencePair>,
}

impl PersistenceDiagram {
    pub fn new(pairs: Vec<PersistencePair>) -> Self {
        PersistenceDiagram { pairs }
    }

    pub fn pairs(&self) -> &[PersistencePair] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<PersistencePair> {
        self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn push(&mut self, pair: PersistencePair) {
        self.pairs.push(pair);
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// The sub-diagram of one homology dimension.
    pub fn restrict(&self, dim: usize) -> PersistenceDiagram {
        PersistenceDiagram::new(self.in_dim(dim).copied().collect())
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.pairs.iter().map(|p| p.dim).max()
    }

    /// Drops pairs with `birth == death`.
    pub fn without_zero_persistence(&self) -> PersistenceDiagram {
        PersistenceDiagram::new(
            self.pairs
                .iter()
                .filter(|p| p.birth != p.death)
                .copied()
                .collect(),
        )
    }

    /// Pairs sorted by dimension, then birth, then death.
    pub fn sorted(&self) -> PersistenceDiagram {
        let mut pairs = self.pairs.clone();
        pairs.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
        });
        PersistenceDiagram { pairs }
    }

    /// Largest finite birth or death value, for plotting.
    pub fn finite_extent(&self) -> Option<(f64, f64)> {
        let mut it = self
            .pairs
            .iter()
            .flat_map(|p| [p.birth, p.death])
            .filter(|v| v.is_finite());
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
    }

    /// CSV with header `dim,birth,death`; essential deaths as `inf`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "dim,birth,death")?;
        for p in &self.pairs {
            writeln!(w, "{},{},{}", p.dim, p.birth, p.death)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (k, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (k == 0 && line.starts_with("dim")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::parse(k + 1, format!("expected 3 fields, got {}", fields.len())));
            }
            let dim = fields[0]
                .parse()
                .map_err(|e| Error::parse(k + 1, format!("dim {:?}: {e}", fields[0])))?;
            let birth: f64 = fields[1]
                .parse()
                .map_err(|e| Error::parse(k + 1, format!("birth {:?}: {e}", fields[1])))?;
            let death: f64 = fields[2]
                .parse()
                .map_err(|e| Error::parse(k + 1, format!("death {:?}: {e}", fields[2])))?;
            if birth.is_nan() || death.is_nan() {
                return Err(Error::parse(k + 1, "NaN in diagram"));
            }
            pairs.push(PersistencePair { dim, birth, death });
        }
        Ok(PersistenceDiagram { pairs })
    }
}

/// Reduction variants. Both produce the same pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    /// Plain left-to-right column reduction.
    #[default]
    Standard,
    /// Processes dimensions top-down and zeroes the columns of simplices
    /// already known to be births of a higher-dimensional death.
    Clearing,
}

/// Reduction output in terms of filtration indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    /// `(birth index, death index)` for every finite pair, including
    /// zero-persistence ones.
    pub finite: Vec<(usize, usize)>,
    /// Indices of simplices creating essential classes.
    pub essential: Vec<usize>,
}

/// The diagram of a filtration without zero-persistence pairs.
pub fn reduce(filtration: &Filtration) -> Result<PersistenceDiagram> {
    Ok(diagram_from_pairing(filtration, &pairing(filtration, Algorithm::Standard)?).without_zero_persistence())
}

/// The full diagram including zero-persistence pairs.
pub fn reduce_all(filtration: &Filtration, algorithm: Algorithm) -> Result<PersistenceDiagram> {
    Ok(diagram_from_pairing(filtration, &pairing(filtration, algorithm)?))
}

pub fn diagram_from_pairing(filtration: &Filtration, pairing: &Pairing) -> PersistenceDiagram {
    let s = filtration.simplices();
    let mut pairs: Vec<PersistencePair> = pairing
        .finite
        .iter()
        .map(|&(b, d)| PersistencePair::new(s[b].simplex.dim(), s[b].value, s[d].value))
        .collect();
    pairs.extend(
        pairing
            .essential
            .iter()
            .map(|&b| PersistencePair::new(s[b].simplex.dim(), s[b].value, f64::INFINITY)),
    );
    PersistenceDiagram::new(pairs)
}

/// Reduces the boundary matrix of `filtration` over Z2.
pub fn pairing(filtration: &Filtration, algorithm: Algorithm) -> Result<Pairing> {
    let mut columns = filtration.index_with_facets()?;
    let n = columns.len();
    // pivot_of[row] = column whose lowest entry is `row`.
    let mut pivot_of: Vec<Option<usize>> = vec![None; n];

    let order: Vec<usize> = match algorithm {
        Algorithm::Standard => (0..n).collect(),
        Algorithm::Clearing => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&j| (std::cmp::Reverse(filtration.simplices()[j].simplex.dim()), j));
            order
        }
    };

    let mut cleared = vec![false; n];
    for &j in &order {
        if cleared[j] {
            columns[j].clear();
            continue;
        }
        let mut col = std::mem::take(&mut columns[j]);
        while let Some(&low) = col.last() {
            match pivot_of[low] {
                Some(k) => col = symmetric_difference(&col, &columns[k]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivot_of[low] = Some(j);
            if algorithm == Algorithm::Clearing {
                cleared[low] = true;
            }
        }
        columns[j] = col;
    }

    let mut finite = Vec::new();
    let mut essential = Vec::new();
    let mut is_death = vec![false; n];
    for (row, p) in pivot_of.iter().enumerate() {
        if let Some(j) = *p {
            finite.push((row, j));
            is_death[j] = true;
        }
    }
    for j in 0..n {
        if columns[j].is_empty() && pivot_of[j].is_none() && !is_death[j] {
            essential.push(j);
        }
    }
    Ok(Pairing { finite, essential })
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// β_p of the subcomplex of simplices with value `<= value`, by dense Z2
/// Gaussian elimination: `dim C_p - rank ∂_p - rank ∂_{p+1}`.
///
/// Independent of [`reduce`]; meant as a cross-check.
pub fn betti_at(filtration: &Filtration, value: f64, p: usize) -> usize {
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut by_dim: Vec<Vec<usize>> = Vec::new();
    for s in filtration.iter().filter(|s| s.value <= value) {
        let d = s.simplex.dim();
        if by_dim.len() <= d {
            by_dim.resize(d + 1, Vec::new());
        }
        let local = by_dim[d].len();
        by_dim[d].push(index.len());
        index.insert(s.simplex.vertices().to_vec(), local);
    }

    let count = |d: usize| by_dim.get(d).map_or(0, Vec::len);
    let c_p = count(p);
    if c_p == 0 {
        return 0;
    }
    let rank_of = |d: usize| -> usize {
        // Rank of ∂_d : C_d -> C_{d-1}.
        if d == 0 || count(d) == 0 || count(d - 1) == 0 {
            return 0;
        }
        let rows = count(d - 1);
        let words = rows.div_ceil(64);
        let mut matrix: Vec<Vec<u64>> = filtration
            .iter()
            .filter(|s| s.value <= value && s.simplex.dim() == d)
            .map(|s| {
                let mut bits = vec![0u64; words];
                for facet in s.simplex.facets() {
                    let r = index[facet.vertices()];
                    bits[r / 64] ^= 1 << (r % 64);
                }
                bits
            })
            .collect();
        gf2_rank(&mut matrix, rows)
    };
    c_p - rank_of(p) - rank_of(p + 1)
}

/// Rank over Z2 of the row vectors in `rows` (each `width` bits wide).
pub fn gf2_rank(rows: &mut [Vec<u64>], width: usize) -> usize {
    let mut rank = 0;
    for bit in 0..width {
        let (w, mask) = (bit / 64, 1u64 << (bit % 64));
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & mask != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & mask != 0 {
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// β_p at `value` read off a diagram: pairs of dimension `p` alive at
/// `value`, i.e. `birth <= value < death`.
pub fn betti_from_diagram(diagram: &PersistenceDiagram, value: f64, p: usize) -> usize {
    diagram
        .in_dim(p)
        .filter(|q| q.birth <= value && value < q.death)
        .count()
}

/// `2 Σ ((death - birth)/2)^degree` over finite pairs whose half-persistence
/// exceeds `threshold`.
pub fn total_persistence(diagram: &PersistenceDiagram, degree: f64, threshold: f64) -> Result<f64> {
    if !(degree > 0.0) {
        return Err(Error::param(format!("degree must be positive, got {degree}")));
    }
    Ok(2.0
        * diagram
            .pairs()
            .iter()
            .filter(|p| !p.is_essential())
            .map(PersistencePair::diagonal_distance)
            .filter(|&h| h > threshold)
            .map(|h| h.powf(degree))
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::rips_filtration;
    use crate::geometry::PointCloud;

    fn pairs_of(d: &PersistenceDiagram, dim: usize) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = d.in_dim(dim).map(|p| (p.birth, p.death)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        v
    }

    fn square() -> Filtration {
        let cloud =
            PointCloud::from_points(&[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]).unwrap();
        rips_filtration(&cloud, 2.0, 2).unwrap()
    }

    #[test]
    fn two_vertices_merge() {
        let f = Filtration::from_pairs(vec![(vec![0], 0.0), (vec![1], 0.0), (vec![0, 1], 1.0)])
            .unwrap();
        let d = reduce(&f).unwrap();
        assert_eq!(pairs_of(&d, 0), vec![(0.0, 1.0), (0.0, f64::INFINITY)]);
    }

    #[test]
    fn equilateral_triangle() {
        let h = 3f64.sqrt() / 2.0;
        let cloud = PointCloud::from_points(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]).unwrap();
        let f = rips_filtration(&cloud, 1.0, 2).unwrap();
        let d = reduce(&f).unwrap();
        let h0 = pairs_of(&d, 0);
        assert_eq!(h0.len(), 3);
        assert!(h0[..2].iter().all(|&(b, e)| b == 0.0 && (e - 0.5).abs() < 1e-12));
        assert!(h0[2].1.is_infinite());
        assert!(pairs_of(&d, 1).is_empty());
    }

    #[test]
    fn square_loop() {
        let f = square();
        let d = reduce(&f).unwrap();
        let h1 = pairs_of(&d, 1);
        assert_eq!(h1.len(), 1);
        assert!((h1[0].0 - 2f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((h1[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(betti_at(&f, 0.9, 1), 1);
        assert_eq!(betti_at(&f, 1.0, 1), 0);
    }

    #[test]
    fn house_complex() {
        // A pentagon a-b-c-d-e with chord b-d and the triangle b-c-d filled.
        let mut entries: Vec<(Vec<usize>, f64)> = (0..5).map(|v| (vec![v], 0.0)).collect();
        for e in [[0, 1], [1, 2], [2, 3], [3, 4], [0, 4], [1, 3]] {
            entries.push((e.to_vec(), 0.0));
        }
        entries.push((vec![1, 2, 3], 0.0));
        let f = Filtration::from_pairs(entries).unwrap();
        assert_eq!(betti_at(&f, 0.0, 0), 1);
        assert_eq!(betti_at(&f, 0.0, 1), 1);
        assert_eq!(betti_at(&Filtration::from_pairs(vec![(vec![7], 0.0)]).unwrap(), 0.0, 0), 1);
    }

    #[test]
    fn clearing_matches_standard() {
        let f = square();
        let a = reduce_all(&f, Algorithm::Standard).unwrap().sorted();
        let b = reduce_all(&f, Algorithm::Clearing).unwrap().sorted();
        assert_eq!(a, b);
        // Every simplex is used exactly once.
        let p = pairing(&f, Algorithm::Standard).unwrap();
        assert_eq!(2 * p.finite.len() + p.essential.len(), f.len());
    }

    #[test]
    fn rejects_face_after_coface() {
        use crate::complex::{FilteredSimplex, Simplex};
        let f = Filtration::from_sequence(vec![
            FilteredSimplex { simplex: Simplex::new(vec![0, 1]).unwrap(), value: 0.0 },
            FilteredSimplex { simplex: Simplex::vertex(0), value: 0.0 },
            FilteredSimplex { simplex: Simplex::vertex(1), value: 0.0 },
        ]);
        assert!(matches!(reduce(&f), Err(Error::InvalidFiltration(_))));
    }

    #[test]
    fn total_persistence_examples() {
        assert_eq!(total_persistence(&PersistenceDiagram::default(), 1.0, 0.0).unwrap(), 0.0);
        let one = PersistenceDiagram::new(vec![PersistencePair::new(0, 0.0, 2.0)]);
        assert_eq!(total_persistence(&one, 1.0, 0.0).unwrap(), 2.0);
        let two = PersistenceDiagram::new(vec![
            PersistencePair::new(0, 0.0, 2.0),
            PersistencePair::new(0, 0.0, 4.0),
        ]);
        assert_eq!(total_persistence(&two, 2.0, 1.5).unwrap(), 8.0);
        assert!(total_persistence(&two, 0.0, 0.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let d = PersistenceDiagram::new(vec![
            PersistencePair::new(0, 0.0, f64::INFINITY),
            PersistencePair::new(1, 0.25, 0.8660254037844386),
            PersistencePair::new(0, 3.0, f64::NEG_INFINITY),
        ]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("dim,birth,death\n0,0,inf\n"));
        assert_eq!(PersistenceDiagram::read_csv(buf.as_slice()).unwrap(), d);
        assert!(PersistenceDiagram::read_csv("dim,birth,death\n0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn gf2_rank_small() {
        let mut m = vec![vec![0b011u64], vec![0b110], vec![0b101]];
        assert_eq!(gf2_rank(&mut m, 3), 2);
    }
}
