//! Simplices, filtrations, and the two filtration builders: Vietoris–Rips on
//! point clouds and lower-star on grid fields.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{euclidean, PointCloud};
use crate::grid::GridField;

/// A simplex as a strictly increasing list of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    /// Sorts the vertices; rejects empty or repeated vertex lists.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::param("a simplex needs at least one vertex"));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param(format!("repeated vertex in {vertices:?}")));
        }
        Ok(Simplex(vertices))
    }

    pub fn vertex(v: usize) -> Self {
        Simplex(vec![v])
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// Codimension-1 faces, each omitting one vertex (empty for vertices).
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let k = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..k).map(move |skip| {
            Simplex(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }
}

/// A filtered simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSimplex {
    pub simplex: Simplex,
    pub value: f64,
}

/// Canonical filtration order: value, then dimension, then vertices.
pub fn canonical_order(a: &FilteredSimplex, b: &FilteredSimplex) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.simplex.dim().cmp(&b.simplex.dim()))
        .then_with(|| a.simplex.cmp(&b.simplex))
}

/// An ordered sequence of simplices with filtration values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Filtration {
    simplices: Vec<FilteredSimplex>,
}

impl Filtration {
    /// Sorts into canonical order and checks face closure.
    pub fn new(mut simplices: Vec<FilteredSimplex>) -> Result<Self> {
        if simplices.iter().any(|s| s.value.is_nan()) {
            return Err(Error::InvalidFiltration("NaN filtration value".into()));
        }
        simplices.sort_by(canonical_order);
        let f = Filtration { simplices };
        f.validate()?;
        Ok(f)
    }

    /// Keeps the given order without checking it; [`crate::persistence::reduce`]
    /// rejects sequences where a face follows its coface.
    pub fn from_sequence(simplices: Vec<FilteredSimplex>) -> Self {
        Filtration { simplices }
    }

    pub fn from_pairs(entries: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        let simplices = entries
            .into_iter()
            .map(|(v, value)| {
                Ok(FilteredSimplex {
                    simplex: Simplex::new(v)?,
                    value,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Filtration::new(simplices)
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplices(&self) -> &[FilteredSimplex] {
        &self.simplices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, FilteredSimplex> {
        self.simplices.iter()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.simplices.iter().map(|s| s.simplex.dim()).max()
    }

    /// Sorted distinct filtration values.
    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.simplices.iter().map(|s| s.value).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Checks that every facet appears earlier with a value no larger than
    /// its coface's.
    pub fn validate(&self) -> Result<()> {
        self.index_with_facets().map(|_| ())
    }

    /// Position of each simplex and, for each simplex, the positions of its
    /// facets in increasing order.
    pub(crate) fn index_with_facets(&self) -> Result<Vec<Vec<usize>>> {
        let mut position: HashMap<&Simplex, usize> = HashMap::with_capacity(self.len());
        let mut boundaries = Vec::with_capacity(self.len());
        for (j, s) in self.simplices.iter().enumerate() {
            let mut col = Vec::with_capacity(s.simplex.dim() + 1);
            for facet in s.simplex.facets() {
                let &i = position.get(&facet).ok_or_else(|| {
                    Error::InvalidFiltration(format!(
                        "facet {:?} of {:?} does not precede it",
                        facet.vertices(),
                        s.simplex.vertices()
                    ))
                })?;
                if self.simplices[i].value > s.value {
                    return Err(Error::InvalidFiltration(format!(
                        "facet {:?} has value {} above its coface {:?} at {}",
                        facet.vertices(),
                        self.simplices[i].value,
                        s.simplex.vertices(),
                        s.value
                    )));
                }
                col.push(i);
            }
            if position.insert(&s.simplex, j).is_some() {
                return Err(Error::InvalidFiltration(format!(
                    "duplicate simplex {:?}",
                    s.simplex.vertices()
                )));
            }
            col.sort_unstable();
            boundaries.push(col);
        }
        Ok(boundaries)
    }

    /// Debug dump: one `value dim v0 v1 ... vk` line per simplex.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        for s in &self.simplices {
            write!(w, "{} {}", s.value, s.simplex.dim())?;
            for v in s.simplex.vertices() {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Vietoris–Rips filtration: an edge `{i, j}` enters at `|X_i - X_j| / 2`,
/// a higher simplex at the largest of its edge values. Simplices above
/// `max_scale` or of dimension above `max_dim` are left out.
pub fn rips_filtration(cloud: &PointCloud, max_scale: f64, max_dim: usize) -> Result<Filtration> {
    if !(max_scale > 0.0) {
        return Err(Error::param(format!("max_scale must be positive, got {max_scale}")));
    }
    let n = cloud.len();
    let mut value = vec![0.0; n * n];
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let v = euclidean(cloud.point(i), cloud.point(j)) / 2.0;
            value[i * n + j] = v;
            value[j * n + i] = v;
            if v <= max_scale {
                neighbors[i].push(j);
            }
        }
    }

    let mut out: Vec<FilteredSimplex> = (0..n)
        .map(|v| FilteredSimplex {
            simplex: Simplex::vertex(v),
            value: 0.0,
        })
        .collect();

    // Grow cliques by appending larger common neighbors.
    let mut stack: Vec<(Vec<usize>, f64, Vec<usize>)> = Vec::new();
    if max_dim >= 1 {
        for v in 0..n {
            stack.push((vec![v], 0.0, neighbors[v].clone()));
        }
    }
    while let Some((verts, val, candidates)) = stack.pop() {
        for (k, &w) in candidates.iter().enumerate() {
            let new_val = verts.iter().map(|&u| value[u * n + w]).fold(val, f64::max);
            let mut new_verts = verts.clone();
            new_verts.push(w);
            if new_verts.len() - 1 < max_dim {
                let next: Vec<usize> = candidates[k + 1..]
                    .iter()
                    .copied()
                    .filter(|&x| value[w * n + x] <= max_scale)
                    .collect();
                stack.push((new_verts.clone(), new_val, next));
            }
            out.push(FilteredSimplex {
                simplex: Simplex(new_verts),
                value: new_val,
            });
        }
    }
    out.sort_by(canonical_order);
    Ok(Filtration { simplices: out })
}

/// Lower-star filtration of a grid field over the Freudenthal (Kuhn)
/// triangulation: each cube splits into `D!` simplices, one per axis
/// permutation, and each simplex enters at the max of its vertex values.
///
/// Pass a negated field to filter by upper level sets.
pub fn lower_star_filtration(field: &GridField) -> Result<Filtration> {
    let geom = field.geometry();
    if geom.is_empty() {
        return Err(Error::param("empty grid"));
    }
    let dim = geom.dim();
    let shape = geom.shape();
    let strides = geom.strides();
    let values = field.values();

    let perms = permutations(dim);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::new();

    let cube_count: usize = shape.iter().map(|&r| r - 1).product();
    let mut base = vec![0usize; dim];
    for _ in 0..cube_count {
        let base_idx: usize = base.iter().zip(&strides).map(|(i, s)| i * s).sum();
        for perm in &perms {
            let mut top = Vec::with_capacity(dim + 1);
            let mut cur = base_idx;
            top.push(cur);
            for &axis in perm {
                cur += strides[axis];
                top.push(cur);
            }
            // All nonempty faces of the top simplex.
            for mask in 1u32..(1u32 << (dim + 1)) {
                let mut face: Vec<usize> = (0..=dim)
                    .filter(|&k| mask & (1 << k) != 0)
                    .map(|k| top[k])
                    .collect();
                face.sort_unstable();
                if seen.insert(face.clone()) {
                    let value = face.iter().map(|&v| values[v]).fold(f64::NEG_INFINITY, f64::max);
                    out.push(FilteredSimplex {
                        simplex: Simplex(face),
                        value,
                    });
                }
            }
        }
        // Advance the cube base index, last axis fastest.
        for k in (0..dim).rev() {
            base[k] += 1;
            if base[k] < shape[k] - 1 {
                break;
            }
            base[k] = 0;
        }
    }
    out.sort_by(canonical_order);
    Ok(Filtration { simplices: out })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out.sort();
    out
}
