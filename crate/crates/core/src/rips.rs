//! Rips persistence without materializing triangles.
//!
//! H0 comes from union-find over sorted edges. H1 comes from reducing the
//! coboundary matrix of the remaining edges in reverse filtration order,
//! enumerating cofacet triangles on demand. The pairing equals the one of
//! [`crate::persistence::reduce`] on [`crate::complex::rips_filtration`].

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use crate::complex::rips_filtration;
use crate::error::{Error, Result};
use crate::geometry::{euclidean, PointCloud};
use crate::persistence::{reduce_all, Algorithm, PersistenceDiagram, PersistencePair};

/// `min_i max_j |X_i - X_j| / 2`: above this scale the Rips complex is a cone
/// and carries no homology beyond one component.
pub fn enclosing_radius(cloud: &PointCloud) -> f64 {
    (0..cloud.len())
        .map(|i| {
            (0..cloud.len())
                .map(|j| euclidean(cloud.point(i), cloud.point(j)) / 2.0)
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Rips diagram in dimensions `0..max_dim` (at least H0), without
/// zero-persistence pairs.
///
/// Simplices up to dimension `max_dim` enter the filtration, so classes in
/// dimension `max_dim` itself could never die and are not reported.
pub fn rips_diagram(cloud: &PointCloud, max_scale: f64, max_dim: usize) -> Result<PersistenceDiagram> {
    if !(max_scale > 0.0) {
        return Err(Error::param(format!("max_scale must be positive, got {max_scale}")));
    }
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let top = max_dim.max(1);
    let threshold = max_scale.min(enclosing_radius(cloud));
    if top > 2 {
        let f = rips_filtration(cloud, threshold.max(f64::MIN_POSITIVE), top)?;
        let d = reduce_all(&f, Algorithm::Clearing)?.without_zero_persistence();
        return Ok(PersistenceDiagram::new(
            d.into_pairs().into_iter().filter(|p| p.dim < top).collect(),
        ));
    }
    Ok(Engine::new(cloud, threshold).run(top == 2))
}

#[derive(Clone, Copy, PartialEq)]
struct Key {
    value: f64,
    index: u64,
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Engine {
    n: usize,
    dist: Vec<f64>,
    threshold: f64,
    /// Edges `(value, i, j)` with `i < j` in filtration order.
    edges: Vec<(f64, usize, usize)>,
}

impl Engine {
    fn new(cloud: &PointCloud, threshold: f64) -> Self {
        let n = cloud.len();
        let mut dist = vec![0.0; n * n];
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let v = euclidean(cloud.point(i), cloud.point(j)) / 2.0;
                dist[i * n + j] = v;
                dist[j * n + i] = v;
                if v <= threshold {
                    edges.push((v, i, j));
                }
            }
        }
        edges.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        Engine {
            n,
            dist,
            threshold,
            edges,
        }
    }

    fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    fn triangle(&self, mut t: [usize; 3], value: f64) -> Key {
        t.sort_unstable();
        let n = self.n as u64;
        Key {
            value,
            index: (t[0] as u64 * n + t[1] as u64) * n + t[2] as u64,
        }
    }

    fn cofacets(&self, e: usize) -> impl Iterator<Item = Key> + '_ {
        let (v, i, j) = self.edges[e];
        (0..self.n).filter_map(move |k| {
            if k == i || k == j {
                return None;
            }
            let tv = v.max(self.d(i, k)).max(self.d(j, k));
            (tv <= self.threshold).then(|| self.triangle([i, j, k], tv))
        })
    }

    fn run(&self, with_h1: bool) -> PersistenceDiagram {
        let mut pairs = Vec::new();

        let mut parent: Vec<usize> = (0..self.n).collect();
        let mut negative = vec![false; self.edges.len()];
        for (idx, &(v, i, j)) in self.edges.iter().enumerate() {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
                negative[idx] = true;
                if v > 0.0 {
                    pairs.push(PersistencePair::new(0, 0.0, v));
                }
            }
        }
        for i in 0..self.n {
            if find(&mut parent, i) == i {
                pairs.push(PersistencePair::new(0, 0.0, f64::INFINITY));
            }
        }

        if with_h1 {
            self.h1(&negative, &mut pairs);
        }
        PersistenceDiagram::new(pairs)
    }

    fn h1(&self, negative: &[bool], pairs: &mut Vec<PersistencePair>) {
        // pivot triangle -> edges whose coboundaries sum to the reduced column
        let mut owner: HashMap<u64, Vec<usize>> = HashMap::new();
        for e in (0..self.edges.len()).rev() {
            if negative[e] {
                continue;
            }
            let value = self.edges[e].0;
            let first = self.cofacets(e).min();
            let pivot = match first {
                Some(p) if !owner.contains_key(&p.index) => {
                    owner.insert(p.index, vec![e]);
                    Some(p)
                }
                None => None,
                Some(_) => self.reduce_column(e, &mut owner),
            };
            match pivot {
                Some(p) if p.value > value => pairs.push(PersistencePair::new(1, value, p.value)),
                Some(_) => {}
                None => pairs.push(PersistencePair::new(1, value, f64::INFINITY)),
            }
        }
    }

    fn reduce_column(&self, e: usize, owner: &mut HashMap<u64, Vec<usize>>) -> Option<Key> {
        // Min-heap of the working column; equal entries cancel lazily.
        let mut column: BinaryHeap<Reverse<Key>> = self.cofacets(e).map(Reverse).collect();
        let mut combination = vec![e];
        let mut limit = 8 * self.n;
        while let Some(pivot) = pop_pivot(&mut column) {
            let Some(others) = owner.get(&pivot.index) else {
                combination.sort_unstable();
                owner.insert(pivot.index, cancel_pairs(combination));
                return Some(pivot);
            };
            column.push(Reverse(pivot));
            for &o in others {
                column.extend(self.cofacets(o).map(Reverse));
            }
            combination.extend_from_slice(others);
            if column.len() > limit {
                column = compact(column);
                limit = (2 * column.len()).max(8 * self.n);
            }
        }
        None
    }
}

fn pop_pivot(column: &mut BinaryHeap<Reverse<Key>>) -> Option<Key> {
    while let Some(Reverse(top)) = column.pop() {
        match column.peek() {
            Some(&Reverse(next)) if next == top => {
                column.pop();
            }
            _ => return Some(top),
        }
    }
    None
}

/// Cancels equal entries throughout the heap, not only at the top.
fn compact(column: BinaryHeap<Reverse<Key>>) -> BinaryHeap<Reverse<Key>> {
    let mut v = column.into_vec();
    v.sort_unstable();
    let mut out: Vec<Reverse<Key>> = Vec::with_capacity(v.len());
    for x in v {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    BinaryHeap::from(out)
}

/// Drops elements occurring an even number of times from a sorted list.
fn cancel_pairs(sorted: Vec<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(sorted.len());
    for x in sorted {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}
