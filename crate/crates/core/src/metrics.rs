//! Bottleneck distance between diagrams and sup-norm distance between grid
//! fields.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::persistence::{PersistenceDiagram, PersistencePair};

/// L∞ distance between two diagram points.
pub fn linf(a: &PersistencePair, b: &PersistencePair) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

/// Bottleneck distance between the dimension-`p` parts of two diagrams.
///
/// Essential points are matched among themselves by birth; a different
/// number of essential points on the two sides gives `+∞`.
pub fn bottleneck(a: &PersistenceDiagram, b: &PersistenceDiagram, p: usize) -> f64 {
    let (a_fin, a_up, a_down) = split(a, p);
    let (b_fin, b_up, b_down) = split(b, p);
    let Some(up) = essential_cost(a_up, b_up) else {
        return f64::INFINITY;
    };
    let Some(down) = essential_cost(a_down, b_down) else {
        return f64::INFINITY;
    };
    up.max(down).max(finite_bottleneck(&a_fin, &b_fin))
}

type Split = (Vec<PersistencePair>, Vec<f64>, Vec<f64>);

fn split(d: &PersistenceDiagram, p: usize) -> Split {
    let mut finite = Vec::new();
    let (mut up, mut down) = (Vec::new(), Vec::new());
    for q in d.in_dim(p) {
        if q.death == f64::INFINITY {
            up.push(q.birth);
        } else if q.death == f64::NEG_INFINITY {
            down.push(q.birth);
        } else {
            finite.push(*q);
        }
    }
    (finite, up, down)
}

/// Optimal bottleneck matching of two equal-size sets of reals pairs them
/// in sorted order.
fn essential_cost(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Some(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

fn finite_bottleneck(a: &[PersistencePair], b: &[PersistencePair]) -> f64 {
    let (m, k) = (a.len(), b.len());
    if m + k == 0 {
        return 0.0;
    }
    // Left: a_0..a_m, then diagonal copies of b. Right: b_0..b_k, then
    // diagonal copies of a. Diagonal-to-diagonal edges cost nothing.
    let size = m + k;
    let cost = |l: usize, r: usize| -> f64 {
        match (l < m, r < k) {
            (true, true) => linf(&a[l], &b[r]),
            (true, false) => {
                if r - k == l {
                    a[l].diagonal_distance()
                } else {
                    f64::INFINITY
                }
            }
            (false, true) => {
                if l - m == r {
                    b[r].diagonal_distance()
                } else {
                    f64::INFINITY
                }
            }
            (false, false) => 0.0,
        }
    };

    let mut candidates: Vec<f64> = Vec::with_capacity(m * k + m + k + 1);
    candidates.push(0.0);
    for x in a {
        candidates.push(x.diagonal_distance());
        for y in b {
            candidates.push(linf(x, y));
        }
    }
    candidates.extend(b.iter().map(PersistencePair::diagonal_distance));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let feasible = |eps: f64| -> bool {
        let adj: Vec<Vec<usize>> = (0..size)
            .map(|l| {
                if l < m {
                    let mut v: Vec<usize> = (0..k).filter(|&r| cost(l, r) <= eps).collect();
                    if cost(l, k + l) <= eps {
                        v.push(k + l);
                    }
                    v
                } else {
                    let mut v = Vec::with_capacity(m + 1);
                    if cost(l, l - m) <= eps {
                        v.push(l - m);
                    }
                    v.extend(k..size);
                    v
                }
            })
            .collect();
        max_matching(size, &adj) == size
    };

    // The largest candidate always admits the all-diagonal matching.
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Hopcroft–Karp maximum matching size for a bipartite graph with `n_right`
/// right vertices and adjacency lists of the left vertices.
pub fn max_matching(n_right: usize, adj: &[Vec<usize>]) -> usize {
    const NIL: usize = usize::MAX;
    let n_left = adj.len();
    let mut match_l = vec![NIL; n_left];
    let mut match_r = vec![NIL; n_right];
    let mut dist = vec![0usize; n_left];
    let mut size = 0;

    loop {
        // Layer the left vertices by BFS from the free ones.
        let mut queue = VecDeque::new();
        for l in 0..n_left {
            if match_l[l] == NIL {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let next = match_r[r];
                if next == NIL {
                    found = true;
                } else if dist[next] == usize::MAX {
                    dist[next] = dist[l] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found {
            return size;
        }
        let mut iter = vec![0usize; n_left];
        for l in 0..n_left {
            if match_l[l] == NIL
                && augment(l, adj, &mut match_l, &mut match_r, &mut dist, &mut iter)
            {
                size += 1;
            }
        }
    }
}

fn augment(
    start: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
    iter: &mut [usize],
) -> bool {
    const NIL: usize = usize::MAX;
    // Iterative DFS along the BFS layers.
    let mut stack = vec![start];
    while let Some(&l) = stack.last() {
        if iter[l] == adj[l].len() {
            dist[l] = usize::MAX;
            stack.pop();
            continue;
        }
        let r = adj[l][iter[l]];
        iter[l] += 1;
        let next = match_r[r];
        if next == NIL {
            // Flip the path recorded on the stack.
            let mut r = r;
            while let Some(l) = stack.pop() {
                let prev = match_l[l];
                match_l[l] = r;
                match_r[r] = l;
                r = prev;
            }
            return true;
        }
        if dist[next] == dist[l] + 1 {
            stack.push(next);
        }
    }
    false
}

/// Exhaustive bottleneck distance over all partial matchings of the finite
/// points; exponential, for cross-checking small cases.
pub fn bottleneck_brute_force(a: &PersistenceDiagram, b: &PersistenceDiagram, p: usize) -> f64 {
    let (a_fin, a_up, a_down) = split(a, p);
    let (b_fin, b_up, b_down) = split(b, p);
    let (Some(up), Some(down)) = (essential_cost(a_up, b_up), essential_cost(a_down, b_down)) else {
        return f64::INFINITY;
    };
    let mut used = vec![false; b_fin.len()];
    up.max(down).max(brute(&a_fin, &b_fin, 0, &mut used))
}

fn brute(a: &[PersistencePair], b: &[PersistencePair], i: usize, used: &mut [bool]) -> f64 {
    if i == a.len() {
        return b
            .iter()
            .zip(used.iter())
            .filter(|(_, &u)| !u)
            .map(|(q, _)| q.diagonal_distance())
            .fold(0.0, f64::max);
    }
    let mut best = a[i].diagonal_distance().max(brute(a, b, i + 1, used));
    for j in 0..b.len() {
        if !used[j] {
            used[j] = true;
            best = best.min(linf(&a[i], &b[j]).max(brute(a, b, i + 1, used)));
            used[j] = false;
        }
    }
    best
}

/// `max |f - g|` over the vertices of a shared grid.
pub fn sup_distance(f: &GridField, g: &GridField) -> Result<f64> {
    if f.geometry() != g.geometry() {
        return Err(Error::GridMismatch("fields live on different grids".into()));
    }
    Ok(f.values()
        .iter()
        .zip(g.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dgm(points: &[(f64, f64)]) -> PersistenceDiagram {
        PersistenceDiagram::new(points.iter().map(|&(b, d)| PersistencePair::new(0, b, d)).collect())
    }

    #[test]
    fn small_examples() {
        let a = dgm(&[(0.0, 2.0)]);
        assert_eq!(bottleneck(&a, &a, 0), 0.0);
        assert_eq!(bottleneck(&a, &dgm(&[]), 0), 1.0);
        assert_eq!(bottleneck(&dgm(&[(0.0, 4.0)]), &dgm(&[(1.0, 5.0)]), 0), 1.0);
        assert_eq!(bottleneck(&dgm(&[]), &dgm(&[]), 0), 0.0);
    }

    #[test]
    fn essentials() {
        let a = dgm(&[(0.0, f64::INFINITY), (0.0, 1.0)]);
        let b = dgm(&[(0.5, f64::INFINITY)]);
        assert_eq!(bottleneck(&a, &b, 0), 0.5);
        assert_eq!(bottleneck(&a, &dgm(&[(0.0, 1.0)]), 0), f64::INFINITY);
        let c = dgm(&[(3.0, f64::NEG_INFINITY)]);
        assert_eq!(bottleneck(&c, &b, 0), f64::INFINITY);
    }

    #[test]
    fn other_dimensions_are_ignored() {
        let mut a = dgm(&[(0.0, 1.0)]);
        a.push(PersistencePair::new(1, 0.0, 100.0));
        assert_eq!(bottleneck(&a, &dgm(&[(0.0, 1.0)]), 0), 0.0);
        assert_eq!(bottleneck(&a, &dgm(&[(0.0, 1.0)]), 1), 50.0);
    }

    fn random_diagram(rng: &mut ChaCha8Rng, len: usize) -> PersistenceDiagram {
        let points: Vec<(f64, f64)> = (0..len)
            .map(|_| {
                let b: f64 = rng.random_range(0.0..2.0);
                (b, b + rng.random_range(0.0..2.0))
            })
            .collect();
        dgm(&points)
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let (m, k) = (rng.random_range(0..6), rng.random_range(0..6));
            let a = random_diagram(&mut rng, m);
            let b = random_diagram(&mut rng, k);
            let fast = bottleneck(&a, &b, 0);
            let slow = bottleneck_brute_force(&a, &b, 0);
            assert!((fast - slow).abs() <= 1e-12, "{fast} vs {slow}");
        }
    }

    #[test]
    fn matching_size() {
        let adj = vec![vec![0, 1], vec![0], vec![1, 2]];
        assert_eq!(max_matching(3, &adj), 3);
        let adj = vec![vec![0], vec![0], vec![0]];
        assert_eq!(max_matching(1, &adj), 1);
    }

    #[test]
    fn sup_distance_examples() {
        let f = GridField::from_values_1d(vec![0.0, 1.0, 2.0]).unwrap();
        let g = GridField::from_values_1d(vec![0.5; 3]).unwrap();
        assert_eq!(sup_distance(&f, &g).unwrap(), 1.5);
        assert_eq!(sup_distance(&f, &f).unwrap(), 0.0);
        let h = GridField::from_values_1d(vec![0.5; 4]).unwrap();
        assert!(matches!(sup_distance(&f, &h), Err(Error::GridMismatch(_))));
    }
}
