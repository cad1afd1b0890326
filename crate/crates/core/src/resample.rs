//! Seeded random streams and the empirical quantile rules shared by the
//! resampling procedures.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Stream used for sample splitting, disjoint from replicate streams.
pub const SPLIT_STREAM: u64 = u64::MAX;

/// The generator for replicate `j`: depends only on `(seed, j)`.
pub fn stream(seed: u64, j: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j);
    rng
}

/// `size` distinct indices out of `0..n`, in increasing order.
pub fn subsample_indices<R: Rng>(rng: &mut R, n: usize, size: usize) -> Vec<usize> {
    let mut idx = index::sample(rng, n, size).into_vec();
    idx.sort_unstable();
    idx
}

/// `n` indices drawn with replacement.
pub fn bootstrap_indices<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// A random half of `0..n` and its complement, both sorted.
pub fn split_halves(seed: u64, n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rng = stream(seed, SPLIT_STREAM);
    let first = subsample_indices(&mut rng, n, n / 2);
    let mut in_first = vec![false; n];
    for &i in &first {
        in_first[i] = true;
    }
    let second = (0..n).filter(|&i| !in_first[i]).collect();
    (first, second)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// The smallest observed value `z` with `#{T_j > z} <= alpha * B`.
pub fn upper_quantile(values: &[f64], alpha: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::param("quantile of an empty sample"));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::param("NaN in resampled statistics"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let b = sorted.len();
    let allowed = alpha * b as f64;
    for (k, &z) in sorted.iter().enumerate() {
        // Values strictly above z start after the last tie of z.
        let ties_end = k + sorted[k..].iter().take_while(|&&v| v == z).count();
        if ((b - ties_end) as f64) <= allowed {
            return Ok(z);
        }
    }
    Ok(sorted[b - 1])
}

/// The largest observed value `z` with `#{T_j < z} <= alpha * B`.
pub fn lower_quantile(values: &[f64], alpha: f64) -> Result<f64> {
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    upper_quantile(&negated, alpha).map(|z| -z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_convention() {
        let t: Vec<f64> = (1..=100).map(f64::from).collect();
        // #{T > 95} = 5 = 0.05 * 100
        assert_eq!(upper_quantile(&t, 0.05).unwrap(), 95.0);
        assert_eq!(upper_quantile(&t, 0.049).unwrap(), 96.0);
        assert_eq!(upper_quantile(&[3.0], 0.05).unwrap(), 3.0);
        assert_eq!(upper_quantile(&[1.0, 2.0, 2.0, 2.0], 0.3).unwrap(), 2.0);
        assert_eq!(lower_quantile(&t, 0.05).unwrap(), 6.0);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(5, 0).random();
        let b: u64 = stream(5, 0).random();
        let c: u64 = stream(5, 1).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn halves_partition() {
        let (a, b) = split_halves(9, 11);
        assert_eq!(a.len(), 5);
        assert_eq!(b.len(), 6);
        let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..11).collect::<Vec<_>>());
    }
}
