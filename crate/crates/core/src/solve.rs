//! Root finding for monotone decreasing band equations.

use crate::error::{Error, Result};

/// Default bracket floor for Hausdorff-scale solves.
pub const T_MIN: f64 = 1e-8;

/// Finds `t` in `[lo, hi]` with `f(t) = target` for `f` decreasing in `t`,
/// by bisection to machine precision.
///
/// The comparison happens in log space, so `log_f` returns `ln f(t)`.
/// When `f(hi)` is still above the target the upper end is doubled up to
/// `max_doublings` times before giving up.
pub fn solve_decreasing<F>(log_f: F, target: f64, lo: f64, hi: f64, max_doublings: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(target > 0.0) || !(lo > 0.0) || !(hi > lo) {
        return Err(Error::param(format!(
            "bad solve setup: target {target}, bracket [{lo}, {hi}]"
        )));
    }
    let log_target = target.ln();
    let g = |t: f64| log_f(t) - log_target;
    let no_root = |lo: f64, hi: f64| Error::NoRoot {
        lo,
        hi,
        f_lo: log_f(lo).exp(),
        f_hi: log_f(hi).exp(),
        target,
    };

    let g_lo = g(lo);
    if g_lo.is_nan() || g_lo < 0.0 {
        return Err(no_root(lo, hi));
    }
    let mut hi = hi;
    let mut doublings = 0;
    loop {
        let g_hi = g(hi);
        if g_hi.is_nan() {
            return Err(no_root(lo, hi));
        }
        if g_hi <= 0.0 {
            break;
        }
        if doublings == max_doublings {
            return Err(no_root(lo, hi));
        }
        hi *= 2.0;
        doublings += 1;
    }

    let (mut a, mut b) = (lo, hi);
    for _ in 0..2000 {
        // Geometric midpoints first, so tiny roots are reached quickly.
        let mid = if b / a > 4.0 { (a * b).sqrt() } else { 0.5 * (a + b) };
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid);
        if gm.is_nan() {
            return Err(no_root(a, b));
        }
        if gm > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    // Return whichever end is closer in value.
    Ok(if g(a).abs() <= g(b).abs() { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_power_law() {
        // 1/t^2 = 4 at t = 0.5
        let t = solve_decreasing(|t| -2.0 * t.ln(), 4.0, 1e-8, 1.0, 0).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn expands_upper_end() {
        let t = solve_decreasing(|t| -t.ln(), 0.01, 1e-8, 1.0, 10).unwrap();
        assert!((t - 100.0).abs() < 1e-10);
        let err = solve_decreasing(|t| -t.ln(), 0.01, 1e-8, 1.0, 3).unwrap_err();
        assert!(err.is_numerical());
    }

    #[test]
    fn reports_root_below_bracket() {
        let err = solve_decreasing(|t| -t.ln(), 1e12, 1e-8, 1.0, 0).unwrap_err();
        assert!(matches!(err, Error::NoRoot { .. }));
    }
}
