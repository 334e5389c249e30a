//! Block jackknife over contiguous sample blocks.

use std::ops::Range;

pub const DEFAULT_BLOCKS: usize = 20;

/// Splits `0..n` into `min(blocks, n)` contiguous ranges whose sizes differ by
/// at most one, larger blocks first.
pub fn block_ranges(n: usize, blocks: usize) -> Vec<Range<usize>> {
    let g = blocks.min(n).max(1);
    let (base, extra) = (n / g, n % g);
    let mut out = Vec::with_capacity(g);
    let mut lo = 0;
    for b in 0..g {
        let hi = lo + base + usize::from(b < extra);
        out.push(lo..hi);
        lo = hi;
    }
    out
}

/// Jackknife standard error from leave-one-block-out estimates.
///
/// `NaN` with fewer than two blocks.
pub fn jackknife_stderr(leave_out: &[f64]) -> f64 {
    let g = leave_out.len();
    if g < 2 {
        return f64::NAN;
    }
    let mean = leave_out.iter().sum::<f64>() / g as f64;
    let ss: f64 = leave_out.iter().map(|x| (x - mean).powi(2)).sum();
    ((g - 1) as f64 / g as f64 * ss).sqrt()
}

/// Root-mean-square error of a plug-in estimate: the jackknife spread of the
/// leave-one-block-out values combined with the jackknife bias estimate
/// `(G - 1)(mean(leave_out) - full)`.
///
/// Nonlinear estimators such as matrix norms carry a finite-sample bias that
/// the spread alone does not see. `NaN` with fewer than two blocks.
pub fn jackknife_rmse(full: f64, leave_out: &[f64]) -> f64 {
    let g = leave_out.len();
    if g < 2 {
        return f64::NAN;
    }
    let mean = leave_out.iter().sum::<f64>() / g as f64;
    let bias = (g - 1) as f64 * (mean - full);
    (jackknife_stderr(leave_out).powi(2) + bias * bias).sqrt()
}

/// Sample mean of `values` and its block-jackknife standard error.
pub fn jackknife_mean(values: &[f64], ranges: &[Range<usize>]) -> (f64, f64) {
    let n = values.len();
    let total: f64 = values.iter().sum();
    let leave_out: Vec<f64> = ranges
        .iter()
        .map(|r| {
            let part: f64 = values[r.clone()].iter().sum();
            (total - part) / (n - r.len()) as f64
        })
        .collect();
    (total / n as f64, jackknife_stderr(&leave_out))
}
