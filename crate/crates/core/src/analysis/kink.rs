//! Change-point estimate for the derivative of a local-ensemble distance curve.
//!
//! Below the candidate point the derivative is modelled as `a β²`; above it as
//! `b exp(-c (β - β_c)) + d`. Every grid point that leaves at least four points
//! on each side is tried and the one with the smallest total squared residual
//! wins. The kink point itself belongs to both sides.

use super::fit::linear_fit;
use crate::error::{Error, Result};

const MIN_SIDE: usize = 4;
const RATE_MIN: f64 = 1e-2;
const RATE_MAX: f64 = 1e2;
const RATE_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinkEstimate {
    pub beta_c: f64,
    /// Total squared residual of the two-piece fit.
    pub fit_quality: f64,
    /// Power `p` of a log-log fit `|∂T| ∝ β^p` below the kink (`NaN` when
    /// fewer than two usable points exist).
    pub below_exponent: f64,
    /// Decay rate `c` above the kink.
    pub above_rate: f64,
    pub quadratic_coefficient: f64,
    pub above_amplitude: f64,
    pub above_offset: f64,
}

struct ExpPiece {
    b: f64,
    c: f64,
    d: f64,
    sse: f64,
}

/// Least squares in `(b, d)` for a fixed rate.
fn exp_piece_at(xs: &[f64], ys: &[f64], x0: f64, c: f64) -> ExpPiece {
    let n = xs.len() as f64;
    let (mut su, mut suu, mut sy, mut suy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let u = (-c * (x - x0)).exp();
        su += u;
        suu += u * u;
        sy += y;
        suy += u * y;
    }
    let det = n * suu - su * su;
    let (b, d) = if det.abs() <= 1e-14 * n * suu {
        (0.0, sy / n)
    } else {
        ((n * suy - su * sy) / det, (suu * sy - su * suy) / det)
    };
    let sse = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - b * (-c * (x - x0)).exp() - d).powi(2))
        .sum();
    ExpPiece { b, c, d, sse }
}

fn fit_exp_piece(xs: &[f64], ys: &[f64], x0: f64) -> ExpPiece {
    let ln_lo = RATE_MIN.ln();
    let ln_step = (RATE_MAX.ln() - ln_lo) / (RATE_GRID - 1) as f64;
    let rate = |k: f64| (ln_lo + k * ln_step).exp();
    let mut best_k = 0;
    let mut best = exp_piece_at(xs, ys, x0, rate(0.0));
    for k in 1..RATE_GRID {
        let p = exp_piece_at(xs, ys, x0, rate(k as f64));
        if p.sse < best.sse {
            best = p;
            best_k = k;
        }
    }
    // golden-section refinement of ln c between the neighbours of the best grid rate
    let (mut lo, mut hi) = (
        (best_k as f64 - 1.0).max(0.0),
        (best_k as f64 + 1.0).min((RATE_GRID - 1) as f64),
    );
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = exp_piece_at(xs, ys, x0, rate(x1)).sse;
    let mut f2 = exp_piece_at(xs, ys, x0, rate(x2)).sse;
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = exp_piece_at(xs, ys, x0, rate(x1)).sse;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = exp_piece_at(xs, ys, x0, rate(x2)).sse;
        }
    }
    let refined = exp_piece_at(xs, ys, x0, rate(0.5 * (lo + hi)));
    if refined.sse < best.sse {
        refined
    } else {
        best
    }
}

fn below_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && y.abs() > 0.0)
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .unzip();
    linear_fit(&lx, &ly).map(|f| f.slope).unwrap_or(f64::NAN)
}

/// Locates the kink of a derivative curve `ys` sampled at `betas`.
pub fn estimate_beta_c(betas: &[f64], ys: &[f64]) -> Result<KinkEstimate> {
    if betas.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: betas.len(),
            got: ys.len(),
        });
    }
    let n = betas.len();
    if n < 2 * MIN_SIDE - 1 {
        return Err(Error::DegenerateFit(format!(
            "kink fit needs at least {} points ({MIN_SIDE} per side), got {n}",
            2 * MIN_SIDE - 1
        )));
    }
    if let Some(bad) = betas.iter().chain(ys).find(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit(format!(
            "non-finite input value {bad}"
        )));
    }
    let mut best: Option<KinkEstimate> = None;
    for s in MIN_SIDE - 1..=n - MIN_SIDE {
        let (bx, by) = (&betas[..=s], &ys[..=s]);
        let s4: f64 = bx.iter().map(|b| b.powi(4)).sum();
        if s4 == 0.0 {
            continue;
        }
        let a = bx.iter().zip(by).map(|(b, y)| b * b * y).sum::<f64>() / s4;
        let below_sse: f64 = bx
            .iter()
            .zip(by)
            .map(|(b, y)| (y - a * b * b).powi(2))
            .sum();
        let piece = fit_exp_piece(&betas[s..], &ys[s..], betas[s]);
        let total = below_sse + piece.sse;
        if best.map_or(true, |k| total < k.fit_quality) {
            best = Some(KinkEstimate {
                beta_c: betas[s],
                fit_quality: total,
                below_exponent: below_exponent(bx, by),
                above_rate: piece.c,
                quadratic_coefficient: a,
                above_amplitude: piece.b,
                above_offset: piece.d,
            });
        }
    }
    best.ok_or_else(|| Error::DegenerateFit("no admissible split point".into()))
}
