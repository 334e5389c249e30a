//! Temperature below which the ground-state bound certifies an ε-approximate
//! t-design, for the global ensemble.

use rayon::prelude::*;

use super::sampling::sample_energies;
use crate::ensembles::{EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};

/// Largest inverse temperature the bisection will bracket.
pub const DEFAULT_BETA_MAX: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub t: usize,
    pub epsilon: f64,
    pub beta_star: f64,
    /// `1 / beta_star`; infinite when the bound already holds at `β = 0`.
    pub temperature: f64,
}

/// Ground-state bound on a frozen sample set.
///
/// Only the energy gaps above each ground state are kept, so evaluating the
/// bound at any `β` costs one pass over the stored spectra and is monotone in `β`.
#[derive(Debug, Clone)]
pub struct ThresholdSolver {
    gaps: Vec<Vec<f64>>,
    beta_max: f64,
}

impl ThresholdSolver {
    pub fn new(spec: &EnsembleSpec) -> Result<Self> {
        if spec.kind != EnsembleKind::Global {
            return Err(Error::UnsupportedEnsemble(
                "threshold temperatures are defined for the global ensemble only".into(),
            ));
        }
        let gaps = sample_energies(spec)?
            .into_iter()
            .map(|e| e[1..].iter().map(|x| x - e[0]).collect())
            .collect();
        Ok(ThresholdSolver {
            gaps,
            beta_max: DEFAULT_BETA_MAX,
        })
    }

    pub fn with_beta_max(mut self, beta_max: f64) -> Self {
        self.beta_max = beta_max;
        self
    }

    /// `1 - mean_H p_0(β)^t`.
    pub fn bound(&self, beta: f64, t: usize) -> f64 {
        let tf = t as f64;
        let sum: f64 = self
            .gaps
            .par_iter()
            .map(|g| {
                let z: f64 = 1.0 + g.iter().map(|x| (-beta * x).exp()).sum::<f64>();
                (-tf * z.ln()).exp()
            })
            .collect::<Vec<_>>()
            .iter()
            .sum();
        1.0 - sum / self.gaps.len() as f64
    }

    /// Smallest `β` (to bisection precision) with `bound(β) <= epsilon`.
    pub fn solve(&self, t: usize, epsilon: f64) -> Result<Threshold> {
        if t == 0 {
            return Err(Error::InvalidDimension("t must be >= 1".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        if self.bound(0.0, t) <= epsilon {
            return Ok(Threshold {
                t,
                epsilon,
                beta_star: 0.0,
                temperature: f64::INFINITY,
            });
        }
        let mut lo = 0.0;
        let mut hi = 1.0f64.min(self.beta_max);
        while self.bound(hi, t) > epsilon {
            if hi >= self.beta_max {
                return Err(Error::Unreachable {
                    epsilon,
                    beta_max: self.beta_max,
                    bound_at_max: self.bound(self.beta_max, t),
                });
            }
            lo = hi;
            hi = (2.0 * hi).min(self.beta_max);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-12 * hi || mid <= lo || mid >= hi {
                break;
            }
            if self.bound(mid, t) > epsilon {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Threshold {
            t,
            epsilon,
            beta_star: hi,
            temperature: 1.0 / hi,
        })
    }
}

/// Samples `spec` and returns `T_ε = 1/β*` for one `(t, ε)`.
pub fn threshold_temperature(spec: &EnsembleSpec, t: usize, epsilon: f64) -> Result<f64> {
    Ok(ThresholdSolver::new(spec)?.solve(t, epsilon)?.temperature)
}
