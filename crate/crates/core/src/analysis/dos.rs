//! Pooled density of states against a moment-matched reference curve.

use std::f64::consts::PI;

use serde::Serialize;

use super::sampling::sample_energies;
use crate::ensembles::{EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceCurve {
    /// Wigner semicircle of radius `2σ`.
    Semicircle,
    Gaussian,
}

impl ReferenceCurve {
    pub fn density(self, x: f64, mean: f64, variance: f64) -> f64 {
        let u = x - mean;
        match self {
            ReferenceCurve::Semicircle => {
                let r2 = 4.0 * variance;
                if u * u >= r2 {
                    0.0
                } else {
                    2.0 / (PI * r2) * (r2 - u * u).sqrt()
                }
            }
            ReferenceCurve::Gaussian => {
                (-0.5 * u * u / variance).exp() / (2.0 * PI * variance).sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DosDiagnostics {
    pub reference: ReferenceCurve,
    pub bin_centers: Vec<f64>,
    pub bin_width: f64,
    /// Normalized histogram: `sum(density) * bin_width == 1`.
    pub density: Vec<f64>,
    pub reference_density: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// `m4 / m2^2 - 3` of the pooled eigenvalues.
    pub excess_kurtosis: f64,
    /// `max_bin |density - reference_density|`.
    pub sup_deviation: f64,
    pub eigenvalue_count: usize,
}

/// Samples the ensemble and compares its pooled spectrum with the semicircle
/// (global) or a Gaussian (local).
pub fn dos_diagnostics(spec: &EnsembleSpec, bins: usize) -> Result<DosDiagnostics> {
    let reference = match spec.kind {
        EnsembleKind::Global => ReferenceCurve::Semicircle,
        EnsembleKind::Local => ReferenceCurve::Gaussian,
    };
    let pooled: Vec<f64> = sample_energies(spec)?.into_iter().flatten().collect();
    dos_from_eigenvalues(&pooled, bins, reference)
}

pub fn dos_from_eigenvalues(
    eigs: &[f64],
    bins: usize,
    reference: ReferenceCurve,
) -> Result<DosDiagnostics> {
    if bins < 10 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10 bins, got {bins}"
        )));
    }
    if eigs.is_empty() {
        return Err(Error::InvalidArgument("no eigenvalues to histogram".into()));
    }
    let n = eigs.len() as f64;
    let mean = eigs.iter().sum::<f64>() / n;
    let m2 = eigs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    let m4 = eigs.iter().map(|e| (e - mean).powi(4)).sum::<f64>() / n;
    let excess_kurtosis = if m2 > 0.0 {
        m4 / (m2 * m2) - 3.0
    } else {
        f64::NAN
    };

    let (mut lo, mut hi) = eigs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &e| {
            (a.min(e), b.max(e))
        });
    if hi <= lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &e in eigs {
        let b = (((e - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let density: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let bin_centers: Vec<f64> = (0..bins).map(|b| lo + (b as f64 + 0.5) * width).collect();
    let reference_density: Vec<f64> = bin_centers
        .iter()
        .map(|&x| {
            if m2 > 0.0 {
                reference.density(x, mean, m2)
            } else {
                0.0
            }
        })
        .collect();
    let sup_deviation = density
        .iter()
        .zip(&reference_density)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(DosDiagnostics {
        reference,
        bin_centers,
        bin_width: width,
        density,
        reference_density,
        mean,
        variance: m2,
        excess_kurtosis,
        sup_deviation,
        eigenvalue_count: eigs.len(),
    })
}
