use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::BetaGrid;
use super::jackknife::{
    block_ranges, jackknife_mean, jackknife_rmse, jackknife_stderr, DEFAULT_BLOCKS,
};
use super::sampling::{sample_energies, sample_spectra};
use crate::design::distance::{sym_overlap_from_purities, trace_norm_from_sym_block};
use crate::design::partitions::{cycle_types, CycleType, MAX_CYCLE_ORDER};
use crate::design::projector::{check_capacity, SymBasis, DEFAULT_MEMORY_CAP};
use crate::design::MomentAccumulator;
use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::matrix::HermitianMatrix;
use crate::spectral::{
    density_from_weights, gibbs_weights_from_energies, purity_from_probs, Spectrum,
};

/// The four distance estimators, in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// `(1/2) || X - Π/d_sym ||_1`.
    TraceNorm,
    /// `1 - tr(X Π)`.
    SymOverlap,
    /// `1 - tr(X Π)` through purities.
    Cycle,
    /// `1 - E[p_0^t]`.
    Bound,
}

impl Estimator {
    pub const ALL: [Estimator; 4] = [
        Estimator::TraceNorm,
        Estimator::SymOverlap,
        Estimator::Cycle,
        Estimator::Bound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::TraceNorm => "trace_norm",
            Estimator::SymOverlap => "sym_overlap",
            Estimator::Cycle => "cycle",
            Estimator::Bound => "bound",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Whether the estimator materializes `D^t x D^t` matrices.
    pub fn needs_moment_operator(self) -> bool {
        matches!(self, Estimator::TraceNorm | Estimator::SymOverlap)
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown estimator {s:?}")))
    }
}

/// `Ok` when `est` can run for `(D, t)` under `cap`.
pub fn check_feasible(est: Estimator, dim: usize, t: usize, cap: usize) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidDimension("t must be >= 1".into()));
    }
    match est {
        Estimator::TraceNorm | Estimator::SymOverlap => check_capacity(dim, t, cap).map(|_| ()),
        Estimator::Cycle if t > MAX_CYCLE_ORDER => Err(Error::InvalidDimension(format!(
            "cycle expansion supports t <= {MAX_CYCLE_ORDER}, got {t}"
        ))),
        Estimator::Cycle | Estimator::Bound => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub t: usize,
    pub estimators: Vec<Estimator>,
    pub memory_cap: usize,
    pub blocks: usize,
}

impl SweepOptions {
    /// All four estimators, default memory cap and 20 jackknife blocks.
    pub fn new(t: usize) -> Self {
        SweepOptions {
            t,
            estimators: Estimator::ALL.to_vec(),
            memory_cap: DEFAULT_MEMORY_CAP,
            blocks: DEFAULT_BLOCKS,
        }
    }

    pub fn with_estimators(mut self, estimators: &[Estimator]) -> Self {
        self.estimators = estimators.to_vec();
        self
    }

    pub fn with_memory_cap(mut self, cap: usize) -> Self {
        self.memory_cap = cap;
        self
    }

    fn wants(&self, est: Estimator) -> bool {
        self.estimators.contains(&est)
    }
}

/// Estimates at one inverse temperature; `None` for estimators not requested.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub values: [Option<f64>; 4],
    pub stderrs: [Option<f64>; 4],
    /// `tr(X Π)/d_sym`, present whenever the moment operator was formed.
    pub sym_block_eigenvalue: Option<f64>,
}

impl SweepRow {
    pub fn get(&self, est: Estimator) -> Option<f64> {
        self.values[est.index()]
    }

    pub fn stderr_of(&self, est: Estimator) -> Option<f64> {
        self.stderrs[est.index()]
    }

    /// Error bar of the highest-priority estimator present (column order).
    pub fn stderr(&self) -> Option<f64> {
        self.stderrs.iter().flatten().next().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: EnsembleSpec,
    pub t: usize,
    pub grid: BetaGrid,
    pub estimators: Vec<Estimator>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn column(&self, est: Estimator) -> Option<Vec<f64>> {
        self.rows.iter().map(|r| r.get(est)).collect()
    }

    pub fn stderr_column(&self, est: Estimator) -> Option<Vec<f64>> {
        self.rows.iter().map(|r| r.stderr_of(est)).collect()
    }

    pub fn to_curve(&self) -> Curve {
        Curve {
            betas: self.grid.points(),
            values: Estimator::ALL.map(|e| self.column(e)),
            stderrs: Estimator::ALL.map(|e| self.stderr_column(e)),
        }
    }
}

/// Estimator columns over a uniform β grid, as stored in sweep CSV files.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub betas: Vec<f64>,
    pub values: [Option<Vec<f64>>; 4],
    pub stderrs: [Option<Vec<f64>>; 4],
}

impl Curve {
    pub fn column(&self, est: Estimator) -> Option<&[f64]> {
        self.values[est.index()].as_deref()
    }

    /// The first estimator (in column order) that has values.
    pub fn primary(&self) -> Option<Estimator> {
        Estimator::ALL
            .into_iter()
            .find(|e| self.values[e.index()].is_some())
    }

    /// Error bars of the first estimator that has them.
    pub fn primary_stderr(&self) -> Option<&[f64]> {
        self.stderrs.iter().flatten().next().map(|v| v.as_slice())
    }
}

/// Central differences inside, second-order one-sided differences at both ends.
///
/// Error bars are propagated as if neighbouring points were independent.
pub fn numeric_derivative(curve: &Curve) -> Result<Curve> {
    let n = curve.betas.len();
    if n < 3 {
        return Err(Error::InvalidGrid(format!(
            "derivative needs at least 3 points, got {n}"
        )));
    }
    let h = BetaGrid::from_points(&curve.betas)?.step();
    let diff = |y: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| match i {
                0 => (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h),
                _ if i == n - 1 => (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h),
                _ => (y[i + 1] - y[i - 1]) / (2.0 * h),
            })
            .collect()
    };
    let propagate = |s: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| match i {
                0 => (9.0 * s[0] * s[0] + 16.0 * s[1] * s[1] + s[2] * s[2]).sqrt() / (2.0 * h),
                _ if i == n - 1 => {
                    (9.0 * s[n - 1].powi(2) + 16.0 * s[n - 2].powi(2) + s[n - 3].powi(2)).sqrt()
                        / (2.0 * h)
                }
                _ => (s[i + 1].powi(2) + s[i - 1].powi(2)).sqrt() / (2.0 * h),
            })
            .collect()
    };
    for col in curve.values.iter().chain(&curve.stderrs).flatten() {
        if col.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: col.len(),
            });
        }
    }
    Ok(Curve {
        betas: curve.betas.clone(),
        values: curve.values.each_ref().map(|c| c.as_deref().map(diff)),
        stderrs: curve
            .stderrs
            .each_ref()
            .map(|c| c.as_deref().map(propagate)),
    })
}

enum Samples {
    Energies(Vec<Vec<f64>>),
    Spectra(Vec<Spectrum>),
}

impl Samples {
    fn len(&self) -> usize {
        match self {
            Samples::Energies(e) => e.len(),
            Samples::Spectra(s) => s.len(),
        }
    }

    fn energies(&self, i: usize) -> &[f64] {
        match self {
            Samples::Energies(e) => &e[i],
            Samples::Spectra(s) => s[i].energies(),
        }
    }
}

struct SweepContext<'a> {
    opts: &'a SweepOptions,
    samples: Samples,
    ranges: Vec<Range<usize>>,
    basis: Option<SymBasis>,
    types: Option<Vec<CycleType>>,
}

/// Samples the ensemble once, diagonalizes every Hamiltonian once, and
/// evaluates the requested estimators at every grid point.
///
/// Grid points are processed in parallel; each one reads the shared spectra
/// and reduces its samples in index order, so the output does not depend on
/// the number of workers. Error bars come from a block jackknife over
/// `opts.blocks` contiguous sample blocks.
///
/// For the trace norm the moment operator of each block is compressed onto the
/// symmetric subspace. The error bar of that row bounds `|T_{-b} - T|` by
/// `(1/2)|tr Δ_b| + (1/2)||Δ_b||_1`, where `Δ_b` is the change of the
/// compressed block when block `b` is left out.
pub fn run_sweep(spec: &EnsembleSpec, grid: &BetaGrid, opts: &SweepOptions) -> Result<SweepResult> {
    spec.validate()?;
    if grid.is_empty() {
        return Err(Error::InvalidGrid("beta grid is empty".into()));
    }
    if opts.estimators.is_empty() {
        return Err(Error::InvalidArgument("no estimators requested".into()));
    }
    let dim = spec.dim()?;
    let t = opts.t;
    for &est in &opts.estimators {
        check_feasible(est, dim, t, opts.memory_cap)?;
    }
    let needs_states = opts.estimators.iter().any(|e| e.needs_moment_operator());
    let basis = match needs_states {
        true => Some(SymBasis::new(dim, t, opts.memory_cap)?),
        false => None,
    };
    let types = match opts.wants(Estimator::Cycle) {
        true => Some(cycle_types(t)?),
        false => None,
    };
    let samples = match needs_states {
        true => Samples::Spectra(sample_spectra(spec)?),
        false => Samples::Energies(sample_energies(spec)?),
    };
    let ctx = SweepContext {
        opts,
        ranges: block_ranges(samples.len(), opts.blocks.max(1)),
        samples,
        basis,
        types,
    };
    let rows = grid
        .points()
        .into_par_iter()
        .map(|beta| ctx.row(beta))
        .collect::<Result<Vec<_>>>()?;
    let estimators = Estimator::ALL
        .into_iter()
        .filter(|e| opts.wants(*e))
        .collect();
    Ok(SweepResult {
        spec: *spec,
        t,
        grid: *grid,
        estimators,
        rows,
    })
}

impl SweepContext<'_> {
    fn row(&self, beta: f64) -> Result<SweepRow> {
        let n = self.samples.len();
        let t = self.opts.t;
        let mut row = SweepRow {
            beta,
            values: [None; 4],
            stderrs: [None; 4],
            sym_block_eigenvalue: None,
        };
        let probs: Vec<Vec<f64>> = (0..n)
            .map(|i| gibbs_weights_from_energies(self.samples.energies(i), beta).map(|w| w.probs))
            .collect::<Result<_>>()?;

        if let Some(types) = &self.types {
            let overlaps: Vec<f64> = probs
                .iter()
                .map(|p| {
                    let purities: Vec<f64> =
                        (1..=t as u32).map(|m| purity_from_probs(p, m)).collect();
                    sym_overlap_from_purities(&purities, types)
                })
                .collect();
            let (mean, se) = jackknife_mean(&overlaps, &self.ranges);
            self.set(&mut row, Estimator::Cycle, 1.0 - mean, se);
        }
        if self.opts.wants(Estimator::Bound) {
            let tf = t as f64;
            let powers: Vec<f64> = probs.iter().map(|p| (tf * p[0].ln()).exp()).collect();
            let (mean, se) = jackknife_mean(&powers, &self.ranges);
            self.set(&mut row, Estimator::Bound, 1.0 - mean, se);
        }
        if let (Some(basis), Samples::Spectra(spectra)) = (&self.basis, &self.samples) {
            self.moment_estimates(&mut row, basis, spectra, &probs)?;
        }
        Ok(row)
    }

    fn set(&self, row: &mut SweepRow, est: Estimator, value: f64, se: f64) {
        if self.opts.wants(est) {
            row.values[est.index()] = Some(value);
            row.stderrs[est.index()] = Some(se);
        }
    }

    fn moment_estimates(
        &self,
        row: &mut SweepRow,
        basis: &SymBasis,
        spectra: &[Spectrum],
        probs: &[Vec<f64>],
    ) -> Result<()> {
        let n = spectra.len();
        let d_sym = basis.len();
        let blocks: Vec<HermitianMatrix> = self
            .ranges
            .iter()
            .map(|r| {
                let mut acc =
                    MomentAccumulator::with_cap(basis.dim(), basis.t(), self.opts.memory_cap)?;
                let states: Vec<HermitianMatrix> = r
                    .clone()
                    .map(|i| density_from_weights(&spectra[i], &probs[i]))
                    .collect();
                acc.accumulate_batch(&states)?;
                basis.compress(acc.mean())
            })
            .collect::<Result<_>>()?;
        let sizes: Vec<f64> = self.ranges.iter().map(|r| r.len() as f64).collect();
        let nf = n as f64;
        let full = HermitianMatrix::from_upper(d_sym, |i, j| {
            blocks
                .iter()
                .zip(&sizes)
                .map(|(b, &w)| b.get(i, j) * w)
                .sum::<faer::c64>()
                / nf
        });
        let overlap = full.trace();
        row.sym_block_eigenvalue = Some(overlap / d_sym as f64);

        if self.opts.wants(Estimator::SymOverlap) {
            let leave_out: Vec<f64> = blocks
                .iter()
                .zip(&sizes)
                .map(|(b, &w)| (nf * overlap - w * b.trace()) / (nf - w))
                .collect();
            self.set(
                row,
                Estimator::SymOverlap,
                1.0 - overlap,
                jackknife_stderr(&leave_out),
            );
        }
        if self.opts.wants(Estimator::TraceNorm) {
            let value = trace_norm_from_sym_block(&full)?;
            let leave_out: Vec<f64> = match blocks.len() {
                0 | 1 => Vec::new(),
                _ => blocks
                    .iter()
                    .zip(&sizes)
                    .map(|(b, &w)| {
                        let rest = HermitianMatrix::from_upper(d_sym, |i, j| {
                            (full.get(i, j) * nf - b.get(i, j) * w) / (nf - w)
                        });
                        trace_norm_from_sym_block(&rest)
                    })
                    .collect::<Result<_>>()?,
            };
            self.set(
                row,
                Estimator::TraceNorm,
                value,
                jackknife_rmse(value, &leave_out),
            );
        }
        Ok(())
    }
}
