//! Sweeps over inverse temperature, derivatives, kink location, threshold
//! temperatures and density-of-states diagnostics.

mod dos;
mod fit;
mod grid;
mod jackknife;
mod kink;
mod sampling;
mod sweep;
mod threshold;

pub use dos::{dos_diagnostics, dos_from_eigenvalues, DosDiagnostics, ReferenceCurve};
pub use fit::{fit_exponential, linear_fit, ExponentialFit, LinearFit};
pub use grid::BetaGrid;
pub use jackknife::{
    block_ranges, jackknife_mean, jackknife_rmse, jackknife_stderr, DEFAULT_BLOCKS,
};
pub use kink::{estimate_beta_c, KinkEstimate};
pub use sampling::{sample_energies, sample_spectra, with_threads};
pub use sweep::{
    check_feasible, numeric_derivative, run_sweep, Curve, Estimator, SweepOptions, SweepResult,
    SweepRow,
};
pub use threshold::{threshold_temperature, Threshold, ThresholdSolver, DEFAULT_BETA_MAX};
