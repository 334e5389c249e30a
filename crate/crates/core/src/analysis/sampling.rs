use rayon::prelude::*;

use crate::ensembles::{sample_hamiltonian, EnsembleSpec};
use crate::error::{Error, Provenance, Result};
use crate::spectral::{eig_hermitian, hermitian_eigenvalues, Spectrum};

fn provenance(spec: &EnsembleSpec, i: usize) -> Provenance {
    Provenance {
        seed: spec.seed,
        sample: i as u64,
    }
}

/// Diagonalizes every Hamiltonian of the ensemble, keeping eigenvectors.
///
/// Samples are processed in parallel and collected in index order.
pub fn sample_spectra(spec: &EnsembleSpec) -> Result<Vec<Spectrum>> {
    spec.validate()?;
    (0..spec.samples)
        .into_par_iter()
        .map(|i| {
            sample_hamiltonian(spec, i)
                .and_then(|h| eig_hermitian(&h))
                .map_err(|e| e.with_provenance(provenance(spec, i)))
        })
        .collect()
}

/// Ascending energies of every Hamiltonian of the ensemble.
pub fn sample_energies(spec: &EnsembleSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    (0..spec.samples)
        .into_par_iter()
        .map(|i| {
            sample_hamiltonian(spec, i)
                .and_then(|h| hermitian_eigenvalues(h.as_mat()))
                .map_err(|e| e.with_provenance(provenance(spec, i)))
        })
        .collect()
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidArgument("thread count must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::InvalidArgument(format!("cannot start {n} worker threads: {e}"))),
    }
}
