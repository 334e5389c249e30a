//! Eigendecomposition and the thermal quantities derived from a spectrum.
//!
//! Everything temperature-dependent is computed from the energies alone, with
//! the ground energy subtracted before exponentiating, so one diagonalization
//! serves an entire sweep over inverse temperature and `beta` up to `1e6` is safe.

use faer::diag::Diag;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::matmul::matmul;
use faer::{c64, Accum, Mat, MatRef, Par};

use crate::error::{Error, Result};
use crate::matrix::HermitianMatrix;

/// Eigenvalues in ascending order and the matching unitary of eigenvectors
/// (column `m` belongs to `energies[m]`).
#[derive(Debug, Clone)]
pub struct Spectrum {
    energies: Vec<f64>,
    vectors: Mat<c64>,
}

impl Spectrum {
    /// Spectrum of a diagonal Hamiltonian with the given (unsorted) energies.
    pub fn from_energies(mut energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidDimension("empty spectrum".into()));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::numeric("non-finite energy"));
        }
        let n = energies.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
        let vectors = Mat::from_fn(n, n, |i, j| {
            if order[j] == i {
                c64::new(1.0, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        energies.sort_by(f64::total_cmp);
        Ok(Spectrum { energies, vectors })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn vectors(&self) -> MatRef<'_, c64> {
        self.vectors.as_ref()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// `E_1 - E_0`, zero for a degenerate ground state and for `D = 1`.
    pub fn gap(&self) -> f64 {
        self.energies.get(1).map_or(0.0, |e1| e1 - self.energies[0])
    }

    /// `V diag(E) V^†`.
    pub fn reconstruct(&self) -> HermitianMatrix {
        let n = self.dim();
        let scaled = Mat::from_fn(n, n, |i, j| self.vectors[(i, j)] * self.energies[j]);
        let mut out = Mat::<c64>::zeros(n, n);
        matmul(
            out.as_mut(),
            Accum::Replace,
            scaled.as_ref(),
            self.vectors.adjoint(),
            c64::new(1.0, 0.0),
            Par::Seq,
        );
        HermitianMatrix::from_mat_symmetrized(out.as_ref()).expect("square by construction")
    }
}

fn run_evd(a: MatRef<'_, c64>, vectors: bool) -> Result<(Vec<f64>, Option<Mat<c64>>)> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::InvalidDimension(format!(
            "eigensolver needs a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let compute = if vectors {
        ComputeEigenvectors::Yes
    } else {
        ComputeEigenvectors::No
    };
    // Sequential on purpose: parallelism lives at the sample level, and a
    // fixed schedule keeps results independent of the worker count.
    let par = Par::Seq;
    let mut s = Diag::<c64>::zeros(n);
    let mut u = vectors.then(|| Mat::<c64>::zeros(n, n));
    let mut mem = MemBuffer::new(evd::self_adjoint_evd_scratch::<c64>(
        n,
        compute,
        par,
        Default::default(),
    ));
    evd::self_adjoint_evd(
        a,
        s.as_mut(),
        u.as_mut().map(|u| u.as_mut()),
        par,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|e| Error::numeric(format!("eigensolver did not converge: {e:?}")))?;
    let energies: Vec<f64> = s.column_vector().iter().map(|z| z.re).collect();
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::numeric(
            "eigensolver produced non-finite eigenvalues",
        ));
    }
    Ok((energies, u))
}

/// Ascending eigenvalues of a Hermitian matrix (lower triangle is read).
pub fn hermitian_eigenvalues(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    let (mut e, _) = run_evd(a, false)?;
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Full eigendecomposition.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<Spectrum> {
    let (energies, vectors) = run_evd(h.as_mat(), true)?;
    let vectors = vectors.expect("requested eigenvectors");
    // the solver returns nondecreasing eigenvalues; guard the contract anyway
    if energies.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::numeric("eigenvalues not sorted"));
    }
    Ok(Spectrum { energies, vectors })
}

/// Normalized Boltzmann weights at one inverse temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsWeights {
    pub beta: f64,
    pub probs: Vec<f64>,
    /// `log Z(beta) = log sum_m exp(-beta E_m)`.
    pub log_z: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidTemperature(beta));
    }
    Ok(())
}

/// `log sum_m exp(-beta (E_m - E_0))`, the partition function relative to the ground state.
fn shifted_log_z(energies: &[f64], beta: f64) -> f64 {
    let e0 = energies[0];
    energies
        .iter()
        .map(|e| (-beta * (e - e0)).exp())
        .sum::<f64>()
        .ln()
}

pub fn gibbs_weights_from_energies(energies: &[f64], beta: f64) -> Result<GibbsWeights> {
    check_beta(beta)?;
    if energies.is_empty() {
        return Err(Error::InvalidDimension("empty spectrum".into()));
    }
    let e0 = energies[0];
    let mut probs: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= z;
    }
    Ok(GibbsWeights {
        beta,
        probs,
        log_z: z.ln() - beta * e0,
    })
}

pub fn gibbs_weights(s: &Spectrum, beta: f64) -> Result<GibbsWeights> {
    gibbs_weights_from_energies(&s.energies, beta)
}

/// Thermal state `V diag(p) V^†`.
pub fn thermal_state(s: &Spectrum, beta: f64) -> Result<HermitianMatrix> {
    let w = gibbs_weights(s, beta)?;
    Ok(density_from_weights(s, &w.probs))
}

/// `V diag(p) V^†` for arbitrary nonnegative weights `p`.
pub fn density_from_weights(s: &Spectrum, probs: &[f64]) -> HermitianMatrix {
    let n = s.dim();
    let half = Mat::from_fn(n, n, |i, j| s.vectors[(i, j)] * probs[j].sqrt());
    let mut out = Mat::<c64>::zeros(n, n);
    matmul(
        out.as_mut(),
        Accum::Replace,
        half.as_ref(),
        half.adjoint(),
        c64::new(1.0, 0.0),
        Par::Seq,
    );
    HermitianMatrix::from_mat_symmetrized(out.as_ref()).expect("square by construction")
}

/// `sum_j p_j^m` from Gibbs probabilities; exactly 1 for `m = 1`.
pub fn purity_from_probs(probs: &[f64], m: u32) -> f64 {
    match m {
        0 => probs.len() as f64,
        1 => 1.0,
        _ => probs.iter().map(|p| p.powi(m as i32)).sum(),
    }
}

/// `tr rho^m` of the thermal state.
pub fn purity_m(s: &Spectrum, beta: f64, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidDimension("purity order must be >= 1".into()));
    }
    let w = gibbs_weights(s, beta)?;
    Ok(purity_from_probs(&w.probs, m))
}

fn energy_from_probs(energies: &[f64], probs: &[f64]) -> f64 {
    probs.iter().zip(energies).map(|(p, e)| p * e).sum()
}

/// `<H>_beta = tr[H rho(beta)]`.
pub fn internal_energy(s: &Spectrum, beta: f64) -> Result<f64> {
    let w = gibbs_weights(s, beta)?;
    Ok(energy_from_probs(&s.energies, &w.probs))
}

/// `d/dbeta tr rho(beta)^m = m Z(m beta)/Z(beta)^m (<H>_beta - <H>_{m beta})`.
///
/// The prefactor is evaluated as `exp(log Z(m beta) - m log Z(beta))` with
/// ground-shifted partition functions. The energy difference is clamped at
/// zero: it is nonnegative in exact arithmetic and only rounding can flip it.
pub fn purity_beta_derivative(s: &Spectrum, beta: f64, m: u32) -> Result<f64> {
    check_beta(beta)?;
    if m == 0 {
        return Err(Error::InvalidDimension("purity order must be >= 1".into()));
    }
    if m == 1 || beta == 0.0 {
        return Ok(0.0);
    }
    let mf = m as f64;
    let log_ratio = shifted_log_z(&s.energies, mf * beta) - mf * shifted_log_z(&s.energies, beta);
    let prefactor = log_ratio.exp();
    let gap = (internal_energy(s, beta)? - internal_energy(s, mf * beta)?).max(0.0);
    let out = mf * prefactor * gap;
    if !out.is_finite() {
        return Err(Error::numeric(format!(
            "purity derivative overflowed at beta={beta}, m={m}"
        )));
    }
    Ok(out)
}
