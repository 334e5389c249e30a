//! Random global (GUE) and random k-local Hamiltonians.
//!
//! GUE(L) has density proportional to `exp(-(L/2) tr H^2)`. Expanding the
//! trace fixes the entry variances: diagonal entries are real with variance
//! `1/L`, and the real and imaginary parts of each off-diagonal entry have
//! variance `1/(2L)`. Under this normalization the spectrum fills `[-2, 2]`.
//!
//! A random k-local Hamiltonian on `n` sites of dimension `d` is a sum of
//! independent GUE(d^k) terms, one per interaction set, added without rescaling.
//!
//! Sampling is a pure function of `(EnsembleSpec, sample index)`: every term
//! draws from its own ChaCha20 stream keyed by the master seed, the sample
//! index and the term index (see [`SeedPolicy`]).

use faer::c64;
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::HermitianMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Global,
    Local,
}

/// Interaction geometry of a local ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Graph {
    /// Windows of `k` consecutive sites on an open chain.
    #[default]
    Line,
    /// Every `k`-subset of sites.
    Complete,
}

/// Full description of a random-Hamiltonian ensemble.
///
/// For [`EnsembleKind::Global`] the Hamiltonian is a single GUE(d^n) draw and
/// `k`/`graph` are ignored. For [`EnsembleKind::Local`] `k` is required and
/// `graph` defaults to [`Graph::Line`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<Graph>,
    pub seed: u64,
    pub samples: usize,
}

impl EnsembleSpec {
    pub fn global(n: usize, d: usize, seed: u64, samples: usize) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::Global,
            n,
            d,
            k: None,
            graph: None,
            seed,
            samples,
        }
    }

    pub fn local(n: usize, d: usize, k: usize, graph: Graph, seed: u64, samples: usize) -> Self {
        EnsembleSpec {
            kind: EnsembleKind::Local,
            n,
            d,
            k: Some(k),
            graph: Some(graph),
            seed,
            samples,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidEnsemble("n must be >= 1".into()));
        }
        if self.d < 2 {
            return Err(Error::InvalidEnsemble(format!(
                "d must be >= 2, got {}",
                self.d
            )));
        }
        if self.samples == 0 {
            return Err(Error::InvalidEnsemble("samples must be >= 1".into()));
        }
        checked_pow(self.d, self.n)?;
        if self.kind == EnsembleKind::Local {
            let k = self
                .k
                .ok_or_else(|| Error::InvalidEnsemble("local ensemble requires k".into()))?;
            if k == 0 || k > self.n {
                return Err(Error::InvalidLocality { n: self.n, k });
            }
        }
        Ok(())
    }

    /// Total Hilbert-space dimension `D = d^n`.
    pub fn dim(&self) -> Result<usize> {
        checked_pow(self.d, self.n)
    }

    /// Locality of the ensemble; `n` for the global ensemble.
    pub fn locality(&self) -> usize {
        match self.kind {
            EnsembleKind::Global => self.n,
            EnsembleKind::Local => self.k.unwrap_or(self.n),
        }
    }

    pub fn graph(&self) -> Graph {
        self.graph.unwrap_or_default()
    }

    pub fn seed_policy(&self) -> SeedPolicy {
        SeedPolicy::new(self.seed)
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc
            .checked_mul(base)
            .ok_or_else(|| Error::InvalidDimension(format!("{base}^{exp} overflows")))?;
    }
    Ok(acc)
}

/// Counter-based derivation of independent random streams.
///
/// Stream `(sample, term)` is ChaCha20 keyed with the 256-bit little-endian
/// concatenation `master_seed || sample || term || DOMAIN`, starting at block
/// counter zero. Streams are therefore independent of evaluation order and
/// worker count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedPolicy {
    pub master_seed: u64,
}

impl SeedPolicy {
    const DOMAIN: u64 = u64::from_le_bytes(*b"thermdsg");

    pub fn new(master_seed: u64) -> Self {
        SeedPolicy { master_seed }
    }

    pub fn stream(&self, sample: u64, term: u64) -> ChaCha20Rng {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&sample.to_le_bytes());
        key[16..24].copy_from_slice(&term.to_le_bytes());
        key[24..32].copy_from_slice(&Self::DOMAIN.to_le_bytes());
        ChaCha20Rng::from_seed(key)
    }
}

/// Draws one GUE(L) matrix.
///
/// Entries are drawn row by row over the upper triangle: `H_ii`, then
/// `(Re H_ij, Im H_ij)` for `j > i`.
pub fn sample_gue<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<HermitianMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension("GUE dimension must be >= 1".into()));
    }
    let diag_sd = (1.0 / dim as f64).sqrt();
    let off_sd = (0.5 / dim as f64).sqrt();
    Ok(HermitianMatrix::from_upper(dim, |i, j| {
        if i == j {
            let x: f64 = rng.sample(StandardNormal);
            c64::new(diag_sd * x, 0.0)
        } else {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c64::new(off_sd * re, off_sd * im)
        }
    }))
}

/// Site subsets carrying one local term each.
///
/// `Line` gives the `n - k + 1` windows of consecutive sites in ascending
/// order; `Complete` gives all `C(n, k)` subsets in lexicographic order.
pub fn interaction_sets(n: usize, k: usize, graph: Graph) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k > n {
        return Err(Error::InvalidLocality { n, k });
    }
    Ok(match graph {
        Graph::Line => (0..=n - k).map(|s| (s..s + k).collect()).collect(),
        Graph::Complete => (0..n).combinations(k).collect(),
    })
}

fn check_term(h: &HermitianMatrix, sites: &[usize], n: usize, d: usize) -> Result<()> {
    if sites.is_empty() {
        return Err(Error::InvalidTerm("empty site set".into()));
    }
    if let Some(&bad) = sites.iter().find(|&&s| s >= n) {
        return Err(Error::InvalidTerm(format!(
            "site {bad} out of range for n={n}"
        )));
    }
    if sites.iter().duplicates().next().is_some() {
        return Err(Error::InvalidTerm(format!("repeated site in {sites:?}")));
    }
    let expected = checked_pow(d, sites.len())?;
    if h.dim() != expected {
        return Err(Error::InvalidTerm(format!(
            "term has dimension {}, expected d^|E| = {expected}",
            h.dim()
        )));
    }
    Ok(())
}

/// Adds `h` acting on `sites` (identity elsewhere) into `out`.
///
/// Site 0 is the most significant digit of a basis index, and the tensor factors
/// of `h` follow the order of `sites`.
fn add_embedded(
    out: &mut faer::Mat<c64>,
    h: &HermitianMatrix,
    sites: &[usize],
    n: usize,
    d: usize,
) {
    let k = sites.len();
    let local_dim = h.dim();
    // place value of every site in the full index
    let place = |site: usize| d.pow((n - 1 - site) as u32);
    let local_offsets: Vec<usize> = (0..local_dim)
        .map(|a| {
            let mut rem = a;
            let mut off = 0;
            for j in (0..k).rev() {
                off += (rem % d) * place(sites[j]);
                rem /= d;
            }
            off
        })
        .collect();
    let rest: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).collect();
    let rest_count = d.pow(rest.len() as u32);
    for r in 0..rest_count {
        let mut rem = r;
        let mut base = 0;
        for &site in rest.iter().rev() {
            base += (rem % d) * place(site);
            rem /= d;
        }
        for (a, &oa) in local_offsets.iter().enumerate() {
            for (b, &ob) in local_offsets.iter().enumerate() {
                out[(base + oa, base + ob)] += h.get(a, b);
            }
        }
    }
}

/// Embeds a term on `sites` into the `d^n`-dimensional space.
pub fn embed_local_term(
    h: &HermitianMatrix,
    sites: &[usize],
    n: usize,
    d: usize,
) -> Result<HermitianMatrix> {
    check_term(h, sites, n, d)?;
    let dim = checked_pow(d, n)?;
    let mut out = faer::Mat::<c64>::zeros(dim, dim);
    add_embedded(&mut out, h, sites, n, d);
    HermitianMatrix::try_from_mat(out)
}

/// Hamiltonian number `index` of the ensemble.
pub fn sample_hamiltonian(spec: &EnsembleSpec, index: usize) -> Result<HermitianMatrix> {
    spec.validate()?;
    if index >= spec.samples {
        return Err(Error::InvalidEnsemble(format!(
            "sample index {index} out of range (samples = {})",
            spec.samples
        )));
    }
    let policy = spec.seed_policy();
    let dim = spec.dim()?;
    match spec.kind {
        EnsembleKind::Global => sample_gue(dim, &mut policy.stream(index as u64, 0)),
        EnsembleKind::Local => {
            let k = spec.locality();
            let local_dim = checked_pow(spec.d, k)?;
            let mut out = faer::Mat::<c64>::zeros(dim, dim);
            for (e, sites) in interaction_sets(spec.n, k, spec.graph())?
                .iter()
                .enumerate()
            {
                let h = sample_gue(local_dim, &mut policy.stream(index as u64, e as u64))?;
                add_embedded(&mut out, &h, sites, spec.n, spec.d);
            }
            HermitianMatrix::try_from_mat(out)
        }
    }
}
