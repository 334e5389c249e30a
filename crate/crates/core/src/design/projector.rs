//! The projector onto the symmetric subspace of `(C^D)^{⊗t}` and an explicit
//! orthonormal basis of that subspace.
//!
//! Multi-indices `(i_1, ..., i_t)` are flattened with `i_1` most significant.

use faer::{c64, Mat};

use crate::ensembles::checked_pow;
use crate::error::{Error, Result};
use crate::matrix::HermitianMatrix;

/// Default cap on `D^t` for every object that materializes a `D^t x D^t` matrix.
pub const DEFAULT_MEMORY_CAP: usize = 4096;

/// Largest `t` for which the projector is built by literally averaging all `t!`
/// permutation operators; beyond it the equivalent orbit formula is used.
const LITERAL_AVERAGE_MAX_T: usize = 7;

/// `C(D + t - 1, t)`.
pub fn sym_dimension(dim: usize, t: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 1..=t as u128 {
        acc = acc * (dim as u128 + i - 1) / i;
    }
    acc
}

/// `D^t`, or a capacity error when it exceeds `cap`.
pub fn check_capacity(dim: usize, t: usize, cap: usize) -> Result<usize> {
    match checked_pow(dim, t) {
        Ok(n) if n <= cap => Ok(n),
        _ => Err(Error::Capacity { dim, t, cap }),
    }
}

fn digits(mut x: usize, dim: usize, t: usize) -> Vec<usize> {
    let mut out = vec![0; t];
    for slot in out.iter_mut().rev() {
        *slot = x % dim;
        x /= dim;
    }
    out
}

fn undigits(ds: &[usize], dim: usize) -> usize {
    ds.iter().fold(0, |acc, &d| acc * dim + d)
}

#[derive(Debug, Clone)]
pub struct SymProjector {
    dim: usize,
    t: usize,
    d_sym: usize,
    matrix: HermitianMatrix,
}

impl SymProjector {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn d_sym(&self) -> usize {
        self.d_sym
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// `(1/t!) sum_σ V_σ`, each `V_σ` applied as the basis permutation
    /// `(i_1, ..., i_t) -> (i_σ(1), ..., i_σ(t))`.
    pub fn by_permutation_average(dim: usize, t: usize, cap: usize) -> Result<Self> {
        let total = check_capacity(dim, t, cap)?;
        let perms = permutations(t);
        let w = 1.0 / perms.len() as f64;
        let mut m = Mat::<c64>::zeros(total, total);
        let mut permuted = vec![0usize; t];
        for x in 0..total {
            let ds = digits(x, dim, t);
            for sigma in &perms {
                for (slot, &s) in permuted.iter_mut().zip(sigma) {
                    *slot = ds[s];
                }
                m[(undigits(&permuted, dim), x)] += c64::new(w, 0.0);
            }
        }
        Ok(SymProjector {
            dim,
            t,
            d_sym: sym_dimension(dim, t) as usize,
            matrix: HermitianMatrix::from_mat_symmetrized(m.as_ref())?,
        })
    }

    /// `sum_μ |s_μ><s_μ|` over the orthonormal symmetric basis.
    pub fn from_basis(basis: &SymBasis) -> Self {
        let total = basis.total_dim();
        let mut m = Mat::<c64>::zeros(total, total);
        for state in &basis.states {
            let v = state.amplitude * state.amplitude;
            for &x in &state.support {
                for &y in &state.support {
                    m[(x, y)] = c64::new(v, 0.0);
                }
            }
        }
        SymProjector {
            dim: basis.dim,
            t: basis.t,
            d_sym: basis.len(),
            matrix: HermitianMatrix::try_from_mat(m).expect("real symmetric by construction"),
        }
    }
}

/// All permutations of `0..t` (Heap's algorithm).
fn permutations(t: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..t).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0usize; t];
    let mut i = 0;
    while i < t {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Builds `Π_sym^{(t)}` on `(C^D)^{⊗t}` under the default memory cap.
pub fn build_sym_projector(dim: usize, t: usize) -> Result<SymProjector> {
    build_sym_projector_with_cap(dim, t, DEFAULT_MEMORY_CAP)
}

pub fn build_sym_projector_with_cap(dim: usize, t: usize, cap: usize) -> Result<SymProjector> {
    if dim == 0 || t == 0 {
        return Err(Error::InvalidDimension(format!(
            "projector needs D, t >= 1 (D={dim}, t={t})"
        )));
    }
    if t <= LITERAL_AVERAGE_MAX_T {
        SymProjector::by_permutation_average(dim, t, cap)
    } else {
        Ok(SymProjector::from_basis(&SymBasis::new(dim, t, cap)?))
    }
}

/// One normalized symmetric state: equal amplitude on every basis index whose
/// digits are a rearrangement of one multiset.
#[derive(Debug, Clone)]
pub struct SymState {
    pub support: Vec<usize>,
    pub amplitude: f64,
}

/// Orthonormal basis of the symmetric subspace, one state per multiset of
/// `t` indices from `0..D`, ordered by the sorted multiset.
#[derive(Debug, Clone)]
pub struct SymBasis {
    dim: usize,
    t: usize,
    states: Vec<SymState>,
}

impl SymBasis {
    pub fn new(dim: usize, t: usize, cap: usize) -> Result<Self> {
        if dim == 0 || t == 0 {
            return Err(Error::InvalidDimension(format!(
                "basis needs D, t >= 1 (D={dim}, t={t})"
            )));
        }
        let total = check_capacity(dim, t, cap)?;
        let mut by_multiset: std::collections::BTreeMap<Vec<usize>, Vec<usize>> =
            Default::default();
        for x in 0..total {
            let mut key = digits(x, dim, t);
            key.sort_unstable();
            by_multiset.entry(key).or_default().push(x);
        }
        let states = by_multiset
            .into_values()
            .map(|support| SymState {
                amplitude: 1.0 / (support.len() as f64).sqrt(),
                support,
            })
            .collect();
        Ok(SymBasis { dim, t, states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn total_dim(&self) -> usize {
        self.dim.pow(self.t as u32)
    }

    pub fn states(&self) -> &[SymState] {
        &self.states
    }

    /// `Q^† A Q` where the columns of `Q` are the basis states.
    pub fn compress(&self, a: faer::MatRef<'_, c64>) -> Result<HermitianMatrix> {
        let total = self.total_dim();
        if a.nrows() != total || a.ncols() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                got: a.nrows(),
            });
        }
        let n = self.len();
        let mut out = Mat::<c64>::zeros(n, n);
        for (mu, sm) in self.states.iter().enumerate() {
            for (nu, sn) in self.states.iter().enumerate().skip(mu) {
                let mut acc = c64::new(0.0, 0.0);
                for &x in &sm.support {
                    for &y in &sn.support {
                        acc += a[(x, y)];
                    }
                }
                out[(mu, nu)] = acc * (sm.amplitude * sn.amplitude);
            }
        }
        Ok(HermitianMatrix::from_upper(n, |i, j| out[(i, j)]))
    }
}
