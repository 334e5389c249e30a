//! Dense complex Hermitian matrices.
//!
//! Hamiltonians, density operators and moment operators all use this type. The
//! backing storage is a [`faer::Mat`]; constructors only ever write one triangle
//! and mirror it, so `H[(i, j)] == conj(H[(j, i)])` holds bit-for-bit.

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: Mat<c64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix {
            inner: Mat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix {
            inner: Mat::identity(dim, dim),
        }
    }

    /// Builds a matrix from its upper triangle. `f(i, j)` is called once for
    /// each `i <= j`; the imaginary part of diagonal entries is discarded.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> c64) -> Self {
        let mut inner = Mat::<c64>::zeros(dim, dim);
        for i in 0..dim {
            let d = f(i, i);
            inner[(i, i)] = c64::new(d.re, 0.0);
            for j in i + 1..dim {
                let z = f(i, j);
                inner[(i, j)] = z;
                inner[(j, i)] = z.conj();
            }
        }
        HermitianMatrix { inner }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self::from_upper(diag.len(), |i, j| {
            if i == j {
                c64::new(diag[i], 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        })
    }

    /// Takes the Hermitian part `(A + A^†)/2` of a square matrix.
    pub fn from_mat_symmetrized(a: MatRef<'_, c64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidDimension(format!(
                "matrix is {}x{}, expected square",
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(Self::from_upper(a.nrows(), |i, j| {
            (a[(i, j)] + a[(j, i)].conj()) * 0.5
        }))
    }

    /// Wraps `a`, rejecting it unless it is exactly Hermitian.
    pub fn try_from_mat(a: Mat<c64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidDimension(format!(
                "matrix is {}x{}, expected square",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        for i in 0..n {
            if a[(i, i)].im != 0.0 {
                return Err(Error::InvalidDimension(format!(
                    "diagonal entry {i} is not real"
                )));
            }
            for j in i + 1..n {
                if a[(i, j)] != a[(j, i)].conj() {
                    return Err(Error::InvalidDimension(format!(
                        "entries ({i},{j}) and ({j},{i}) are not conjugate"
                    )));
                }
            }
        }
        Ok(HermitianMatrix { inner: a })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.inner[(i, j)]
    }

    pub fn as_mat(&self) -> MatRef<'_, c64> {
        self.inner.as_ref()
    }

    pub fn into_mat(self) -> Mat<c64> {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.inner[(i, i)].re).sum()
    }

    /// `max |A_ij - conj(A_ji)|`; zero for anything built by this module.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max(self.inner[(i, j)].norm());
            }
        }
        worst
    }

    /// Adds `other` in place.
    pub fn add_assign(&mut self, other: &HermitianMatrix) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                let v = other.inner[(i, j)];
                self.inner[(i, j)] += v;
            }
        }
        Ok(())
    }

    /// Kronecker product `self ⊗ other`, with `self` on the more significant index.
    pub fn kron(&self, other: &HermitianMatrix) -> HermitianMatrix {
        let (a, b) = (self.dim(), other.dim());
        let n = a * b;
        let mut inner = Mat::<c64>::zeros(n, n);
        for i1 in 0..a {
            for j1 in 0..a {
                let x = self.inner[(i1, j1)];
                for i2 in 0..b {
                    for j2 in 0..b {
                        inner[(i1 * b + i2, j1 * b + j2)] = x * other.inner[(i2, j2)];
                    }
                }
            }
        }
        HermitianMatrix { inner }
    }

    /// Eigenvalues (ascending) of this matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        crate::spectral::hermitian_eigenvalues(self.as_mat())
    }
}
