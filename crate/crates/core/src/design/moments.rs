//! Streaming estimate of the moment operator `E[rho^{⊗t}]`.

use std::io::{Read, Write};

use faer::linalg::matmul::matmul;
use faer::linalg::matmul::triangular::{self, BlockStructure};
use faer::{c64, Accum, Mat, MatRef, Par};

use crate::design::projector::{check_capacity, DEFAULT_MEMORY_CAP};
use crate::error::{Error, Result};
use crate::matrix::HermitianMatrix;

const CHECKPOINT_MAGIC: &[u8; 8] = b"TDMOMACC";
const CHECKPOINT_VERSION: u32 = 1;

/// Upper bound on the scratch used for one batched update, in bytes.
const BATCH_SCRATCH_BYTES: usize = 64 << 20;
const MAX_BATCH: usize = 512;

/// Running mean of `rho^{⊗t}` over the states pushed so far.
///
/// States are folded in the order they are given, so the result is a pure
/// function of the input sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentAccumulator {
    dim: usize,
    t: usize,
    count: u64,
    mean: Mat<c64>,
}

impl MomentAccumulator {
    pub fn new(dim: usize, t: usize) -> Result<Self> {
        Self::with_cap(dim, t, DEFAULT_MEMORY_CAP)
    }

    pub fn with_cap(dim: usize, t: usize, cap: usize) -> Result<Self> {
        if dim == 0 || t == 0 {
            return Err(Error::InvalidDimension(format!(
                "accumulator needs D, t >= 1 (D={dim}, t={t})"
            )));
        }
        let total = check_capacity(dim, t, cap)?;
        Ok(MomentAccumulator {
            dim,
            t,
            count: 0,
            mean: Mat::zeros(total, total),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn total_dim(&self) -> usize {
        self.mean.nrows()
    }

    pub fn mean(&self) -> MatRef<'_, c64> {
        self.mean.as_ref()
    }

    pub fn mean_matrix(&self) -> HermitianMatrix {
        HermitianMatrix::from_mat_symmetrized(self.mean.as_ref()).expect("square")
    }

    pub fn trace(&self) -> f64 {
        (0..self.total_dim()).map(|i| self.mean[(i, i)].re).sum()
    }

    fn check_state(&self, rho: &HermitianMatrix) -> Result<()> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho.dim(),
            });
        }
        Ok(())
    }

    /// Folds in one state: `mean += (rho^{⊗t} - mean) / count`.
    pub fn accumulate(&mut self, rho: &HermitianMatrix) -> Result<()> {
        self.check_state(rho)?;
        let power = tensor_power(rho, self.t);
        self.count += 1;
        let inv = 1.0 / self.count as f64;
        let n = self.total_dim();
        for j in 0..n {
            for i in 0..n {
                let m = self.mean[(i, j)];
                self.mean[(i, j)] = m + (power.get(i, j) - m) * inv;
            }
        }
        Ok(())
    }

    /// Folds in a sequence of states, summing fixed-size chunks with one real
    /// matrix product each and merging every chunk sum into the running mean.
    ///
    /// Chunk boundaries depend only on `(D, t)`, never on the worker count.
    pub fn accumulate_batch(&mut self, rhos: &[HermitianMatrix]) -> Result<()> {
        for rho in rhos {
            self.check_state(rho)?;
        }
        let t_left = self.t / 2;
        let t_right = self.t - t_left;
        let m_left = self.dim.pow(t_left as u32);
        let m_right = self.dim.pow(t_right as u32);
        let f_left = m_left * m_left;
        let f_right = m_right * m_right;
        let chunk = (BATCH_SCRATCH_BYTES / (8 * (f_left + f_right))).clamp(1, MAX_BATCH);

        let left_map = FeatureMap::new(m_left);
        let right_map = FeatureMap::new(m_right);
        let n = self.total_dim();
        let mut gram = Mat::<f64>::zeros(f_left, f_right);
        for group in rhos.chunks(chunk) {
            let b = group.len();
            let mut rf = Mat::<f64>::zeros(f_right, b);
            for (s, rho) in group.iter().enumerate() {
                right_map.write(&tensor_power(rho, t_right), |u, x| rf[(u, s)] = x);
            }
            if t_left == t_right {
                // the Gram matrix of identical feature sets is symmetric: form one triangle
                triangular::matmul(
                    gram.as_mut(),
                    BlockStructure::TriangularLower,
                    Accum::Replace,
                    rf.as_ref(),
                    BlockStructure::Rectangular,
                    rf.as_ref().transpose(),
                    BlockStructure::Rectangular,
                    1.0,
                    Par::Seq,
                );
                for v in 1..f_right {
                    for u in 0..v {
                        gram[(u, v)] = gram[(v, u)];
                    }
                }
            } else {
                let mut lf = Mat::<f64>::zeros(f_left, b);
                for (s, rho) in group.iter().enumerate() {
                    left_map.write(&tensor_power(rho, t_left), |u, x| lf[(u, s)] = x);
                }
                matmul(
                    gram.as_mut(),
                    Accum::Replace,
                    lf.as_ref(),
                    rf.as_ref().transpose(),
                    1.0,
                    Par::Seq,
                );
            }

            let new_count = self.count + b as u64;
            let inv = 1.0 / new_count as f64;
            let bf = b as f64;
            for big_i in 0..m_left {
                for big_j in 0..m_left {
                    let pl = left_map.entry(big_i, big_j);
                    for i in 0..m_right {
                        let row = big_i * m_right + i;
                        for j in 0..m_right {
                            let col = big_j * m_right + j;
                            let pr = right_map.entry(i, j);
                            let sum = pl.product_sum(&pr, &gram);
                            let m = self.mean[(row, col)];
                            self.mean[(row, col)] = m + (sum - m * bf) * inv;
                        }
                    }
                }
            }
            self.count = new_count;
            debug_assert_eq!(n, self.mean.nrows());
        }
        Ok(())
    }

    /// Merges another accumulator as if its states had been pushed after ours.
    pub fn merge(&mut self, other: &MomentAccumulator) -> Result<()> {
        if other.dim != self.dim || other.t != self.t {
            return Err(Error::DimensionMismatch {
                expected: self.total_dim(),
                got: other.total_dim(),
            });
        }
        if other.count == 0 {
            return Ok(());
        }
        let new_count = self.count + other.count;
        let w = other.count as f64 / new_count as f64;
        let n = self.total_dim();
        for j in 0..n {
            for i in 0..n {
                let m = self.mean[(i, j)];
                self.mean[(i, j)] = m + (other.mean[(i, j)] - m) * w;
            }
        }
        self.count = new_count;
        Ok(())
    }

    /// Binary dump: 16-byte header (`TDMOMACC`, u32 version, 4 zero bytes),
    /// then `D`, `t`, `count` as u64 and the row-major mean as f64 real parts
    /// followed by f64 imaginary parts, all little-endian.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        w.write_all(&[0u8; 4])?;
        for v in [self.dim as u64, self.t as u64, self.count] {
            w.write_all(&v.to_le_bytes())?;
        }
        let n = self.total_dim();
        for part in 0..2 {
            for i in 0..n {
                for j in 0..n {
                    let z = self.mean[(i, j)];
                    let x = if part == 0 { z.re } else { z.im };
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[0..8] != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let mut word = [0u8; 8];
        let mut next_u64 = |r: &mut R| -> Result<u64> {
            r.read_exact(&mut word)?;
            Ok(u64::from_le_bytes(word))
        };
        let dim = next_u64(&mut r)? as usize;
        let t = next_u64(&mut r)? as usize;
        let count = next_u64(&mut r)?;
        let total = crate::ensembles::checked_pow(dim, t)
            .map_err(|_| Error::Checkpoint(format!("D={dim}, t={t} overflows")))?;
        let mut acc = MomentAccumulator::with_cap(dim, t, total.max(1))?;
        acc.count = count;
        let mut buf = [0u8; 8];
        for part in 0..2 {
            for i in 0..total {
                for j in 0..total {
                    r.read_exact(&mut buf)?;
                    let x = f64::from_le_bytes(buf);
                    if part == 0 {
                        acc.mean[(i, j)].re = x;
                    } else {
                        acc.mean[(i, j)].im = x;
                    }
                }
            }
        }
        Ok(acc)
    }
}

/// `rho^{⊗t}`, with `rho^{⊗0} = [1]`.
pub fn tensor_power(rho: &HermitianMatrix, t: usize) -> HermitianMatrix {
    let mut out = HermitianMatrix::identity(1);
    for _ in 0..t {
        out = out.kron(rho);
    }
    out
}

/// Real coordinates of a Hermitian `m x m` matrix: slot `(i, j)` holds
/// `Re A_ij` when `i <= j` and `Im A_ji` when `i > j`.
struct FeatureMap {
    m: usize,
}

/// How one complex entry `A_ij` is read back from the real coordinates.
struct EntrySlots {
    re: usize,
    im: Option<(usize, f64)>,
}

impl EntrySlots {
    /// `sum_s A_s[i,j] B_s[k,l]` from `gram[u][v] = sum_s f(A_s)_u f(B_s)_v`.
    #[inline]
    fn product_sum(&self, other: &EntrySlots, gram: &Mat<f64>) -> c64 {
        let mut re = gram[(self.re, other.re)];
        let mut im = 0.0;
        if let Some((b, sb)) = other.im {
            im += sb * gram[(self.re, b)];
        }
        if let Some((a, sa)) = self.im {
            im += sa * gram[(a, other.re)];
            if let Some((b, sb)) = other.im {
                re -= sa * sb * gram[(a, b)];
            }
        }
        c64::new(re, im)
    }
}

impl FeatureMap {
    fn new(m: usize) -> Self {
        FeatureMap { m }
    }

    fn write(&self, a: &HermitianMatrix, mut put: impl FnMut(usize, f64)) {
        let m = self.m;
        for i in 0..m {
            for j in 0..m {
                put(
                    i * m + j,
                    if i <= j {
                        a.get(i, j).re
                    } else {
                        a.get(j, i).im
                    },
                );
            }
        }
    }

    fn entry(&self, i: usize, j: usize) -> EntrySlots {
        let m = self.m;
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => EntrySlots {
                re: i * m + i,
                im: None,
            },
            std::cmp::Ordering::Less => EntrySlots {
                re: i * m + j,
                im: Some((j * m + i, 1.0)),
            },
            std::cmp::Ordering::Greater => EntrySlots {
                re: j * m + i,
                im: Some((i * m + j, -1.0)),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_gue, SeedPolicy};
    use crate::spectral::{eig_hermitian, thermal_state};

    fn random_states(dim: usize, count: usize, seed: u64) -> Vec<HermitianMatrix> {
        let policy = SeedPolicy::new(seed);
        (0..count)
            .map(|i| {
                let h = sample_gue(dim, &mut policy.stream(i as u64, 0)).unwrap();
                thermal_state(&eig_hermitian(&h).unwrap(), 0.5 + i as f64 * 0.1).unwrap()
            })
            .collect()
    }

    fn max_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
            }
        }
        worst
    }

    #[test]
    fn single_update_is_tensor_power() {
        let rho = &random_states(3, 1, 1)[0];
        let mut acc = MomentAccumulator::new(3, 2).unwrap();
        acc.accumulate(rho).unwrap();
        assert_eq!(acc.count(), 1);
        assert_eq!(acc.mean_matrix(), tensor_power(rho, 2));
    }

    #[test]
    fn identical_states_leave_mean_fixed() {
        let rho = &random_states(2, 1, 2)[0];
        let mut acc = MomentAccumulator::new(2, 3).unwrap();
        for _ in 0..7 {
            acc.accumulate(rho).unwrap();
        }
        assert!(max_diff(acc.mean(), tensor_power(rho, 3).as_mat()) < 1e-15);
    }

    #[test]
    fn trace_stays_one() {
        let mut acc = MomentAccumulator::new(3, 3).unwrap();
        for rho in random_states(3, 25, 3) {
            acc.accumulate(&rho).unwrap();
        }
        assert!((acc.trace() - 1.0).abs() < 1e-8);
        assert!(acc.mean_matrix().eigenvalues().unwrap()[0] > -1e-10);
    }

    #[test]
    fn batch_matches_sequential() {
        for (dim, t) in [(3, 1), (3, 2), (2, 3), (2, 4), (4, 2)] {
            let states = random_states(dim, 40, 10 + t as u64);
            let mut seq = MomentAccumulator::new(dim, t).unwrap();
            for rho in &states {
                seq.accumulate(rho).unwrap();
            }
            let mut bat = MomentAccumulator::new(dim, t).unwrap();
            bat.accumulate_batch(&states[..13]).unwrap();
            bat.accumulate_batch(&states[13..]).unwrap();
            assert_eq!(bat.count(), 40);
            assert!(max_diff(seq.mean(), bat.mean()) < 1e-13, "D={dim} t={t}");
            assert_eq!(bat.mean_matrix().hermiticity_defect(), 0.0);
        }
    }

    #[test]
    fn merge_matches_single_stream() {
        let states = random_states(3, 30, 4);
        let mut whole = MomentAccumulator::new(3, 2).unwrap();
        whole.accumulate_batch(&states).unwrap();
        let mut a = MomentAccumulator::new(3, 2).unwrap();
        let mut b = MomentAccumulator::new(3, 2).unwrap();
        a.accumulate_batch(&states[..11]).unwrap();
        b.accumulate_batch(&states[11..]).unwrap();
        a.merge(&b).unwrap();
        assert_eq!(a.count(), 30);
        assert!(max_diff(a.mean(), whole.mean()) < 1e-14);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut acc = MomentAccumulator::new(3, 2).unwrap();
        assert!(matches!(
            acc.accumulate(&HermitianMatrix::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(acc
            .accumulate_batch(&[HermitianMatrix::identity(4)])
            .is_err());
        let other = MomentAccumulator::new(3, 3).unwrap();
        assert!(acc.merge(&other).is_err());
    }

    #[test]
    fn capacity_enforced() {
        assert!(matches!(
            MomentAccumulator::new(8, 5),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            MomentAccumulator::new(2, 13),
            Err(Error::Capacity { .. })
        ));
        assert!(MomentAccumulator::with_cap(4, 5, 1024).is_ok());
    }

    #[test]
    fn checkpoint_layout_and_roundtrip() {
        let mut acc = MomentAccumulator::new(2, 2).unwrap();
        acc.accumulate_batch(&random_states(2, 5, 6)).unwrap();
        let mut buf = Vec::new();
        acc.write_checkpoint(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 24 + 2 * 16 * 8);
        assert_eq!(&buf[0..8], b"TDMOMACC");
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(buf[24..32].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(buf[32..40].try_into().unwrap()), 5);
        let first_re = f64::from_le_bytes(buf[40..48].try_into().unwrap());
        assert_eq!(first_re, acc.mean()[(0, 0)].re);
        let first_im_offset = 40 + 16 * 8 + 8; // entry (0, 1)
        let im01 = f64::from_le_bytes(
            buf[first_im_offset..first_im_offset + 8]
                .try_into()
                .unwrap(),
        );
        assert_eq!(im01, acc.mean()[(0, 1)].im);

        let back = MomentAccumulator::read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back, acc);
        let mut again = Vec::new();
        back.write_checkpoint(&mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn checkpoint_rejects_garbage() {
        assert!(MomentAccumulator::read_checkpoint(&b"NOTMAGIC\x01\0\0\0\0\0\0\0"[..]).is_err());
        let mut buf = Vec::new();
        MomentAccumulator::new(2, 1)
            .unwrap()
            .write_checkpoint(&mut buf)
            .unwrap();
        buf.truncate(buf.len() - 3);
        assert!(MomentAccumulator::read_checkpoint(buf.as_slice()).is_err());
    }
}
