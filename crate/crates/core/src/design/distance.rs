//! Estimators of the distance between a thermal ensemble and a state t-design.
//!
//! * [`distance_trace_norm`]: half the trace norm of `X - Π/d_sym`, by full
//!   diagonalization on `(C^D)^{⊗t}`.
//! * [`trace_norm_from_sym_block`]: the same quantity from the compression of
//!   `X` onto the symmetric subspace. Any average of `rho^{⊗t}` is positive and
//!   commutes with `Π`, so the part of `X` outside the symmetric subspace is
//!   positive and contributes exactly its trace, `1 - tr(XΠ)`.
//! * [`distance_sym_overlap`]: `1 - tr(XΠ)`.
//! * [`distance_cycle_expansion`]: `1 - tr(XΠ)` rewritten through purities
//!   `tr rho^m`, never forming a `D^t`-dimensional object.
//! * [`ground_state_bound`]: `1 - E[p_0^t]`.

use crate::design::moments::MomentAccumulator;
use crate::design::partitions::{cycle_types, CycleType};
use crate::design::projector::SymProjector;
use crate::error::{Error, Result};
use crate::matrix::HermitianMatrix;
use crate::spectral::hermitian_eigenvalues;

fn check_pair(acc: &MomentAccumulator, proj: &SymProjector) -> Result<()> {
    if acc.dim() != proj.dim() || acc.t() != proj.t() {
        return Err(Error::DimensionMismatch {
            expected: proj.matrix().dim(),
            got: acc.total_dim(),
        });
    }
    if acc.count() == 0 {
        return Err(Error::InvalidDimension("accumulator is empty".into()));
    }
    Ok(())
}

/// `(1/2) || X - Π/d_sym ||_1`.
pub fn distance_trace_norm(acc: &MomentAccumulator, proj: &SymProjector) -> Result<f64> {
    check_pair(acc, proj)?;
    let scale = 1.0 / proj.d_sym() as f64;
    let pm = proj.matrix();
    let diff = HermitianMatrix::from_upper(acc.total_dim(), |i, j| {
        acc.mean()[(i, j)] - pm.get(i, j) * scale
    });
    let ev = hermitian_eigenvalues(diff.as_mat())?;
    Ok(0.5 * ev.iter().map(|e| e.abs()).sum::<f64>())
}

/// `1 - tr(X Π)`.
pub fn distance_sym_overlap(acc: &MomentAccumulator, proj: &SymProjector) -> Result<f64> {
    check_pair(acc, proj)?;
    Ok(1.0 - sym_overlap_trace(acc, proj))
}

fn sym_overlap_trace(acc: &MomentAccumulator, proj: &SymProjector) -> f64 {
    let n = acc.total_dim();
    let (x, p) = (acc.mean(), proj.matrix());
    let mut tr = 0.0;
    for i in 0..n {
        for j in 0..n {
            tr += (x[(i, j)] * p.get(j, i)).re;
        }
    }
    tr
}

/// `tr(X Π) / d_sym`, the natural estimate of the symmetric-block eigenvalue.
pub fn symmetric_block_eigenvalue(acc: &MomentAccumulator, proj: &SymProjector) -> Result<f64> {
    check_pair(acc, proj)?;
    Ok(sym_overlap_trace(acc, proj) / proj.d_sym() as f64)
}

/// `(1/2) [ (1 - tr B) + || B - I/d_sym ||_1 ]` for the symmetric compression `B` of `X`.
pub fn trace_norm_from_sym_block(block: &HermitianMatrix) -> Result<f64> {
    let d = block.dim();
    let inv = 1.0 / d as f64;
    let shifted = HermitianMatrix::from_upper(d, |i, j| {
        let z = block.get(i, j);
        if i == j {
            z - inv
        } else {
            z
        }
    });
    let ev = hermitian_eigenvalues(shifted.as_mat())?;
    Ok(0.5 * ((1.0 - block.trace()) + ev.iter().map(|e| e.abs()).sum::<f64>()))
}

/// Per-sample purities `tr rho^m` for `m = 1..=t`, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PurityTable {
    t: usize,
    values: Vec<f64>,
}

impl PurityTable {
    pub fn new(t: usize) -> Self {
        PurityTable {
            t,
            values: Vec::new(),
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn len(&self) -> usize {
        self.values.len().checked_div(self.t).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Appends one sample's purities; `row[m - 1] = tr rho^m`.
    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() < self.t {
            return Err(Error::MissingPurities(format!(
                "row {} has {} purities, need {}",
                self.len(),
                row.len(),
                self.t
            )));
        }
        self.values.extend_from_slice(&row[..self.t]);
        Ok(())
    }

    /// Row built from Gibbs (or any spectral) probabilities.
    pub fn push_probs(&mut self, probs: &[f64]) {
        let t = self.t;
        self.values
            .extend((1..=t as u32).map(|m| crate::spectral::purity_from_probs(probs, m)));
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.t..(i + 1) * self.t]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.t.max(1))
    }
}

/// `tr(rho^{⊗t} Π) = sum_λ (1/z_λ) prod_{c ∈ λ} tr rho^{|c|}` for one sample.
pub fn sym_overlap_from_purities(purities: &[f64], types: &[CycleType]) -> f64 {
    types
        .iter()
        .map(|c| c.weight() * c.parts.iter().map(|&p| purities[p - 1]).product::<f64>())
        .sum()
}

/// `1 - (1/t!) sum_σ E[prod_c tr rho^{|c|}]`, summed over conjugacy classes.
pub fn distance_cycle_expansion(table: &PurityTable) -> Result<f64> {
    if table.t() == 0 {
        return Err(Error::MissingPurities("t must be >= 1".into()));
    }
    if table.is_empty() {
        return Err(Error::MissingPurities("no samples".into()));
    }
    let types = cycle_types(table.t())?;
    let n = table.len();
    let mean = table
        .rows()
        .map(|row| sym_overlap_from_purities(row, &types))
        .sum::<f64>()
        / n as f64;
    Ok(1.0 - mean)
}

/// `1 - mean(p_0^t)`, with `p_0^t = exp(t log p_0)`.
pub fn ground_state_bound(ground_probs: &[f64], t: usize) -> Result<f64> {
    if ground_probs.is_empty() {
        return Err(Error::InvalidDimension(
            "no ground-state probabilities".into(),
        ));
    }
    if let Some(bad) = ground_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::numeric(format!(
            "ground-state probability {bad} outside [0, 1]"
        )));
    }
    let tf = t as f64;
    let mean = ground_probs
        .iter()
        .map(|p| (tf * p.ln()).exp())
        .sum::<f64>()
        / ground_probs.len() as f64;
    Ok(1.0 - mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::projector::{
        build_sym_projector, sym_dimension, SymBasis, DEFAULT_MEMORY_CAP,
    };
    use crate::ensembles::{sample_gue, SeedPolicy};
    use crate::spectral::{eig_hermitian, gibbs_weights, thermal_state};

    fn gibbs_states(
        dim: usize,
        count: usize,
        beta: f64,
        seed: u64,
    ) -> (Vec<HermitianMatrix>, PurityTable, usize) {
        let policy = SeedPolicy::new(seed);
        let mut table = PurityTable::new(3);
        let states = (0..count)
            .map(|i| {
                let s = eig_hermitian(&sample_gue(dim, &mut policy.stream(i as u64, 0)).unwrap())
                    .unwrap();
                table.push_probs(&gibbs_weights(&s, beta).unwrap().probs);
                thermal_state(&s, beta).unwrap()
            })
            .collect();
        (states, table, dim)
    }

    #[test]
    fn exact_design_has_zero_distance() {
        // pure symmetric product states |a>^{⊗t} averaged over a 1-design basis
        // do not give Π/d; instead feed Π/d directly through the block route.
        let basis = SymBasis::new(2, 2, DEFAULT_MEMORY_CAP).unwrap();
        let d = basis.len();
        let block = HermitianMatrix::from_real_diagonal(&vec![1.0 / d as f64; d]);
        assert!(trace_norm_from_sym_block(&block).unwrap().abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_states_give_closed_form() {
        let (dim, t) = (4, 2);
        let proj = build_sym_projector(dim, t).unwrap();
        let mut acc = MomentAccumulator::new(dim, t).unwrap();
        let mixed = HermitianMatrix::from_real_diagonal(&[0.25; 4]);
        for _ in 0..3 {
            acc.accumulate(&mixed).unwrap();
        }
        let expected = 1.0 - 10.0 / 16.0;
        assert!((distance_trace_norm(&acc, &proj).unwrap() - expected).abs() < 1e-12);
        assert!((distance_sym_overlap(&acc, &proj).unwrap() - expected).abs() < 1e-12);
        let mut table = PurityTable::new(2);
        table.push_row(&[1.0, 0.25]).unwrap();
        assert!((distance_cycle_expansion(&table).unwrap() - 0.375).abs() < 1e-15);
        assert!((ground_state_bound(&[0.25; 5], 2).unwrap() - 0.9375).abs() < 1e-15);
        assert!((symmetric_block_eigenvalue(&acc, &proj).unwrap() - 1.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn projector_as_mean_gives_zero() {
        let proj = build_sym_projector(3, 2).unwrap();
        let d = proj.d_sym() as f64;
        // Π/d is the moment operator of Haar-random pure states; feed it as a "state"
        // through merge of a hand-built accumulator.
        let mut acc = MomentAccumulator::new(3, 2).unwrap();
        let scaled = HermitianMatrix::from_upper(9, |i, j| proj.matrix().get(i, j) / d);
        let mut buf = Vec::new();
        acc.write_checkpoint(&mut buf).unwrap();
        // patch count = 1 and mean = Π/d through the checkpoint format
        buf[32..40].copy_from_slice(&1u64.to_le_bytes());
        let mut off = 40;
        for part in 0..2 {
            for i in 0..9 {
                for j in 0..9 {
                    let z = scaled.get(i, j);
                    let x = if part == 0 { z.re } else { z.im };
                    buf[off..off + 8].copy_from_slice(&x.to_le_bytes());
                    off += 8;
                }
            }
        }
        acc = MomentAccumulator::read_checkpoint(buf.as_slice()).unwrap();
        assert!(distance_trace_norm(&acc, &proj).unwrap().abs() < 1e-12);
        assert!(distance_sym_overlap(&acc, &proj).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pure_product_states_lie_in_symmetric_subspace() {
        let policy = SeedPolicy::new(77);
        for t in 1..=3 {
            let proj = build_sym_projector(3, t).unwrap();
            let h = sample_gue(3, &mut policy.stream(t as u64, 0)).unwrap();
            let psi = thermal_state(&eig_hermitian(&h).unwrap(), 1e6).unwrap();
            let mut acc = MomentAccumulator::new(3, t).unwrap();
            acc.accumulate(&psi).unwrap();
            assert!(distance_sym_overlap(&acc, &proj).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn cycle_expansion_equals_sym_overlap() {
        for (dim, t, beta) in [(2, 2, 0.4), (3, 3, 1.7), (4, 2, 5.0), (2, 3, 0.0)] {
            let (states, table3, _) = gibbs_states(dim, 30, beta, 100 + dim as u64);
            let mut table = PurityTable::new(t);
            for row in table3.rows() {
                table.push_row(row).unwrap();
            }
            let proj = build_sym_projector(dim, t).unwrap();
            let mut acc = MomentAccumulator::new(dim, t).unwrap();
            acc.accumulate_batch(&states).unwrap();
            let a = distance_cycle_expansion(&table).unwrap();
            let b = distance_sym_overlap(&acc, &proj).unwrap();
            assert!(
                (a - b).abs() < 1e-10,
                "D={dim} t={t} beta={beta}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn block_route_matches_full_diagonalization() {
        for (dim, t, beta) in [(2, 2, 1.0), (3, 2, 3.0), (2, 3, 0.8), (3, 3, 2.5)] {
            let (states, _, _) = gibbs_states(dim, 20, beta, 200 + t as u64);
            let proj = build_sym_projector(dim, t).unwrap();
            let basis = SymBasis::new(dim, t, DEFAULT_MEMORY_CAP).unwrap();
            assert_eq!(basis.len() as u128, sym_dimension(dim, t));
            let mut acc = MomentAccumulator::new(dim, t).unwrap();
            acc.accumulate_batch(&states).unwrap();
            let full = distance_trace_norm(&acc, &proj).unwrap();
            let block = trace_norm_from_sym_block(&basis.compress(acc.mean()).unwrap()).unwrap();
            assert!(
                (full - block).abs() < 1e-10,
                "D={dim} t={t}: {full} vs {block}"
            );
            assert!(distance_sym_overlap(&acc, &proj).unwrap() <= full + 1e-10);
        }
    }

    #[test]
    fn cycle_expansion_errors() {
        assert!(matches!(
            distance_cycle_expansion(&PurityTable::new(2)),
            Err(Error::MissingPurities(_))
        ));
        let mut table = PurityTable::new(3);
        assert!(table.push_row(&[1.0, 0.5]).is_err());
    }

    #[test]
    fn cycle_expansion_t1_is_zero() {
        let (_, table3, _) = gibbs_states(3, 10, 1.0, 5);
        let mut table = PurityTable::new(1);
        for row in table3.rows() {
            table.push_row(row).unwrap();
        }
        assert_eq!(distance_cycle_expansion(&table).unwrap(), 0.0);
    }

    #[test]
    fn bound_limits() {
        assert_eq!(ground_state_bound(&[1.0, 1.0], 7).unwrap(), 0.0);
        assert!(ground_state_bound(&[], 2).is_err());
        assert!(ground_state_bound(&[1.2], 2).is_err());
        assert!((ground_state_bound(&[0.0, 1.0], 3).unwrap() - 0.5).abs() < 1e-15);
    }
}
