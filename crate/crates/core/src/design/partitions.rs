//! Conjugacy classes of the symmetric group, indexed by integer partitions.

use crate::error::{Error, Result};

/// Largest `t` for which `t!` (and hence every class size) fits in a `u128`.
pub const MAX_CYCLE_ORDER: usize = 34;

/// A cycle type of `S_t`: cycle lengths in nonincreasing order, and the number
/// of permutations having them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleType {
    pub parts: Vec<usize>,
    pub multiplicity: u128,
}

impl CycleType {
    /// `(a_1, a_2, ...)` where `a_m` counts parts equal to `m`.
    fn part_counts(&self) -> Vec<(usize, usize)> {
        let mut counts: Vec<(usize, usize)> = Vec::new();
        for &p in &self.parts {
            match counts.last_mut() {
                Some((m, a)) if *m == p => *a += 1,
                _ => counts.push((p, 1)),
            }
        }
        counts
    }

    /// `multiplicity / t! = 1 / prod_m (m^{a_m} a_m!)`, computed without `t!`.
    pub fn weight(&self) -> f64 {
        let mut log_z = 0.0;
        for (m, a) in self.part_counts() {
            log_z += a as f64 * (m as f64).ln();
            log_z += (1..=a).map(|i| (i as f64).ln()).sum::<f64>();
        }
        (-log_z).exp()
    }

    pub fn order(&self) -> usize {
        self.parts.iter().sum()
    }
}

/// All partitions of `t` as nonincreasing part lists, in lexicographic order
/// (`[1, 1, ..., 1]` first, `[t]` last).
pub fn integer_partitions(t: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for p in (1..=remaining.min(max_part)).rev() {
            prefix.push(p);
            rec(remaining - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if t > 0 {
        rec(t, t, &mut Vec::new(), &mut out);
    }
    out.sort();
    out
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Every cycle type of `S_t` with its class size `t! / prod_m (m^{a_m} a_m!)`.
pub fn cycle_types(t: usize) -> Result<Vec<CycleType>> {
    if t == 0 || t > MAX_CYCLE_ORDER {
        return Err(Error::InvalidDimension(format!(
            "cycle types need 1 <= t <= {MAX_CYCLE_ORDER}, got {t}"
        )));
    }
    let t_fact = factorial(t);
    Ok(integer_partitions(t)
        .into_iter()
        .map(|parts| {
            let mut ct = CycleType {
                parts,
                multiplicity: 0,
            };
            let z: u128 = ct
                .part_counts()
                .into_iter()
                .map(|(m, a)| (m as u128).pow(a as u32) * factorial(a))
                .product();
            ct.multiplicity = t_fact / z;
            ct
        })
        .collect())
}
