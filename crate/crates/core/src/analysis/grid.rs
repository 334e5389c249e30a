use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `start, start + step, ..., start + (len - 1) step`.
///
/// Points are computed as `start + i * step` rather than by repeated addition,
/// so a grid and any of its sub-ranges agree exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl BetaGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(start.is_finite() && start >= 0.0) {
            return Err(Error::InvalidGrid(format!(
                "start must be finite and >= 0, got {start}"
            )));
        }
        if len > 1 && !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "step must be finite and > 0, got {step}"
            )));
        }
        Ok(BetaGrid { start, step, len })
    }

    /// Inclusive range; `stop` is kept when it lies on the grid up to rounding.
    ///
    /// `stop < start` yields an empty grid, which sweeps reject.
    pub fn from_range(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !stop.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "stop must be finite, got {stop}"
            )));
        }
        if stop < start {
            return BetaGrid::new(start, step.max(f64::MIN_POSITIVE), 0);
        }
        if stop == start {
            return BetaGrid::new(start, if step > 0.0 { step } else { 1.0 }, 1);
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "step must be finite and > 0, got {step}"
            )));
        }
        let intervals = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize;
        BetaGrid::new(start, step, intervals + 1)
    }

    pub fn single(beta: f64) -> Result<Self> {
        BetaGrid::new(beta, 1.0, 1)
    }

    /// Checks that `points` are uniformly spaced and wraps them.
    pub fn from_points(points: &[f64]) -> Result<Self> {
        match points {
            [] => BetaGrid::new(0.0, 1.0, 0),
            [only] => BetaGrid::single(*only),
            [first, .., last] => {
                let n = points.len();
                let step = (last - first) / (n - 1) as f64;
                let grid = BetaGrid::new(*first, step, n)?;
                let tol = 1e-10 * step.abs().max(first.abs()).max(last.abs()).max(1.0);
                for (i, (&p, q)) in points.iter().zip(grid.points()).enumerate() {
                    if (p - q).abs() > tol {
                        return Err(Error::InvalidGrid(format!(
                            "point {i} is {p}, expected {q} on a uniform grid"
                        )));
                    }
                }
                Ok(grid)
            }
        }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_ranges() {
        assert_eq!(BetaGrid::from_range(0.0, 3.0, 0.05).unwrap().len(), 61);
        assert_eq!(BetaGrid::from_range(0.0, 8.0, 0.1).unwrap().len(), 81);
        assert_eq!(BetaGrid::from_range(0.0, 8.0, 0.2).unwrap().len(), 41);
        assert_eq!(
            BetaGrid::from_range(0.0, 1.0, 0.3).unwrap().points().len(),
            4
        );
        let g = BetaGrid::from_range(0.0, 3.0, 0.05).unwrap();
        assert!((g.get(60) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_ranges() {
        assert_eq!(
            BetaGrid::from_range(1.0, 1.0, 0.0).unwrap().points(),
            vec![1.0]
        );
        assert!(BetaGrid::from_range(2.0, 1.0, 0.1).unwrap().is_empty());
        assert!(BetaGrid::from_range(0.0, 1.0, 0.0).is_err());
        assert!(BetaGrid::from_range(-1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn points_roundtrip() {
        let g = BetaGrid::from_range(0.5, 2.0, 0.25).unwrap();
        assert_eq!(BetaGrid::from_points(&g.points()).unwrap(), g);
        assert!(BetaGrid::from_points(&[0.0, 0.1, 0.3]).is_err());
    }
}
