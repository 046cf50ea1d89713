//! Uniform time grids and sampled functions on them.

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::quadrature::trapezoid_weights;

/// Uniform partition of [0, T] into N subintervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    final_time: f64,
    intervals: usize,
}

impl TimeGrid {
    pub fn new(final_time: f64, intervals: usize) -> Result<Self> {
        if !(final_time.is_finite() && final_time > 0.0) {
            return Err(FracError::InvalidGrid(format!("final time {final_time} must be positive")));
        }
        if intervals < 2 {
            return Err(FracError::InvalidGrid(format!("N = {intervals}, need N >= 2")));
        }
        Ok(Self { final_time, intervals })
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    /// Number of subintervals N.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes N + 1.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.final_time / self.intervals as f64
    }

    /// Node t_i; t_N is exactly T.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.intervals {
            self.final_time
        } else {
            i as f64 * self.final_time / self.intervals as f64
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    pub fn require_intervals(&self, min: usize) -> Result<()> {
        if self.intervals < min {
            Err(FracError::GridTooCoarse { n: self.intervals, min })
        } else {
            Ok(())
        }
    }

    pub fn trapezoid_weights(&self) -> Vec<f64> {
        trapezoid_weights(self.intervals, self.step())
    }
}

/// Finite real values at the nodes of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FracError::InvalidGrid(format!("{} values for a grid with {} nodes", values.len(), grid.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FracError::InvalidInput(i));
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor for values produced by finite arithmetic on finite data.
    pub(crate) fn from_raw(grid: TimeGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self::from_raw(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: TimeGrid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Time reversal t ↦ T - t.
    pub fn reversed(&self) -> Self {
        let mut v = self.values.clone();
        v.reverse();
        Self::from_raw(self.grid, v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    /// a·self + b·other.
    pub fn combine(&self, a: f64, other: &GridFunction, b: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Ok(Self::from_raw(self.grid, values))
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(FracError::IncompatibleGrids)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// max |v_i| over nodes lo..=hi.
    pub fn max_abs_on(&self, lo: usize, hi: usize) -> f64 {
        self.values[lo..=hi].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoidal inner product.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        let w = self.grid.trapezoid_weights();
        Ok(w.iter().zip(&self.values).zip(&other.values).map(|((w, x), y)| w * x * y).sum())
    }

    /// Trapezoidal L² norm squared.
    pub fn l2_squared(&self) -> f64 {
        let w = self.grid.trapezoid_weights();
        w.iter().zip(&self.values).map(|(w, x)| w * x * x).sum()
    }

    pub fn l2(&self) -> f64 {
        self.l2_squared().sqrt()
    }
}

/// First derivative by central differences, second-order one-sided at both ends.
pub fn first_difference(w: &[f64], h: f64) -> Vec<f64> {
    let n = w.len() - 1;
    assert!(n >= 2, "first_difference needs at least three nodes");
    let mut d = vec![0.0; n + 1];
    for i in 1..n {
        d[i] = (w[i + 1] - w[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
    d[n] = (3.0 * w[n] - 4.0 * w[n - 1] + w[n - 2]) / (2.0 * h);
    d
}

/// Second derivative by the compact central stencil, second-order one-sided at both ends.
pub fn second_difference(w: &[f64], h: f64) -> Vec<f64> {
    let n = w.len() - 1;
    assert!(n >= 3, "second_difference needs at least four nodes");
    let h2 = h * h;
    let mut d = vec![0.0; n + 1];
    for i in 1..n {
        d[i] = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / h2;
    }
    d[0] = (2.0 * w[0] - 5.0 * w[1] + 4.0 * w[2] - w[3]) / h2;
    d[n] = (2.0 * w[n] - 5.0 * w[n - 1] + 4.0 * w[n - 2] - w[n - 3]) / h2;
    d
}

/// Second-order one-sided slope at t = 0.
pub fn initial_slope(v: &GridFunction) -> f64 {
    let w = v.values();
    (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * v.grid().step())
}

/// Interior node range [2, N-2] used by identity checks.
pub fn interior(grid: &TimeGrid) -> std::ops::RangeInclusive<usize> {
    2..=grid.intervals() - 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_node_is_exactly_final_time() {
        let g = TimeGrid::new(0.3, 7).unwrap();
        assert_eq!(g.node(7), 0.3);
        assert_eq!(g.node(0), 0.0);
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = TimeGrid::new(1.0, 2).unwrap();
        assert_eq!(GridFunction::new(g, vec![0.0, f64::NAN, 1.0]), Err(FracError::InvalidInput(1)));
    }

    #[test]
    fn trapezoid_l2_of_constant() {
        let g = TimeGrid::new(2.0, 10).unwrap();
        let v = GridFunction::constant(g, 3.0).unwrap();
        assert!((v.l2_squared() - 18.0).abs() < 1e-13);
    }
}
