use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cell-centered space grid on (0,1) times a uniform time grid on [0,T].
///
/// Spatial nodes are `x_i = (i + 1/2) h` with `h = 1/n_x`, so no node sits on a
/// degeneracy point of the diffusion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    n_x: usize,
    n_t: usize,
    horizon: f64,
}

impl SpaceTimeGrid {
    pub fn new(n_x: usize, n_t: usize, horizon: f64) -> Result<Self> {
        if n_x < 4 {
            return Err(Error::InvalidGrid(format!("n_x = {n_x}, need at least 4 nodes")));
        }
        if n_t < 2 {
            return Err(Error::InvalidGrid(format!("n_t = {n_t}, need at least 2 steps")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!("horizon T = {horizon} must be positive")));
        }
        Ok(Self { n_x, n_t, horizon })
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Spatial step.
    pub fn h(&self) -> f64 {
        1.0 / self.n_x as f64
    }

    /// Time step.
    pub fn dt(&self) -> f64 {
        self.horizon / self.n_t as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n_x as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        if k == self.n_t {
            self.horizon
        } else {
            self.horizon * k as f64 / self.n_t as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_t).map(|k| self.t(k)).collect()
    }

    /// Index of the time level at `t`, if `t` lies on the time grid.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        let pos = t / self.dt();
        let k = pos.round();
        if k < 0.0 || k > self.n_t as f64 || (pos - k).abs() > 1e-9 {
            None
        } else {
            Some(k as usize)
        }
    }
}

/// Builds the cell-centered space-time grid; requires `n_x >= 4`, `n_t >= 2`, `T > 0`.
pub fn build_grid(n_x: usize, n_t: usize, horizon: f64) -> Result<SpaceTimeGrid> {
    SpaceTimeGrid::new(n_x, n_t, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_cell_grid_nodes() {
        let g = build_grid(4, 2, 1.0).unwrap();
        assert_eq!(g.nodes(), vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(g.times(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn steps() {
        let g = build_grid(8, 4, 2.0).unwrap();
        assert_eq!(g.h(), 0.125);
        assert_eq!(g.dt(), 0.5);
    }

    #[test]
    fn rejects_small_sizes() {
        assert!(build_grid(1, 2, 1.0).is_err());
        assert!(build_grid(4, 1, 1.0).is_err());
        assert!(build_grid(4, 2, 0.0).is_err());
        assert!(build_grid(4, 2, f64::NAN).is_err());
    }

    #[test]
    fn nodes_interior_and_uniform() {
        let g = build_grid(37, 5, 1.0).unwrap();
        let x = g.nodes();
        assert!(x.iter().all(|&v| v > 0.0 && v < 1.0));
        for w in x.windows(2) {
            assert!((w[1] - w[0] - g.h()).abs() < 1e-15);
        }
        assert_eq!(g.time_index(0.6), Some(3));
        assert_eq!(g.time_index(0.61), None);
    }
}
