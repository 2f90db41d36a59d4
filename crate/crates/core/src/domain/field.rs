use ndarray::{Array2, ArrayView1, Zip};

use super::SpaceTimeGrid;
use crate::error::{Error, Result};

/// Real samples on the tensor grid: `values[[i, k]]` is the value at `(x_i, t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: SpaceTimeGrid,
    values: Array2<f64>,
}

impl SpaceTimeField {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        Self {
            grid: *grid,
            values: Array2::zeros((grid.n_x(), grid.n_t() + 1)),
        }
    }

    pub fn from_fn(grid: &SpaceTimeGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((grid.n_x(), grid.n_t() + 1), |(i, k)| {
            f(grid.x(i), grid.t(k))
        });
        Self { grid: *grid, values }
    }

    /// Same spatial profile at every time level.
    pub fn from_profile(grid: &SpaceTimeGrid, profile: &[f64]) -> Result<Self> {
        check_len(grid, profile)?;
        let values = Array2::from_shape_fn((grid.n_x(), grid.n_t() + 1), |(i, _)| profile[i]);
        Ok(Self { grid: *grid, values })
    }

    pub fn from_array(grid: &SpaceTimeGrid, values: Array2<f64>) -> Result<Self> {
        let expected = (grid.n_x(), grid.n_t() + 1);
        if values.dim() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: values.dim(),
            });
        }
        Ok(Self { grid: *grid, values })
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[[i, k]]
    }

    pub fn set(&mut self, i: usize, k: usize, v: f64) {
        self.values[[i, k]] = v;
    }

    /// Spatial profile at time level `k`.
    pub fn slice(&self, k: usize) -> Vec<f64> {
        self.values.column(k).to_vec()
    }

    pub fn slice_view(&self, k: usize) -> ArrayView1<'_, f64> {
        self.values.column(k)
    }

    pub fn set_slice(&mut self, k: usize, profile: &[f64]) {
        for (dst, &src) in self.values.column_mut(k).iter_mut().zip(profile) {
            *dst = src;
        }
    }

    /// Spatial profile at time `t`, interpolated linearly between levels.
    pub fn slice_at(&self, t: f64) -> Result<Vec<f64>> {
        let g = &self.grid;
        if !(0.0..=g.horizon()).contains(&t) {
            return Err(crate::error::invalid("t", format!("{t} outside [0, T]")));
        }
        if let Some(k) = g.time_index(t) {
            return Ok(self.slice(k));
        }
        let pos = t / g.dt();
        let k = (pos.floor() as usize).min(g.n_t() - 1);
        let w = pos - k as f64;
        Ok(self
            .values
            .column(k)
            .iter()
            .zip(self.values.column(k + 1).iter())
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.mapv(f),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let mut values = self.values.clone();
        Zip::from(&mut values)
            .and(&other.values)
            .for_each(|a, &b| *a = f(*a, b));
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Multiplies every time level pointwise by a spatial profile.
    pub fn mul_profile(&self, profile: &[f64]) -> Result<Self> {
        check_len(&self.grid, profile)?;
        let mut values = self.values.clone();
        for (mut row, &p) in values.rows_mut().into_iter().zip(profile) {
            row.mapv_inplace(|v| v * p);
        }
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("space-time fields"));
        }
        Ok(())
    }
}

fn check_len(grid: &SpaceTimeGrid, profile: &[f64]) -> Result<()> {
    if profile.len() != grid.n_x() {
        return Err(Error::ShapeMismatch {
            expected: (grid.n_x(), 1),
            found: (profile.len(), 1),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::build_grid;

    #[test]
    fn shape_follows_grid() {
        let g = build_grid(6, 3, 1.0).unwrap();
        let f = SpaceTimeField::zeros(&g);
        assert_eq!(f.values().dim(), (6, 4));
        assert!(SpaceTimeField::from_array(&g, Array2::zeros((6, 3))).is_err());
    }

    #[test]
    fn slices_and_interpolation() {
        let g = build_grid(4, 4, 1.0).unwrap();
        let f = SpaceTimeField::from_fn(&g, |x, t| x + t);
        assert_eq!(f.slice(2), vec![0.625, 0.875, 1.125, 1.375]);
        let mid = f.slice_at(0.375).unwrap();
        assert!((mid[0] - 0.5).abs() < 1e-15);
        assert!(f.slice_at(1.5).is_err());
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = SpaceTimeField::zeros(&build_grid(4, 4, 1.0).unwrap());
        let b = SpaceTimeField::zeros(&build_grid(8, 4, 1.0).unwrap());
        assert!(a.add(&b).is_err());
    }
}
