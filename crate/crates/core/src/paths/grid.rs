use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::SeedRecord;

/// Strictly increasing time points starting at 0.
///
/// Points are shared behind an `Arc`, so every path sampled on the same grid holds a
/// cheap handle rather than its own copy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    points: Arc<[f64]>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if points[0] != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "first point must be 0, got {}",
                points[0]
            )));
        }
        if let Some(bad) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite point {bad}")));
        }
        if let Some(w) = points.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "points must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self {
            points: points.into(),
        })
    }

    /// `n_steps` equal steps on `[0, horizon]`.
    pub fn uniform(n_steps: usize, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param("horizon", format!("must be positive, got {horizon}")));
        }
        if n_steps == 0 {
            return Err(Error::param("n_steps", "must be at least 1"));
        }
        let dt = horizon / n_steps as f64;
        let mut points: Vec<f64> = (0..n_steps).map(|i| i as f64 * dt).collect();
        points.push(horizon);
        Self::new(points)
    }

    /// Uniform grid on `[0, 1 - epsilon]`, the domain on which `1/(1-t)` drifts are integrated.
    pub fn bridge(n_steps: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param("epsilon", format!("must lie in (0, 1), got {epsilon}")));
        }
        Self::uniform(n_steps, 1.0 - epsilon)
    }

    /// The single-point grid `{0}`.
    pub fn origin() -> Self {
        Self {
            points: Arc::from(vec![0.0]),
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n_steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.points.last().expect("grid is never empty")
    }

    /// Step lengths `t[i+1] - t[i]`.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1] - w[0]))
    }

    /// Index of the first grid point `>= t`, if any.
    pub fn index_at_or_after(&self, t: f64) -> Option<usize> {
        let i = self.points.partition_point(|&p| p < t);
        (i < self.points.len()).then_some(i)
    }

    /// Rejects grids whose last point is at or beyond 1.
    pub fn ensure_below_one(&self) -> Result<()> {
        let t = self.horizon();
        if t >= 1.0 {
            Err(Error::SingularHorizon { t })
        } else {
            Ok(())
        }
    }

    pub(crate) fn shares_points_with(&self, other: &TimeGrid) -> bool {
        Arc::ptr_eq(&self.points, &other.points) || self.points == other.points
    }
}

/// A trajectory sampled on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePath {
    pub(crate) grid: TimeGrid,
    pub(crate) values: Vec<f64>,
    pub(crate) seed: Option<SeedRecord>,
}

impl SamplePath {
    pub fn new(grid: TimeGrid, values: Vec<f64>, seed: Option<SeedRecord>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values, seed })
    }

    /// Path on `grid` with values `f(t)`.
    pub fn from_fn(grid: &TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Self {
            grid: grid.clone(),
            values,
            seed: None,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.points()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> Option<SeedRecord> {
        self.seed
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
        *self.values.last().expect("paths are never empty")
    }

    /// Value at the first grid point `>= t`.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.grid.index_at_or_after(t).map(|i| self.values[i])
    }

    /// Increments `x[i+1] - x[i]`.
    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn from_parts(grid: &TimeGrid, values: Vec<f64>, seed: Option<SeedRecord>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self {
            grid: grid.clone(),
            values,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_hits_both_ends() {
        let g = TimeGrid::uniform(3, 0.9).unwrap();
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(g.horizon(), 0.9);
        assert_eq!(g.n_steps(), 3);
    }

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(TimeGrid::new(vec![]), Err(Error::EmptyGrid));
        assert!(TimeGrid::new(vec![0.1, 0.2]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.2, 0.2]).is_err());
        assert!(TimeGrid::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn bridge_grid_stays_below_one() {
        let g = TimeGrid::bridge(10_000, 1e-4).unwrap();
        assert!(g.ensure_below_one().is_ok());
        assert_eq!(g.horizon(), 1.0 - 1e-4);
        assert!(TimeGrid::uniform(10, 1.0).unwrap().ensure_below_one().is_err());
    }

    #[test]
    fn value_lookup() {
        let g = TimeGrid::uniform(4, 1.0).unwrap();
        let p = SamplePath::from_fn(&g, |t| 2.0 * t);
        assert_eq!(p.value_at(0.5), Some(1.0));
        assert_eq!(p.value_at(0.6), Some(1.5));
        assert_eq!(p.value_at(1.5), None);
    }
}
