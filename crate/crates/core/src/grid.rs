//! Uniform grids on intervals and boxes.

use crate::error::{FracError, Result};

/// Maximum number of points allowed in a multi-dimensional grid.
pub const GRID_POINT_BUDGET: usize = 1 << 22;

/// A uniform grid on `[t_min, t_max]` with `n_points >= 2` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    t_min: f64,
    t_max: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return Err(FracError::InvalidGrid(format!(
                "need t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if n_points < 2 {
            return Err(FracError::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        Ok(Grid1D { t_min, t_max, n_points })
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_points);
        self.t_min + self.spacing() * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    /// Same span with twice the resolution (2n - 1 points).
    pub fn refined(&self) -> Grid1D {
        Grid1D {
            t_min: self.t_min,
            t_max: self.t_max,
            n_points: 2 * self.n_points - 1,
        }
    }

    /// Indices whose points lie at distance >= `margin` from both ends.
    pub fn interior_indices(&self, margin: f64) -> Vec<usize> {
        (0..self.n_points)
            .filter(|&i| {
                let t = self.point(i);
                t - self.t_min >= margin - 1e-12 && self.t_max - t >= margin - 1e-12
            })
            .collect()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min - 1e-12 && t <= self.t_max + 1e-12
    }
}

/// A product grid in dimension 1, 2 or 3.
#[derive(Debug, Clone, PartialEq)]
pub struct GridND {
    axes: Vec<Grid1D>,
}

impl GridND {
    pub fn new(axes: Vec<Grid1D>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(FracError::InvalidGrid(format!(
                "dimension must be 1..=3, got {}",
                axes.len()
            )));
        }
        let total: usize = axes.iter().map(Grid1D::n_points).product();
        if total > GRID_POINT_BUDGET {
            return Err(FracError::InvalidGrid(format!(
                "grid has {total} points, budget is {GRID_POINT_BUDGET}"
            )));
        }
        Ok(GridND { axes })
    }

    /// Cube `[lo, hi]^n` with `n_points` per axis.
    pub fn cube(n: usize, lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        let axis = Grid1D::new(lo, hi, n_points)?;
        GridND::new(vec![axis; n])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, k: usize) -> &Grid1D {
        &self.axes[k]
    }

    pub fn n_total(&self) -> usize {
        self.axes.iter().map(Grid1D::n_points).product()
    }

    /// Row-major (last axis fastest) coordinates of flat index `i`.
    pub fn point(&self, i: usize) -> Vec<f64> {
        let mut idx = i;
        let mut coords = vec![0.0; self.dim()];
        for k in (0..self.dim()).rev() {
            let n = self.axes[k].n_points();
            coords[k] = self.axes[k].point(idx % n);
            idx /= n;
        }
        coords
    }

    /// Flat indices of points at distance >= `margin` from the boundary on
    /// every axis.
    pub fn interior_indices(&self, margin: f64) -> Vec<usize> {
        (0..self.n_total())
            .filter(|&i| {
                let x = self.point(i);
                x.iter().zip(&self.axes).all(|(&xi, ax)| {
                    xi - ax.t_min() >= margin - 1e-12 && ax.t_max() - xi >= margin - 1e-12
                })
            })
            .collect()
    }

    pub fn refined(&self) -> Result<GridND> {
        GridND::new(self.axes.iter().map(Grid1D::refined).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_is_uniform() {
        let g = Grid1D::new(-1.0, 1.0, 11).unwrap();
        assert!((g.spacing() - 0.2).abs() < 1e-15);
        assert!((g.point(5) - 0.0).abs() < 1e-15);
        assert_eq!(g.points().count(), 11);
    }

    #[test]
    fn grid_rejects_degenerate_input() {
        assert!(Grid1D::new(1.0, 1.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        assert!(Grid1D::new(f64::NAN, 1.0, 10).is_err());
    }

    #[test]
    fn interior_window_respects_margin() {
        let g = Grid1D::new(0.0, 10.0, 11).unwrap();
        let idx = g.interior_indices(2.0);
        assert_eq!(idx, vec![2, 3, 4, 5, 6, 7, 8]);
    }

    #[test]
    fn nd_grid_indexing_round_trips() {
        let g = GridND::cube(2, 0.0, 1.0, 5).unwrap();
        assert_eq!(g.n_total(), 25);
        let p = g.point(7); // row-major: (1, 2)
        assert!((p[0] - 0.25).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nd_grid_budget_enforced() {
        assert!(GridND::cube(3, 0.0, 1.0, 300).is_err());
        assert!(GridND::new(vec![]).is_err());
    }
}
