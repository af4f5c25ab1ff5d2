//! Increasing rearrangement and [0, 1] clipping of curves sampled on a grid.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("grid has {grid} points but {values} values")]
    LengthMismatch { grid: usize, values: usize },
    #[error("grid is not strictly increasing at index {0}")]
    NotIncreasing(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl Curve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, CurveError> {
        if grid.len() != values.len() {
            return Err(CurveError::LengthMismatch { grid: grid.len(), values: values.len() });
        }
        if let Some(i) = grid.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(CurveError::NotIncreasing(i + 1));
        }
        Ok(Curve { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// Largest absolute gap to another curve on the same grid.
    pub fn sup_distance(&self, other: &Curve) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn with_values(&self, values: Vec<f64>) -> Curve {
        Curve { grid: self.grid.clone(), values }
    }
}

/// Regularly spaced grid `from, from + step, ..` up to and including `to`.
pub fn linear_grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || !(to >= from) {
        return Vec::new();
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| from + i as f64 * step).collect()
}

/// Sorts the values; the grid is kept.
pub fn rearrange_increasing(c: &Curve) -> Curve {
    let mut v = c.values.clone();
    v.sort_by(f64::total_cmp);
    c.with_values(v)
}

pub fn clip01(c: &Curve) -> Curve {
    c.with_values(c.values.iter().map(|v| v.clamp(0.0, 1.0)).collect())
}
