use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform discretization of a time (or frequency) axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct TemporalGrid {
    t_start: f64,
    t_end: f64,
    n_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl TryFrom<GridSpec> for TemporalGrid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        TemporalGrid::new(s.t_start, s.t_end, s.n_points)
    }
}

impl From<TemporalGrid> for GridSpec {
    fn from(g: TemporalGrid) -> Self {
        GridSpec { t_start: g.t_start, t_end: g.t_end, n_points: g.n_points }
    }
}

impl TemporalGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!("n_points must be at least 2, got {n_points}")));
        }
        if !t_start.is_finite() || !t_end.is_finite() || t_end <= t_start {
            return Err(Error::InvalidGrid(format!(
                "need finite t_start < t_end, got [{t_start}, {t_end}]"
            )));
        }
        Ok(Self { t_start, t_end, n_points })
    }

    /// `[-10/γ, 30/γ]` with 1024 points.
    pub fn default_opo(gamma: f64) -> Result<Self> {
        Self::new(-10.0 / gamma, 30.0 / gamma, 1024)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Same grid with a different point count.
    pub fn with_points(&self, n_points: usize) -> Result<Self> {
        Self::new(self.t_start, self.t_end, n_points)
    }

    pub fn ensure_same(&self, other: &TemporalGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}
