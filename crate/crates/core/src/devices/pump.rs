use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Pump envelope `ξ(t) = ξ₀ exp(−(t−t₀)²/(2σ²)) / √(2πσ²)`, carrier phase `e^{iφ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPump {
    pub area: f64,
    pub center: f64,
    pub width: f64,
    #[serde(default)]
    pub phase: f64,
}

impl GaussianPump {
    pub fn new(area: f64, center: f64, width: f64) -> Self {
        Self { area, center, width, phase: 0.0 }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0) || !self.width.is_finite() {
            return Err(Error::InvalidParameter(format!("pump width must be positive, got {}", self.width)));
        }
        if !self.area.is_finite() || !self.center.is_finite() || !self.phase.is_finite() {
            return Err(Error::InvalidParameter("pump parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.width;
        self.area * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt() / self.width
    }

    /// `∫_{t1}^{t2} ξ(t) dt`, exact.
    pub fn integral(&self, t1: f64, t2: f64) -> f64 {
        let s = std::f64::consts::SQRT_2 * self.width;
        let (x1, x2) = ((t1 - self.center) / s, (t2 - self.center) / s);
        // Evaluate on the tail side to avoid cancellation.
        let d = if x1 > 0.0 {
            libm::erfc(x1) - libm::erfc(x2)
        } else if x2 < 0.0 {
            libm::erfc(-x2) - libm::erfc(-x1)
        } else {
            libm::erf(x2) - libm::erf(x1)
        };
        0.5 * self.area * d
    }

    /// `(center − 5σ, center + 5σ)`.
    pub fn support(&self) -> (f64, f64) {
        (self.center - 5.0 * self.width, self.center + 5.0 * self.width)
    }
}
