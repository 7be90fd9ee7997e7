//! Single-pass degenerate OPA on a frequency grid.
//!
//! The generator couples `a(ω)` to `a†(ω')` with strength
//! `J(ω, ω') = gain · α_p(ω + ω' − 2δ)`, where `α_p` is a unit-area Gaussian
//! pump spectrum of width `σ_p` and `δ` the pump-seed detuning. Phase matching
//! is taken as unity, so `J·dω` is real symmetric and the propagator follows
//! exactly from its eigendecomposition: `A = V cosh Λ Vᵀ`, `B = V sinh Λ Vᵀ`.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::BogoliubovKernels;
use crate::grid::TemporalGrid;
use crate::linalg;
use crate::{Error, Result, C64};

/// Largest generator eigenvalue accepted; beyond it `cosh` dwarfs the identity part.
pub const MAX_EXPONENT: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpaParams {
    pub gain: f64,
    pub pump_center_detuning: f64,
    pub pump_spectral_width: f64,
}

impl OpaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.pump_spectral_width > 0.0) || !self.pump_spectral_width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "pump spectral width must be positive, got {}",
                self.pump_spectral_width
            )));
        }
        if !self.gain.is_finite() || !self.pump_center_detuning.is_finite() {
            return Err(Error::InvalidParameter("OPA parameters must be finite".into()));
        }
        Ok(())
    }

    fn pump_amplitude(&self, x: f64) -> f64 {
        let s = self.pump_spectral_width;
        (-0.5 * (x / s).powi(2)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * s)
    }
}

pub fn build_opa(params: &OpaParams, grid: &TemporalGrid) -> Result<BogoliubovKernels> {
    params.validate()?;
    let n = grid.n_points();
    let dw = grid.dt();
    if params.pump_spectral_width < dw {
        return Err(Error::NonConvergent(format!(
            "pump spectral width {} is below the grid spacing {dw}",
            params.pump_spectral_width
        )));
    }
    let w = grid.points();
    let jd = Mat::<f64>::from_fn(n, n, |i, j| {
        params.gain * params.pump_amplitude(w[i] + w[j] - 2.0 * params.pump_center_detuning) * dw
    });
    let (lambda, v) = linalg::symmetric_eigen(jd.as_ref())?;
    let largest = lambda.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    if largest > MAX_EXPONENT {
        return Err(Error::NonConvergent(format!(
            "generator eigenvalue {largest:.3} exceeds {MAX_EXPONENT}; reduce the gain"
        )));
    }
    let scaled = |f: fn(f64) -> f64| {
        let vs = Mat::<f64>::from_fn(n, n, |i, k| v[(i, k)] * f(lambda[k]));
        &vs * v.transpose()
    };
    // cosh − 1 keeps the identity part exact.
    let ch = scaled(|x| if x.abs() < 1e-3 { x * x / 2.0 * (1.0 + x * x / 12.0) } else { x.cosh() - 1.0 });
    let sh = scaled(f64::sinh);
    let a = Mat::<C64>::from_fn(n, n, |i, j| C64::new(ch[(i, j)] + if i == j { 1.0 } else { 0.0 }, 0.0));
    let b = Mat::<C64>::from_fn(n, n, |i, j| C64::new(sh[(i, j)], 0.0));
    BogoliubovKernels::from_discrete(*grid, a, b)
}
