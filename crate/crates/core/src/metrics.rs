//! Purity, fidelity, quadrature statistics and squeezing-gain fits.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherence::ModeSpectrum;
use crate::linalg;
use crate::state::{CharSource, QuantumState};
use crate::{Error, Result, C64};

/// Largest purity deficit accepted for a fidelity target.
pub const PURE_TOLERANCE: f64 = 1e-6;
/// Default number of coarse fit points.
pub const DEFAULT_FIT_POINTS: usize = 40;
/// Largest p-quadrature amplitude gain in the default fit grid.
pub const DEFAULT_MAX_GAIN: f64 = 10.0;
/// Truncation in which squeezed targets are built.
const TARGET_WORK_DIM: usize = 400;
const REFINE_POINTS: usize = 21;

pub fn purity(state: &QuantumState) -> f64 {
    state.purity()
}

/// `(1/π) ∫ |χ|² d²β` over a sampled characteristic function.
pub fn purity_from_char(chi: &crate::state::CharFunction) -> f64 {
    chi.purity()
}

/// Symmetrized covariance of `(x, p)` with vacuum `diag(1/2, 1/2)`.
pub fn covariance(state: &QuantumState) -> [[f64; 2]; 2] {
    let a = state.mean_a();
    let aa = state.mean_aa() - a * a;
    let n = state.mean_photon_number() - a.norm_sqr();
    let vx = n + 0.5 + aa.re;
    let vp = n + 0.5 - aa.re;
    let cxp = aa.im;
    [[vx, cxp], [cxp, vp]]
}

/// `1 / (2 √det σ)`, the purity of a Gaussian state with covariance `σ`.
pub fn gaussian_purity(cov: &[[f64; 2]; 2]) -> f64 {
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    0.5 / det.sqrt()
}

/// `⟨ψ|ρ|ψ⟩` for a pure target.
pub fn fidelity(rho: &QuantumState, target: &QuantumState) -> Result<f64> {
    let psi = target.pure_vector(PURE_TOLERANCE)?;
    Ok(overlap(rho, &psi))
}

/// `ψ† ρ ψ`, with `ψ` zero-padded or truncated to the dimension of `ρ`.
fn overlap(rho: &QuantumState, psi: &[C64]) -> f64 {
    let d = rho.dim().min(psi.len());
    let r = rho.rho();
    let mut s = C64::new(0.0, 0.0);
    for j in 0..d {
        let mut col = C64::new(0.0, 0.0);
        for i in 0..d {
            col += psi[i].conj() * r[(i, j)];
        }
        s += col * psi[j];
    }
    s.re.clamp(0.0, 1.0)
}

/// Variance of `x_θ = (a e^{−iθ} + a† e^{iθ})/√2` from Fock-basis moments.
pub fn quadrature_variance(state: &QuantumState, theta: f64) -> f64 {
    let a = state.mean_a();
    let aa = state.mean_aa();
    let n = state.mean_photon_number();
    let e = C64::from_polar(1.0, -2.0 * theta);
    let second = n + 0.5 + (aa * e).re;
    let first = (a * C64::from_polar(1.0, -theta)).re * std::f64::consts::SQRT_2;
    second - first * first
}

/// As [`quadrature_variance`], from second derivatives of `χ` at the origin.
///
/// Uses `χ(i t e^{iθ}/√2) = ⟨e^{i t x_θ}⟩` with central differences at steps
/// `h` and `h/2` combined by Richardson extrapolation.
pub fn quadrature_variance_char(source: &dyn CharSource, theta: f64) -> f64 {
    let dir = C64::new(0.0, 1.0) * C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, theta);
    let f = |t: f64| source.chi(dir * t);
    let c0 = f(0.0);
    let derivs = |h: f64| {
        let (p, m) = (f(h), f(-h));
        ((p - m) / (2.0 * h), (p - c0 * 2.0 + m) / (h * h))
    };
    let h = 0.02;
    let (d1a, d2a) = derivs(h);
    let (d1b, d2b) = derivs(0.5 * h);
    let d1 = (d1b * 4.0 - d1a) / 3.0;
    let d2 = (d2b * 4.0 - d2a) / 3.0;
    let mean = (C64::new(0.0, -1.0) * d1).re;
    -d2.re - mean * mean
}

pub fn mean_photon_number(state: &QuantumState) -> f64 {
    state.mean_photon_number().max(0.0)
}

/// `⟨a†a⟩ = (⟨x²⟩ + ⟨p²⟩ − 1)/2` from the characteristic function.
pub fn mean_photon_number_char(source: &dyn CharSource) -> f64 {
    let second = |theta: f64| {
        let dir = C64::new(0.0, 1.0) * C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, theta);
        let f = |t: f64| source.chi(dir * t);
        let c0 = f(0.0);
        let d2 = |h: f64| (f(h) - c0 * 2.0 + f(-h)) / (h * h);
        let h = 0.02;
        -((d2(0.5 * h) * 4.0 - d2(h)) / 3.0).re
    };
    (0.5 * (second(0.0) + second(std::f64::consts::FRAC_PI_2) - 1.0)).max(0.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SqueezeFitResult {
    /// Squeezing parameter; the amplified quadrature gains `e^{best_r}` in amplitude.
    pub best_r: f64,
    pub best_fidelity: f64,
    pub fidelity_curve: Vec<(f64, f64)>,
}

impl SqueezeFitResult {
    pub fn p_gain(&self) -> f64 {
        self.best_r.exp()
    }
}

/// `r` values for gains log-spaced over `[1, max_gain]`.
pub fn default_r_grid() -> Vec<f64> {
    let top = DEFAULT_MAX_GAIN.ln();
    (0..DEFAULT_FIT_POINTS).map(|i| top * i as f64 / (DEFAULT_FIT_POINTS - 1) as f64).collect()
}

/// Squeezed copies of a pure input, `a → cosh r a + sinh r a†`.
struct TargetFamily {
    vecs: Mat<C64>,
    vals: Vec<f64>,
    /// `V† ψ`
    coeffs: Vec<C64>,
    out_dim: usize,
}

impl TargetFamily {
    fn new(input: &QuantumState, out_dim: usize) -> Result<Self> {
        let psi = input.pure_vector(PURE_TOLERANCE)?;
        let work = TARGET_WORK_DIM.max(out_dim + 40).max(psi.len() + 40);
        let g = crate::state::squeeze_generator(1.0, 0.0, work);
        let (vals, vecs) = linalg::hermitian_eigen(g.as_ref())?;
        let coeffs = (0..work).map(|k| (0..psi.len()).map(|i| vecs[(i, k)].conj() * psi[i]).sum()).collect();
        Ok(Self { vecs, vals, coeffs, out_dim })
    }

    /// First `out_dim` amplitudes of `U(r) ψ`, not renormalized.
    fn amplitudes(&self, r: f64) -> Vec<C64> {
        let w: Vec<C64> = self.coeffs.iter().zip(&self.vals).map(|(c, &l)| c * C64::from_polar(1.0, -r * l)).collect();
        (0..self.out_dim).map(|i| w.iter().enumerate().map(|(k, x)| self.vecs[(i, k)] * x).sum()).collect()
    }
}

/// Fidelity of `rho_v1` with the input squeezed by `a → cosh r a + sinh r a†`.
///
/// The amplified quadrature (called p in reports) gains `e^r`.
///
/// Evaluates `r_grid` (default: [`default_r_grid`]), then refines once between
/// the neighbours of the best point.
pub fn optimize_squeeze_fidelity(
    rho_v1: &QuantumState,
    input: &QuantumState,
    r_grid: Option<&[f64]>,
) -> Result<SqueezeFitResult> {
    let grid: Vec<f64> = match r_grid {
        Some(g) => g.to_vec(),
        None => default_r_grid(),
    };
    if grid.is_empty() || grid.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidParameter("r grid must be non-empty and finite".into()));
    }
    let family = TargetFamily::new(input, rho_v1.dim())?;
    let eval = |r: f64| overlap(rho_v1, &family.amplitudes(r));
    let mut curve: Vec<(f64, f64)> = grid.par_iter().map(|&r| (r, eval(r))).collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    let best = argmax(&curve);
    if curve.len() > 1 && (best == 0 || best == curve.len() - 1) && curve[best].0 != 0.0 {
        log::warn!("squeezing fit peaks at the edge of the r grid (r = {}); consider extending it", curve[best].0);
    }
    if curve.len() > 2 {
        let lo = curve[best.saturating_sub(1)].0;
        let hi = curve[(best + 1).min(curve.len() - 1)].0;
        let fine: Vec<(f64, f64)> = (1..REFINE_POINTS - 1)
            .into_par_iter()
            .map(|i| {
                let r = lo + (hi - lo) * i as f64 / (REFINE_POINTS - 1) as f64;
                (r, eval(r))
            })
            .collect();
        curve.extend(fine);
        curve.sort_by(|a, b| a.0.total_cmp(&b.0));
        curve.dedup_by(|a, b| a.0 == b.0);
    }
    let best = argmax(&curve);
    Ok(SqueezeFitResult { best_r: curve[best].0, best_fidelity: curve[best].1, fidelity_curve: curve })
}

fn argmax(curve: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (i, c) in curve.iter().enumerate() {
        if c.1 > curve[best].1 {
            best = i;
        }
    }
    best
}

/// Per-point summary written by sweeps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricBundle {
    pub n1: f64,
    pub n2: f64,
    pub ratio: Option<f64>,
    pub purity: Option<f64>,
    pub best_fidelity: Option<f64>,
    pub p_gain: Option<f64>,
}

impl MetricBundle {
    pub fn from_spectrum(spectrum: &ModeSpectrum) -> Self {
        let (n1, n2) = (spectrum.n1(), spectrum.n2());
        let ratio = if spectrum.seeded.is_empty() { None } else { Some(n1 / (n1 + n2)) };
        Self { n1, n2, ratio, ..Self::default() }
    }

    pub fn with_state(mut self, rho_v1: &QuantumState, fit: Option<&SqueezeFitResult>) -> Self {
        self.purity = Some(rho_v1.purity());
        if let Some(f) = fit {
            self.best_fidelity = Some(f.best_fidelity);
            self.p_gain = Some(f.p_gain());
        }
        self
    }
}
