//! Single-mode quantum states and their propagation through a device.

pub mod bloch_messiah;
pub mod charfn;
pub mod decomposition;
pub mod displacement;
pub mod joint;
pub mod wigner;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat};
use crate::{Error, Result, C64};

pub use charfn::{char_of_state, fock_from_char, propagate_char, CharFunction, CharGrid, CharSource, OutputChar};
pub use decomposition::{decompose_output_mode, OutputDecomposition};
pub use wigner::{wigner_from_char, wigner_of_state, WignerGrid};

/// Default Fock truncation.
pub const DEFAULT_DIM: usize = 60;
/// Largest tolerated population beyond the truncation for library states.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// Named input states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Vacuum,
    Fock { n: usize },
    Coherent { re: f64, #[serde(default)] im: f64 },
    EvenCat { re: f64, #[serde(default)] im: f64 },
    /// Squeezed vacuum, `a → cosh r a + sinh r a†` applied to vacuum.
    Squeezed { r: f64 },
}

/// Truncated Fock-basis density matrix.
#[derive(Clone, Debug)]
pub struct QuantumState {
    rho: CMat,
}

impl QuantumState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: CMat) -> Result<Self> {
        let dim = rho.nrows();
        if dim == 0 || rho.ncols() != dim {
            return Err(Error::InvalidParameter("density matrix must be square and non-empty".into()));
        }
        let herm = linalg::max_abs((&rho - rho.adjoint()).as_ref());
        if herm > 1e-10 {
            return Err(Error::NotHermitian { residual: herm });
        }
        let tr: f64 = (0..dim).map(|i| rho[(i, i)].re).sum();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter(format!("density matrix trace is {tr}")));
        }
        let (h, _) = linalg::hermitian_part(rho.as_ref());
        let (vals, _) = linalg::hermitian_eigen(h.as_ref())?;
        if let Some(&min) = vals.last() {
            if min < -1e-8 {
                return Err(Error::Negativity(min));
            }
        }
        Ok(Self { rho: h })
    }

    pub(crate) fn new_unchecked(rho: CMat) -> Self {
        Self { rho }
    }

    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let norm = linalg::norm(psi);
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let n = psi.len();
        let rho = Mat::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Ok(Self { rho })
    }

    pub fn library(spec: &StateSpec, dim: usize) -> Result<Self> {
        Self::from_pure(&library_vector(spec, dim)?)
    }

    pub fn vacuum(dim: usize) -> Self {
        Self::from_pure(&basis(0, dim)).expect("unit vector")
    }

    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        Self::library(&StateSpec::Fock { n }, dim)
    }

    pub fn coherent(alpha: C64, dim: usize) -> Result<Self> {
        Self::library(&StateSpec::Coherent { re: alpha.re, im: alpha.im }, dim)
    }

    pub fn even_cat(alpha: C64, dim: usize) -> Result<Self> {
        Self::library(&StateSpec::EvenCat { re: alpha.re, im: alpha.im }, dim)
    }

    pub fn squeezed_vacuum(r: f64, dim: usize) -> Result<Self> {
        Self::library(&StateSpec::Squeezed { r }, dim)
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &CMat {
        &self.rho
    }

    pub fn population(&self, n: usize) -> f64 {
        if n < self.dim() {
            self.rho[(n, n)].re
        } else {
            0.0
        }
    }

    /// Population in the top `k` Fock levels.
    pub fn top_population(&self, k: usize) -> f64 {
        let d = self.dim();
        (d.saturating_sub(k)..d).map(|i| self.rho[(i, i)].re).sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        (1..self.dim()).map(|i| i as f64 * self.rho[(i, i)].re).sum()
    }

    /// `⟨a⟩`
    pub fn mean_a(&self) -> C64 {
        (1..self.dim()).map(|n| self.rho[(n, n - 1)] * (n as f64).sqrt()).sum()
    }

    /// `⟨a a⟩`
    pub fn mean_aa(&self) -> C64 {
        (2..self.dim()).map(|n| self.rho[(n, n - 2)] * ((n * (n - 1)) as f64).sqrt()).sum()
    }

    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for j in 0..d {
            for i in 0..d {
                s += self.rho[(i, j)].norm_sqr();
            }
        }
        s
    }

    /// Dominant eigenvector, for states whose purity is within `tol` of one.
    pub fn pure_vector(&self, tol: f64) -> Result<Vec<C64>> {
        let p = self.purity();
        if p < 1.0 - tol {
            return Err(Error::MixedTarget(p));
        }
        let (_, v) = linalg::hermitian_eigen(self.rho.as_ref())?;
        Ok(crate::kernel::gauge((0..self.dim()).map(|i| v[(i, 0)]).collect()))
    }

    /// Same state in a different truncation; shrinking requires negligible discarded population.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        let d = self.dim();
        if dim < d {
            let lost: f64 = (dim..d).map(|i| self.rho[(i, i)].re).sum();
            if lost > TAIL_TOLERANCE {
                return Err(Error::Truncation(format!("{lost:.3e} population above level {dim}")));
            }
        }
        let rho = Mat::from_fn(dim, dim, |i, j| if i < d && j < d { self.rho[(i, j)] } else { C64::new(0.0, 0.0) });
        Ok(Self { rho })
    }

    /// Heisenberg map `a → cosh r a + e^{iψ} sinh r a†` applied to the state.
    ///
    /// Computed in an enlarged truncation; errors if the result spills over `out_dim`.
    pub fn squeezed(&self, r: f64, psi: f64, out_dim: usize) -> Result<Self> {
        let work = (self.dim().max(out_dim) + 40 + (60.0 * r.abs()) as usize).min(400);
        let u = squeeze_unitary(r, psi, work)?;
        let rho = self.with_dim(work)?;
        let out = &u * rho.rho() * u.adjoint();
        let lost: f64 = (out_dim..work).map(|i| out[(i, i)].re).sum();
        if lost > TAIL_TOLERANCE {
            return Err(Error::Truncation(format!(
                "squeezed state leaves {lost:.3e} population above level {out_dim}"
            )));
        }
        let mut s = Self { rho: Mat::from_fn(out_dim, out_dim, |i, j| out[(i, j)]) };
        s.renormalize();
        Ok(s)
    }

    pub(crate) fn renormalize(&mut self) {
        let tr: f64 = (0..self.dim()).map(|i| self.rho[(i, i)].re).sum();
        if tr > 0.0 {
            self.rho = linalg::scale(self.rho.as_ref(), 1.0 / tr);
        }
    }
}

fn basis(n: usize, dim: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[n] = C64::new(1.0, 0.0);
    v
}

fn coherent_vector(alpha: C64, dim: usize) -> Vec<C64> {
    let mut v = Vec::with_capacity(dim);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        v.push(c);
    }
    v
}

/// Fock amplitudes of a library state (normalized analytically, not by truncation).
pub fn library_vector(spec: &StateSpec, dim: usize) -> Result<Vec<C64>> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let v = match *spec {
        StateSpec::Vacuum => basis(0, dim),
        StateSpec::Fock { n } => {
            if n >= dim {
                return Err(Error::Truncation(format!("Fock level {n} needs dim > {n}, got {dim}")));
            }
            basis(n, dim)
        }
        StateSpec::Coherent { re, im } => coherent_vector(C64::new(re, im), dim),
        StateSpec::EvenCat { re, im } => {
            let alpha = C64::new(re, im);
            let x = alpha.norm_sqr();
            if x == 0.0 {
                basis(0, dim)
            } else {
                let norm = 1.0 / (2.0 * (1.0 + (-2.0 * x).exp())).sqrt();
                coherent_vector(alpha, dim)
                    .into_iter()
                    .enumerate()
                    .map(|(n, c)| if n % 2 == 0 { c * 2.0 * norm } else { C64::new(0.0, 0.0) })
                    .collect()
            }
        }
        StateSpec::Squeezed { r } => {
            let t = r.tanh();
            let mut v = vec![C64::new(0.0, 0.0); dim];
            let mut c = 1.0 / r.cosh().sqrt();
            for k in 0..dim.div_ceil(2) {
                if k > 0 {
                    // ψ_{2k} = √((2k)!)/(2^k k!) tanhᵏ r / √cosh r
                    c *= t * (((2 * k - 1) * (2 * k)) as f64).sqrt() / (2.0 * k as f64);
                }
                v[2 * k] = C64::new(c, 0.0);
            }
            v
        }
    };
    let kept: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    if 1.0 - kept > TAIL_TOLERANCE {
        return Err(Error::Truncation(format!(
            "{spec:?} has {:.3e} population beyond dim {dim}",
            1.0 - kept
        )));
    }
    Ok(v)
}

/// Hermitian `H` with `exp(−iH)` the squeezer of [`squeeze_unitary`].
pub fn squeeze_generator(r: f64, psi: f64, dim: usize) -> CMat {
    // exp(−iH) = exp(G), G = (r/2)(e^{iψ} a†² − e^{−iψ} a²), so H = iG.
    let e = C64::from_polar(0.5, psi) * r;
    let mut h = Mat::<C64>::zeros(dim, dim);
    for n in 0..dim.saturating_sub(2) {
        let s = (((n + 1) * (n + 2)) as f64).sqrt();
        h[(n + 2, n)] = C64::new(0.0, 1.0) * e * s;
        h[(n, n + 2)] = (C64::new(0.0, 1.0) * e * s).conj();
    }
    h
}

/// Unitary with `U† a U = cosh r a + e^{iψ} sinh r a†`, in a `dim`-level truncation.
pub fn squeeze_unitary(r: f64, psi: f64, dim: usize) -> Result<CMat> {
    let h = squeeze_generator(r, psi, dim);
    let (vals, vecs) = linalg::hermitian_eigen(h.as_ref())?;
    let phases = Mat::from_fn(dim, dim, |i, k| vecs[(i, k)] * C64::from_polar(1.0, -vals[k]));
    Ok(&phases * vecs.adjoint())
}
