//! First-order coherence of the output field and its mode decomposition.
//!
//! With `f̃ = A ũ`, `g̃ = B ũ*` and input moments `n = ⟨a_u† a_u⟩`,
//! `m = ⟨a_u a_u⟩`, the `dt`-weighted coherence matrix is
//!
//! `G₁ = n f̃* f̃ᵀ + m* f̃* g̃ᵀ + m g̃* f̃ᵀ + n g̃* g̃ᵀ + B* Bᵀ`.
//!
//! The last term is independent of the input state; the rest has rank at most two.

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::BogoliubovKernels;
use crate::kernel::{EigenMode, HermitianKernel};
use crate::linalg::{self, CMat};
use crate::mode::{orthogonal_complement, ModeFunction};
use crate::state::QuantumState;
use crate::{Error, Result, C64};

/// Relative occupation below which a mode counts as empty.
pub const OCCUPATION_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputMoments {
    pub n: f64,
    pub m: C64,
}

impl InputMoments {
    pub fn new(n: f64, m: C64) -> Result<Self> {
        if !(n >= 0.0) {
            return Err(Error::InvalidParameter(format!("⟨a†a⟩ must be non-negative, got {n}")));
        }
        let bound = (n * (n + 1.0)).sqrt();
        if m.norm() > bound * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::InvalidParameter(format!("|⟨aa⟩| = {} exceeds √(n(n+1)) = {bound}", m.norm())));
        }
        Ok(Self { n, m })
    }

    pub fn vacuum() -> Self {
        Self { n: 0.0, m: C64::new(0.0, 0.0) }
    }
}

/// `(n, m)` of a Fock-basis state; warns when the truncation edge is populated.
pub fn input_moments(state: &QuantumState) -> Result<InputMoments> {
    let top = state.top_population(2);
    if top > 1e-4 {
        log::warn!("top two Fock levels hold {top:.2e} of the population; moments may be truncated");
    }
    InputMoments::new(state.mean_photon_number(), state.mean_aa())
}

/// `(holds, |n − |m|| / n)`.
pub fn single_mode_condition(moments: &InputMoments) -> (bool, f64) {
    let dev = (moments.n - moments.m.norm()).abs() / moments.n.max(1e-12);
    (dev < 1e-6, dev)
}

#[derive(Clone, Debug)]
pub struct Occupied {
    pub occupation: f64,
    pub mode: ModeFunction,
}

#[derive(Clone, Debug)]
pub struct ModeSpectrum {
    /// At most two positive, input-dependent occupations, descending.
    pub seeded: Vec<Occupied>,
    /// Squeezed-vacuum occupations above the threshold, descending.
    pub vacuum: Vec<Occupied>,
    /// Sum of seeded eigenvalues not listed (negative or below threshold).
    pub seeded_remainder: f64,
    /// Sum of vacuum eigenvalues below the threshold.
    pub vacuum_remainder: f64,
    /// `dt`-trace of the full coherence function.
    pub total: f64,
}

impl ModeSpectrum {
    pub fn seeded_total(&self) -> f64 {
        self.seeded.iter().map(|o| o.occupation).sum()
    }

    pub fn vacuum_total(&self) -> f64 {
        self.vacuum.iter().map(|o| o.occupation).sum()
    }

    pub fn n1(&self) -> f64 {
        self.seeded.first().map(|o| o.occupation).unwrap_or(0.0)
    }

    pub fn n2(&self) -> f64 {
        self.seeded.get(1).map(|o| o.occupation).unwrap_or(0.0)
    }
}

/// `(f̃, g̃) = (A ũ, B ũ*)`.
fn seeds(k: &BogoliubovKernels, u: &ModeFunction) -> Result<(Vec<C64>, Vec<C64>)> {
    let (u, _) = u.normalize()?;
    k.forward(&u)
}

/// `dt`-weighted input-dependent part of `G₁`.
fn seeded_matrix(f: &[C64], g: &[C64], mo: &InputMoments) -> CMat {
    let n = f.len();
    let (nn, m) = (mo.n, mo.m);
    Mat::from_fn(n, n, |i, j| {
        let (fi, gi, fj, gj) = (f[i].conj(), g[i].conj(), f[j], g[j]);
        fi * fj * nn + fi * gj * m.conj() + gi * fj * m + gi * gj * nn
    })
}

/// `dt`-weighted vacuum term `B* Bᵀ`.
pub fn vacuum_matrix(k: &BogoliubovKernels) -> CMat {
    let bc = linalg::conj(k.b().as_ref());
    &bc * k.b().transpose()
}

pub fn g1_total(k: &BogoliubovKernels, u: &ModeFunction, moments: &InputMoments) -> Result<HermitianKernel> {
    k.grid().ensure_same(u.grid())?;
    let (f, g) = seeds(k, u)?;
    let total = seeded_matrix(&f, &g, moments) + vacuum_matrix(k);
    HermitianKernel::from_discrete(*k.grid(), total)
}

pub fn g1_vacuum(k: &BogoliubovKernels) -> Result<HermitianKernel> {
    HermitianKernel::from_discrete(*k.grid(), vacuum_matrix(k))
}

/// Seeded/vacuum split by full eigendecomposition of `G₁ − B*Bᵀ` and `B*Bᵀ`.
pub fn seeded_vacuum_split(k: &BogoliubovKernels, u: &ModeFunction, moments: &InputMoments) -> Result<ModeSpectrum> {
    k.grid().ensure_same(u.grid())?;
    let grid = *k.grid();
    let (f, g) = seeds(k, u)?;
    let vac = vacuum_matrix(k);
    let full = seeded_matrix(&f, &g, moments) + &vac;
    let total = trace_re(&full);
    let seeded = HermitianKernel::from_discrete(grid, &full - &vac)?.eigendecompose_signed()?;
    let vacuum = HermitianKernel::from_discrete(grid, vac)?.eigendecompose()?;
    assemble(seeded, vacuum, total)
}

/// Seeded modes only, from the two-dimensional span of `f̃*` and `g̃*`.
///
/// Agrees with [`seeded_vacuum_split`] on the seeded list; the vacuum list is empty.
pub fn seeded_spectrum(k: &BogoliubovKernels, u: &ModeFunction, moments: &InputMoments) -> Result<ModeSpectrum> {
    k.grid().ensure_same(u.grid())?;
    let grid = *k.grid();
    let (f, g) = seeds(k, u)?;
    let fc: Vec<C64> = f.iter().map(|x| x.conj()).collect();
    let gc: Vec<C64> = g.iter().map(|x| x.conj()).collect();
    let vac_trace = k.b().norm_l2().powi(2);
    let seeded_trace = moments.n * (linalg::norm(&f).powi(2) + linalg::norm(&g).powi(2))
        + 2.0 * (moments.m.conj() * linalg::dot_conj(&f, &gc).conj()).re;
    let total = seeded_trace + vac_trace;

    // Orthonormal basis of span{f̃*, g̃*} in plain Euclidean terms.
    let mut basis: Vec<ModeFunction> = Vec::new();
    for v in [&fc, &gc] {
        if linalg::norm(v) == 0.0 {
            continue;
        }
        let m = ModeFunction::from_discrete(grid, v)?;
        let refs: Vec<&ModeFunction> = basis.iter().collect();
        if let Some(c) = orthogonal_complement(&m, &refs)?.into_mode() {
            basis.push(c);
        }
    }
    let seeded = if basis.is_empty() {
        Vec::new()
    } else {
        // M = X* C Xᵀ restricted: M_ab = q_a† M q_b.
        let q: Vec<Vec<C64>> = basis.iter().map(|b| b.discrete()).collect();
        let proj = |v: &[C64], w: &[C64]| linalg::dot_conj(v, w);
        let pf: Vec<C64> = q.iter().map(|qa| proj(qa, &fc)).collect();
        let pg: Vec<C64> = q.iter().map(|qa| proj(qa, &gc)).collect();
        let r = q.len();
        let (nn, m) = (moments.n, moments.m);
        // Entry (i, j) of M is n f_i* f_j + m* f_i* g_j + m g_i* f_j + n g_i* g_j with f* = fc.
        let small = Mat::from_fn(r, r, |a, b| {
            let (fa, ga) = (pf[a], pg[a]);
            let (fb, gb) = (pf[b].conj(), pg[b].conj());
            fa * fb * nn + fa * gb * m.conj() + ga * fb * m + ga * gb * nn
        });
        let (small, _) = linalg::hermitian_part(small.as_ref());
        let (vals, vecs) = linalg::hermitian_eigen(small.as_ref())?;
        let mut out = Vec::new();
        for (c, &value) in vals.iter().enumerate() {
            let mut v = vec![C64::new(0.0, 0.0); grid.n_points()];
            for (a, qa) in q.iter().enumerate() {
                for (x, y) in v.iter_mut().zip(qa) {
                    *x += vecs[(a, c)] * y;
                }
            }
            // Kernel convention: modes are conjugated eigenvectors.
            let v: Vec<C64> = v.iter().map(|x| x.conj()).collect();
            out.push(EigenMode { value, mode: ModeFunction::from_discrete(grid, &crate::kernel::gauge(v))? });
        }
        out
    };
    let mut s = assemble(seeded, Vec::new(), total)?;
    s.vacuum_remainder = vac_trace;
    Ok(s)
}

fn trace_re(m: &CMat) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

fn assemble(seeded: Vec<EigenMode>, vacuum: Vec<EigenMode>, total: f64) -> Result<ModeSpectrum> {
    let cut = OCCUPATION_THRESHOLD * total.abs();
    let significant = seeded.iter().filter(|e| e.value.abs() > cut).count();
    if significant > 2 {
        let vals: Vec<f64> = seeded.iter().take(4).map(|e| e.value).collect();
        return Err(Error::TheoryViolation(format!(
            "{significant} significant seeded eigenvalues (leading {vals:?}); expected at most 2"
        )));
    }
    let mut out = ModeSpectrum { seeded: Vec::new(), vacuum: Vec::new(), seeded_remainder: 0.0, vacuum_remainder: 0.0, total };
    for e in seeded {
        if e.value > cut && out.seeded.len() < 2 {
            out.seeded.push(Occupied { occupation: e.value, mode: e.mode });
        } else {
            out.seeded_remainder += e.value;
        }
    }
    for e in vacuum {
        if e.value > cut {
            out.vacuum.push(Occupied { occupation: e.value, mode: e.mode });
        } else {
            out.vacuum_remainder += e.value;
        }
    }
    Ok(out)
}

/// `n₁ / (n₁ + n₂)`.
pub fn occupation_ratio(spectrum: &ModeSpectrum) -> Result<f64> {
    let n1 = spectrum.seeded.first().ok_or(Error::NoSeededModes)?.occupation;
    Ok(n1 / (n1 + spectrum.n2()))
}
