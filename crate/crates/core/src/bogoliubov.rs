//! Kernel pairs `(F, G)` with `a_out = F a + G* a†`, their algebra and diagnostics.
//!
//! Internally the pair is held as the dimensionless matrices `A = F dt` and
//! `B = G* dt`, acting on the `√dt`-scaled field samples. In that form the
//! bosonic commutator is preserved iff `AA† − BB† = I` and `ABᵀ = BAᵀ`.

use std::io::{Read, Write};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::grid::TemporalGrid;
use crate::linalg::{self, CMat};
use crate::mode::ModeFunction;
use crate::{Error, Result, C64};

/// Compositions between symplectic re-projections in a chain.
pub const RESYMPLECTIZE_EVERY: usize = 50;

const BINARY_MAGIC: &[u8; 8] = b"PSQKERN1";

#[derive(Clone, Debug)]
pub struct BogoliubovKernels {
    grid: TemporalGrid,
    a: CMat,
    b: CMat,
}

/// Frobenius residuals of the two symplectic conditions, relative to `‖AA†‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymplecticReport {
    pub unitarity: f64,
    pub cross: f64,
}

impl SymplecticReport {
    pub fn max(&self) -> f64 {
        self.unitarity.max(self.cross)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.unitarity < tol && self.cross < tol
    }
}

/// Input modes feeding an output mode: `a_v = ζ a_f + ξ a_g†`.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub zeta: f64,
    pub f: ModeFunction,
    pub xi: f64,
    /// Absent when `ξ = 0`.
    pub g: Option<ModeFunction>,
}

impl BogoliubovKernels {
    /// From `A = F dt` and `B = G* dt`.
    pub fn from_discrete(grid: TemporalGrid, a: CMat, b: CMat) -> Result<Self> {
        let n = grid.n_points();
        for (name, m) in [("A", &a), ("B", &b)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::GridMismatch(format!(
                    "{name} is {}x{}, grid has {n} points",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self { grid, a, b })
    }

    /// From continuum kernels `F(x, x')` and `G(x, x')`.
    pub fn from_continuum(grid: TemporalGrid, f: &CMat, g: &CMat) -> Result<Self> {
        let dt = grid.dt();
        let a = linalg::scale(f.as_ref(), dt);
        let b = Mat::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)].conj() * dt);
        Self::from_discrete(grid, a, b)
    }

    pub fn grid(&self) -> &TemporalGrid {
        &self.grid
    }

    /// `F dt`
    pub fn a(&self) -> &CMat {
        &self.a
    }

    /// `G* dt`
    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn into_parts(self) -> (TemporalGrid, CMat, CMat) {
        (self.grid, self.a, self.b)
    }

    pub fn f(&self) -> CMat {
        linalg::scale(self.a.as_ref(), 1.0 / self.grid.dt())
    }

    pub fn g(&self) -> CMat {
        let inv = 1.0 / self.grid.dt();
        Mat::from_fn(self.b.nrows(), self.b.ncols(), |i, j| self.b[(i, j)].conj() * inv)
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points()
    }

    pub fn is_dispersive(&self) -> bool {
        linalg::max_abs(self.b.as_ref()) == 0.0
    }

    /// Apply to the annihilation-operator coefficients of a mode: `(A ũ, B ũ*)`.
    pub fn forward(&self, u: &ModeFunction) -> Result<(Vec<C64>, Vec<C64>)> {
        self.grid.ensure_same(u.grid())?;
        let ut = u.discrete();
        let uc: Vec<C64> = ut.iter().map(|x| x.conj()).collect();
        Ok((linalg::mat_vec(self.a.as_ref(), &ut), linalg::mat_vec(self.b.as_ref(), &uc)))
    }

    /// Structured product `(A₂, B₂)(A₁, B₁) = (A₂A₁ + B₂B₁*, A₂B₁ + B₂A₁*)`.
    fn product(a2: &CMat, b2: &CMat, a1: &CMat, b1: &CMat) -> (CMat, CMat) {
        let a1c = linalg::conj(a1.as_ref());
        let b1c = linalg::conj(b1.as_ref());
        let a = a2 * a1 + b2 * &b1c;
        let b = a2 * b1 + b2 * &a1c;
        (a, b)
    }

    /// Relative deviation of the stored matrices from the symplectic manifold.
    pub fn verify_symplectic(&self) -> SymplecticReport {
        let aa = &self.a * self.a.adjoint();
        let bb = &self.b * self.b.adjoint();
        let scale = aa.norm_l2().max(f64::MIN_POSITIVE);
        let n = self.n_points();
        let mut d1 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                d1 += (aa[(i, j)] - bb[(i, j)] - id).norm_sqr();
            }
        }
        let m = &self.a * self.b.transpose();
        let mut d2 = 0.0;
        for j in 0..n {
            for i in 0..n {
                d2 += (m[(i, j)] - m[(j, i)]).norm_sqr();
            }
        }
        SymplecticReport { unitarity: d1.sqrt() / scale, cross: d2.sqrt() / scale }
    }

    /// Project back onto the symplectic manifold: `S ← S (S♯S)^{-1/2}`.
    ///
    /// `S♯ = Σ S† Σ` with `Σ = diag(I, −I)`; the inverse square root uses the
    /// series `I − E/2 + 3E²/8` with `E = S♯S − I`.
    pub fn resymplectize(&self) -> BogoliubovKernels {
        let n = self.n_points();
        let ad = self.a.adjoint().to_owned();
        let bt = -self.b.transpose().to_owned();
        let (mut ea, eb) = Self::product(&ad, &bt, &self.a, &self.b);
        for i in 0..n {
            ea[(i, i)] -= C64::new(1.0, 0.0);
        }
        let size = ea.norm_l2() + eb.norm_l2();
        let (mut ya, mut yb) = (linalg::scale(ea.as_ref(), -0.5), linalg::scale(eb.as_ref(), -0.5));
        if size > 1e-6 {
            let (e2a, e2b) = Self::product(&ea, &eb, &ea, &eb);
            ya = ya + linalg::scale(e2a.as_ref(), 0.375);
            yb = yb + linalg::scale(e2b.as_ref(), 0.375);
        }
        for i in 0..n {
            ya[(i, i)] += C64::new(1.0, 0.0);
        }
        let (a, b) = Self::product(&self.a, &self.b, &ya, &yb);
        BogoliubovKernels { grid: self.grid, a, b }
    }

    /// Continuum kernels serialized as grid + row-major `[re, im]` pairs.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&KernelFile::from_kernels(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<KernelFile>(s)?.into_kernels()
    }

    /// Little-endian binary container: magic, grid, then `F` and `G` row-major.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&self.grid.t_start().to_le_bytes())?;
        w.write_all(&self.grid.t_end().to_le_bytes())?;
        w.write_all(&(self.grid.n_points() as u64).to_le_bytes())?;
        for m in [self.f(), self.g()] {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    w.write_all(&m[(i, j)].re.to_le_bytes())?;
                    w.write_all(&m[(i, j)].im.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::InvalidParameter("not a kernel file".into()));
        }
        let mut buf = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut buf)?;
            Ok(buf)
        };
        let t_start = f64::from_le_bytes(next(&mut r)?);
        let t_end = f64::from_le_bytes(next(&mut r)?);
        let n = u64::from_le_bytes(next(&mut r)?) as usize;
        let grid = TemporalGrid::new(t_start, t_end, n)?;
        let mut mats = Vec::with_capacity(2);
        for _ in 0..2 {
            let mut m = Mat::<C64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let re = f64::from_le_bytes(next(&mut r)?);
                    let im = f64::from_le_bytes(next(&mut r)?);
                    m[(i, j)] = C64::new(re, im);
                }
            }
            mats.push(m);
        }
        Self::from_continuum(grid, &mats[0], &mats[1])
    }
}

#[derive(Serialize, Deserialize)]
struct KernelFile {
    grid: TemporalGrid,
    f: Vec<[f64; 2]>,
    g: Vec<[f64; 2]>,
}

impl KernelFile {
    fn from_kernels(k: &BogoliubovKernels) -> Self {
        let flat = |m: CMat| {
            let mut v = Vec::with_capacity(m.nrows() * m.ncols());
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    v.push([m[(i, j)].re, m[(i, j)].im]);
                }
            }
            v
        };
        KernelFile { grid: k.grid, f: flat(k.f()), g: flat(k.g()) }
    }

    fn into_kernels(self) -> Result<BogoliubovKernels> {
        let n = self.grid.n_points();
        if self.f.len() != n * n || self.g.len() != n * n {
            return Err(Error::GridMismatch("kernel file matrix size does not match grid".into()));
        }
        let mat = |v: &[[f64; 2]]| Mat::from_fn(n, n, |i, j| C64::new(v[i * n + j][0], v[i * n + j][1]));
        BogoliubovKernels::from_continuum(self.grid, &mat(&self.f), &mat(&self.g))
    }
}

/// `F = δ`, `G = 0`.
pub fn identity_kernels(grid: TemporalGrid) -> BogoliubovKernels {
    let n = grid.n_points();
    BogoliubovKernels { grid, a: linalg::identity(n), b: Mat::zeros(n, n) }
}

/// Squeezes `mode` as `a → cosh r a + sinh r a†`; orthogonal modes pass through.
pub fn ideal_squeezer_kernels(grid: TemporalGrid, mode: &ModeFunction, r: f64) -> Result<BogoliubovKernels> {
    grid.ensure_same(mode.grid())?;
    if !r.is_finite() {
        return Err(Error::InvalidParameter(format!("squeeze parameter must be finite, got {r}")));
    }
    let u = mode.normalize()?.0.discrete();
    let n = grid.n_points();
    let (c, s) = (r.cosh() - 1.0, r.sinh());
    let a = Mat::from_fn(n, n, |i, j| {
        let d = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        d + u[i] * u[j].conj() * c
    });
    let b = Mat::from_fn(n, n, |i, j| u[i] * u[j] * s);
    Ok(BogoliubovKernels { grid, a, b })
}

/// `second ∘ first`: apply `first`, then `second`.
pub fn compose(second: &BogoliubovKernels, first: &BogoliubovKernels) -> Result<BogoliubovKernels> {
    second.grid.ensure_same(&first.grid)?;
    let (a, b) = BogoliubovKernels::product(&second.a, &second.b, &first.a, &first.b);
    Ok(BogoliubovKernels { grid: first.grid, a, b })
}

/// Apply `stages[0]` first, re-projecting every [`RESYMPLECTIZE_EVERY`] compositions.
pub fn compose_chain(stages: &[&BogoliubovKernels]) -> Result<BogoliubovKernels> {
    let (first, rest) = stages
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty composition chain".into()))?;
    let mut acc = (*first).clone();
    for (i, s) in rest.iter().enumerate() {
        acc = compose(s, &acc)?;
        if (i + 1) % RESYMPLECTIZE_EVERY == 0 {
            acc = acc.resymplectize();
        }
    }
    Ok(acc)
}

/// `stage` applied `count` times, by repeated squaring.
///
/// Re-projection happens whenever the represented number of compositions since
/// the last checkpoint reaches [`RESYMPLECTIZE_EVERY`], and once at the end if
/// any composition has occurred since.
pub fn compose_power(stage: &BogoliubovKernels, count: usize) -> Result<BogoliubovKernels> {
    if count == 0 {
        return Err(Error::InvalidParameter("stage count must be at least 1".into()));
    }
    let mut base = stage.clone();
    let mut base_len = 1usize;
    let mut base_fresh = 0usize;
    let mut acc: Option<(BogoliubovKernels, usize)> = None;
    let mut k = count;
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => (base.clone(), base_fresh),
                Some((a, fresh)) => {
                    let mut c = compose(&base, &a)?;
                    let mut f = fresh + base_fresh + 1;
                    if f >= RESYMPLECTIZE_EVERY {
                        c = c.resymplectize();
                        f = 0;
                    }
                    (c, f)
                }
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = compose(&base, &base)?;
        base_fresh = 2 * base_fresh + 1;
        base_len *= 2;
        if base_fresh >= RESYMPLECTIZE_EVERY {
            base = base.resymplectize();
            base_fresh = 0;
        }
    }
    debug_assert!(base_len <= count);
    let (mut out, fresh) = acc.expect("count >= 1");
    if fresh > 0 && count > RESYMPLECTIZE_EVERY {
        out = out.resymplectize();
    }
    Ok(out)
}

pub fn verify_symplectic(k: &BogoliubovKernels) -> SymplecticReport {
    k.verify_symplectic()
}

/// Input modes `f`, `g` and weights `ζ`, `ξ ≥ 0` feeding output mode `v`.
pub fn pullback_output_mode(k: &BogoliubovKernels, v: &ModeFunction) -> Result<Pullback> {
    k.grid.ensure_same(v.grid())?;
    let grid = k.grid;
    let vt = v.discrete();
    let vc: Vec<C64> = vt.iter().map(|x| x.conj()).collect();
    let fa = linalg::adjoint_vec(k.a.as_ref(), &vt);
    let gb = linalg::transpose_vec(k.b.as_ref(), &vc);
    let zeta = linalg::norm(&fa);
    let xi = linalg::norm(&gb);
    if !(zeta > 0.0) {
        return Err(Error::ZeroZeta);
    }
    let f = ModeFunction::from_discrete(grid, &fa.iter().map(|x| x / zeta).collect::<Vec<_>>())?;
    let g = if xi > 0.0 {
        Some(ModeFunction::from_discrete(grid, &gb.iter().map(|x| x / xi).collect::<Vec<_>>())?)
    } else {
        None
    };
    Ok(Pullback { zeta, f, xi, g })
}
