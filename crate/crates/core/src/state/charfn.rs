//! Characteristic functions `χ(β) = Tr[ρ D(β)]` and their propagation.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decomposition::OutputDecomposition;
use super::displacement::fill_displacement;
use super::{QuantumState, StateSpec};
use crate::linalg;
use crate::{Error, Result, C64};

/// Boundary magnitude below which a sampled χ counts as decayed.
pub const BOUNDARY_TOLERANCE: f64 = 1e-4;
/// Negative eigenvalues of a reconstructed ρ above this are clamped to zero.
pub const CLAMP_TOLERANCE: f64 = 1e-6;
/// Lattice samples with smaller |χ| are skipped during reconstruction.
pub const NEGLIGIBLE_CHI: f64 = 1e-14;
/// Default largest trace allowed above the truncation in a reconstruction.
pub const MAX_LOST_TRACE: f64 = 1e-3;

/// Anything that can evaluate a characteristic function pointwise.
pub trait CharSource: Sync {
    fn chi(&self, beta: C64) -> C64;
}

impl CharSource for QuantumState {
    fn chi(&self, beta: C64) -> C64 {
        let dim = self.dim();
        let mut d = vec![C64::new(0.0, 0.0); dim * dim];
        fill_displacement(beta, dim, &mut d);
        trace_product(self.rho(), &d, dim)
    }
}

/// Closed forms, independent of any Fock truncation.
impl CharSource for StateSpec {
    fn chi(&self, beta: C64) -> C64 {
        let x = beta.norm_sqr();
        let gauss = (-0.5 * x).exp();
        match *self {
            StateSpec::Vacuum => C64::new(gauss, 0.0),
            StateSpec::Fock { n } => {
                // e^{−x/2} L_n(x)
                let (mut l0, mut l1) = (1.0, 1.0 - x);
                if n == 0 {
                    return C64::new(gauss, 0.0);
                }
                for j in 1..n {
                    let jf = j as f64;
                    let l2 = ((2.0 * jf + 1.0 - x) * l1 - jf * l0) / (jf + 1.0);
                    l0 = l1;
                    l1 = l2;
                }
                C64::new(gauss * l1, 0.0)
            }
            StateSpec::Coherent { re, im } => {
                let a = C64::new(re, im);
                (beta * a.conj() - beta.conj() * a).exp() * gauss
            }
            StateSpec::EvenCat { re, im } => {
                let a = C64::new(re, im);
                if a.norm_sqr() == 0.0 {
                    return C64::new(gauss, 0.0);
                }
                // ⟨γ|D(β)|δ⟩ = ⟨γ|β + δ⟩ e^{(βδ* − β*δ)/2}
                let element = |g: C64, d: C64| {
                    let e = beta + d;
                    let ln = -0.5 * g.norm_sqr() - 0.5 * e.norm_sqr() + g.conj() * e + 0.5 * (beta * d.conj() - beta.conj() * d);
                    ln.exp()
                };
                let norm2 = 1.0 / (2.0 * (1.0 + (-2.0 * a.norm_sqr()).exp()));
                (element(a, a) + element(a, -a) + element(-a, a) + element(-a, -a)) * norm2
            }
            StateSpec::Squeezed { r } => {
                let mu = beta * r.cosh() - beta.conj() * r.sinh();
                C64::new((-0.5 * mu.norm_sqr()).exp(), 0.0)
            }
        }
    }
}

/// `Tr[ρ D] = Σ ρ_{nm} D_{mn}` with `D` row-major.
fn trace_product(rho: &Mat<C64>, d: &[C64], dim: usize) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for n in 0..dim {
        let col = rho.col(n);
        for m in 0..dim {
            s += col[m] * d[n * dim + m];
        }
    }
    s
}

/// Square sampling grid `β_re, β_im ∈ [−extent, extent]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharGrid {
    pub extent: f64,
    pub n_side: usize,
}

impl Default for CharGrid {
    fn default() -> Self {
        Self { extent: 6.0, n_side: 129 }
    }
}

impl CharGrid {
    pub fn new(extent: f64, n_side: usize) -> Result<Self> {
        if !(extent > 0.0) || n_side < 3 {
            return Err(Error::InvalidParameter(format!("bad char grid: extent {extent}, {n_side} points")));
        }
        Ok(Self { extent, n_side })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.n_side - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing()
    }

    /// Point for column `j` (real part) and row `i` (imaginary part).
    pub fn beta(&self, i: usize, j: usize) -> C64 {
        C64::new(self.coord(j), self.coord(i))
    }

    /// Grid with the same spacing (odd point count) reaching at least `extent`.
    pub fn widened(&self, extent: f64) -> CharGrid {
        let h = self.spacing();
        let half = (extent / h).ceil() as usize;
        CharGrid { extent: half as f64 * h, n_side: 2 * half + 1 }
    }
}

/// Sampled characteristic function.
#[derive(Clone, Debug)]
pub struct CharFunction {
    grid: CharGrid,
    /// Row-major, `values[i * n + j] = χ(coord(j) + i·coord(i))`.
    values: Vec<C64>,
}

impl CharFunction {
    pub fn sample(source: &dyn CharSource, grid: CharGrid) -> Self {
        let n = grid.n_side;
        let rows: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| source.chi(grid.beta(i, j))).collect())
            .collect();
        Self { grid, values: rows.concat() }
    }

    /// Sample on `grid`, widening it until the boundary has decayed below [`BOUNDARY_TOLERANCE`].
    pub fn sample_auto(source: &dyn CharSource, grid: CharGrid, max_extent: f64) -> Result<Self> {
        let mut g = grid;
        loop {
            let c = Self::sample(source, g);
            let b = c.boundary_max();
            if b < BOUNDARY_TOLERANCE {
                return Ok(c);
            }
            if g.extent >= max_extent {
                log::warn!("characteristic function still {b:.2e} at |β| = {:.2}", g.extent);
                return Ok(c);
            }
            g = g.widened((g.extent * 1.5).min(max_extent));
        }
    }

    pub fn from_values(grid: CharGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n_side * grid.n_side {
            return Err(Error::InvalidParameter("value count does not match char grid".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &CharGrid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.grid.n_side + j]
    }

    pub fn boundary_max(&self) -> f64 {
        let n = self.grid.n_side;
        let mut m = 0.0f64;
        for k in 0..n {
            for &(i, j) in &[(0, k), (n - 1, k), (k, 0), (k, n - 1)] {
                m = m.max(self.at(i, j).norm());
            }
        }
        m
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, beta: C64) -> Option<C64> {
        let g = &self.grid;
        let h = g.spacing();
        let x = (beta.re + g.extent) / h;
        let y = (beta.im + g.extent) / h;
        let last = (g.n_side - 1) as f64;
        if !(0.0..=last).contains(&x) || !(0.0..=last).contains(&y) {
            return None;
        }
        let j = (x.floor() as usize).min(g.n_side - 2);
        let i = (y.floor() as usize).min(g.n_side - 2);
        let (fx, fy) = (x - j as f64, y - i as f64);
        Some(
            self.at(i, j) * ((1.0 - fx) * (1.0 - fy))
                + self.at(i, j + 1) * (fx * (1.0 - fy))
                + self.at(i + 1, j) * ((1.0 - fx) * fy)
                + self.at(i + 1, j + 1) * (fx * fy),
        )
    }

    /// `(1/π) ∫ |χ|² d²β` by the rectangle rule.
    pub fn purity(&self) -> f64 {
        let h = self.grid.spacing();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h * h / std::f64::consts::PI
    }
}

impl CharSource for CharFunction {
    /// Interpolated inside the grid, zero outside.
    fn chi(&self, beta: C64) -> C64 {
        self.interpolate(beta).unwrap_or(C64::new(0.0, 0.0))
    }
}

/// `χ` of an output mode built from the input mode's `χ_u`:
/// `χ_u(βA* − β*B) · exp(−|βC* − β*D|²/2) · exp(−|βE*|²/2)`.
pub struct OutputChar<'a> {
    pub coefficients: [C64; 5],
    pub input: &'a dyn CharSource,
}

impl<'a> OutputChar<'a> {
    pub fn new(decomp: &OutputDecomposition, input: &'a dyn CharSource) -> Self {
        Self { coefficients: decomp.coefficients(), input }
    }

    /// Argument passed to the input characteristic function.
    pub fn mu_u(&self, beta: C64) -> C64 {
        let [a, b, ..] = self.coefficients;
        beta * a.conj() - beta.conj() * b
    }

    fn vacuum_factor(&self, beta: C64) -> f64 {
        let [_, _, c, d, e] = self.coefficients;
        let mk = beta * c.conj() - beta.conj() * d;
        let ms = beta * e.conj();
        (-0.5 * (mk.norm_sqr() + ms.norm_sqr())).exp()
    }
}

impl CharSource for OutputChar<'_> {
    fn chi(&self, beta: C64) -> C64 {
        let g = self.vacuum_factor(beta);
        if g == 0.0 {
            return C64::new(0.0, 0.0);
        }
        self.input.chi(self.mu_u(beta)) * g
    }
}

pub fn char_of_state(state: &QuantumState, grid: CharGrid) -> CharFunction {
    let c = CharFunction::sample(state, grid);
    let b = c.boundary_max();
    if b > BOUNDARY_TOLERANCE {
        log::warn!("characteristic function is {b:.2e} at the grid boundary; enlarge the grid");
    }
    c
}

/// Output-mode χ on the input grid, interpolating the sampled `χ_u` bilinearly.
pub fn propagate_char(decomp: &OutputDecomposition, chi_u: &CharFunction) -> Result<CharFunction> {
    let out = OutputChar::new(decomp, chi_u);
    let grid = chi_u.grid;
    let edge = chi_u.boundary_max();
    let n = grid.n_side;
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let beta = grid.beta(i, j);
            let mu = out.mu_u(beta);
            let inside = chi_u.interpolate(mu);
            let v = match inside {
                Some(x) => x * out.vacuum_factor(beta),
                None => {
                    if edge * out.vacuum_factor(beta) > BOUNDARY_TOLERANCE {
                        return Err(Error::GridExtent(format!(
                            "mapped point {mu:.3} leaves the input grid where χ is not negligible"
                        )));
                    }
                    C64::new(0.0, 0.0)
                }
            };
            values.push(v);
        }
    }
    Ok(CharFunction { grid, values })
}

/// Rectangle-rule lattice used to invert a characteristic function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub extent: f64,
    pub spacing: f64,
}

impl Quadrature {
    /// Lattice fine enough to resolve Fock levels below `dim` without aliasing,
    /// wide enough for their displacement matrix elements to have decayed.
    pub fn for_dim(dim: usize) -> Self {
        let r = (dim as f64).sqrt();
        let spacing = (std::f64::consts::PI / (2.2 * (2.0 * r + 4.0))).min(0.1);
        Self { extent: 2.0 * r + 6.0, spacing }
    }
}

/// `ρ_{mn} = (1/π) ∫ χ(β) ⟨m|D(−β)|n⟩ d²β`, renormalized and positivity-clamped.
pub fn fock_from_char(chi: &CharFunction, dim: usize) -> Result<QuantumState> {
    let grid = chi.grid;
    let h = grid.spacing();
    let n = grid.n_side;
    let samples = (0..n).map(|i| (0..n).map(move |j| (i, j)));
    let rows: Vec<Vec<(C64, C64)>> =
        samples.map(|row| row.map(|(i, j)| (grid.beta(i, j), chi.at(i, j))).collect()).collect();
    let rho = accumulate_rows(&rows, dim, h * h);
    finish_reconstruction(rho, dim, MAX_LOST_TRACE)
}

/// As [`fock_from_char`], evaluating `source` exactly on a lattice chosen for `dim`.
pub fn fock_from_source(source: &dyn CharSource, dim: usize, quad: Option<Quadrature>) -> Result<QuantumState> {
    fock_from_source_within(source, dim, quad, MAX_LOST_TRACE)
}

/// As [`fock_from_source`], failing with [`Error::Truncation`] when more than
/// `max_lost` of the trace lies above the truncation.
pub fn fock_from_source_within(
    source: &dyn CharSource,
    dim: usize,
    quad: Option<Quadrature>,
    max_lost: f64,
) -> Result<QuantumState> {
    let q = quad.unwrap_or_else(|| Quadrature::for_dim(dim));
    let half = (q.extent / q.spacing).ceil() as i64;
    let h = q.spacing;
    // Only the upper half-plane is sampled; χ(−β) = χ(β)* supplies the rest.
    let rows: Vec<Vec<(C64, C64)>> = (0..=half)
        .into_par_iter()
        .map(|i| {
            let jr: Box<dyn Iterator<Item = i64>> = if i == 0 { Box::new(0..=half) } else { Box::new(-half..=half) };
            jr.map(|j| {
                let beta = C64::new(j as f64 * h, i as f64 * h);
                let w = if i == 0 && j == 0 { 0.5 } else { 1.0 };
                (beta, source.chi(beta) * w)
            })
            .collect()
        })
        .collect();
    let half_rho = accumulate_rows(&rows, dim, h * h);
    // Contribution of −β: χ(β)* ⟨m|D(β)|n⟩ = conj of the +β term transposed.
    let rho = Mat::from_fn(dim, dim, |m, k| half_rho[(m, k)] + half_rho[(k, m)].conj());
    finish_reconstruction(rho, dim, max_lost)
}

/// `Σ w χ(β) ⟨m|D(−β)|n⟩ / π` over samples, summed row by row in a fixed order.
fn accumulate_rows(rows: &[Vec<(C64, C64)>], dim: usize, weight: f64) -> Mat<C64> {
    let partial: Vec<Vec<C64>> = rows
        .par_iter()
        .map(|row| {
            let mut acc = vec![C64::new(0.0, 0.0); dim * dim];
            let mut d = vec![C64::new(0.0, 0.0); dim * dim];
            for &(beta, chi) in row {
                if chi.norm() < NEGLIGIBLE_CHI {
                    continue;
                }
                fill_displacement(-beta, dim, &mut d);
                for (a, x) in acc.iter_mut().zip(&d) {
                    *a += chi * x;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![C64::new(0.0, 0.0); dim * dim];
    for p in &partial {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    let s = weight / std::f64::consts::PI;
    Mat::from_fn(dim, dim, |m, n| total[m * dim + n] * s)
}

fn finish_reconstruction(rho: Mat<C64>, dim: usize, max_lost: f64) -> Result<QuantumState> {
    let (h, _) = linalg::hermitian_part(rho.as_ref());
    let tr: f64 = (0..dim).map(|i| h[(i, i)].re).sum();
    if !(tr > 0.0) {
        return Err(Error::Numerical(format!("reconstructed trace {tr}")));
    }
    if 1.0 - tr > max_lost {
        return Err(Error::Truncation(format!(
            "reconstruction in {dim} levels captures only {tr:.6} of the trace"
        )));
    }
    if (1.0 - tr).abs() > 1e-6 && max_lost > 1e-6 {
        log::warn!("reconstructed trace {tr:.8} before renormalization");
    }
    let h = linalg::scale(h.as_ref(), 1.0 / tr);
    let (vals, vecs) = linalg::hermitian_eigen(h.as_ref())?;
    let min = vals.last().copied().unwrap_or(0.0);
    if min < -CLAMP_TOLERANCE {
        return Err(Error::Negativity(min));
    }
    let clamped: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    let scaled = Mat::from_fn(dim, dim, |i, k| vecs[(i, k)] * (clamped[k] / total));
    let out = &scaled * vecs.adjoint();
    let (out, _) = linalg::hermitian_part(out.as_ref());
    Ok(QuantumState::new_unchecked(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::StateSpec;

    #[test]
    fn vacuum_fock_coherent_closed_forms() {
        let vac = QuantumState::vacuum(10);
        let one = QuantumState::fock(1, 10).unwrap();
        let alpha = C64::new(0.8, -0.5);
        let coh = QuantumState::coherent(alpha, 40).unwrap();
        for &b in &[C64::new(0.0, 0.0), C64::new(0.7, 0.2), C64::new(-1.5, 2.0), C64::new(3.0, -1.0)] {
            let g = (-0.5 * b.norm_sqr()).exp();
            assert!((vac.chi(b) - g).norm() < 1e-12);
            assert!((one.chi(b) - g * (1.0 - b.norm_sqr())).norm() < 1e-12);
            let want = g * (b * alpha.conj() - b.conj() * alpha).exp();
            assert!((coh.chi(b) - want).norm() < 1e-10);
        }
    }

    #[test]
    fn sampled_invariants() {
        let cat = QuantumState::library(&StateSpec::EvenCat { re: 1.2, im: 0.3 }, 30).unwrap();
        let c = char_of_state(&cat, CharGrid::new(6.0, 65).unwrap());
        let n = c.grid().n_side;
        assert!((c.at(n / 2, n / 2) - 1.0).norm() < 1e-9);
        for i in 0..n {
            for j in 0..n {
                assert!((c.at(n - 1 - i, n - 1 - j) - c.at(i, j).conj()).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn round_trip_vacuum_and_fock() {
        let grid = CharGrid::default();
        for (state, tol) in [(QuantumState::vacuum(8), 1e-6), (QuantumState::fock(1, 8).unwrap(), 1e-5)] {
            let c = char_of_state(&state, grid);
            let back = fock_from_char(&c, 8).unwrap();
            assert!(linalg::max_abs((back.rho() - state.rho()).as_ref()) < tol);
            let again = char_of_state(&back, grid);
            let sup = c.values().iter().zip(again.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(sup < 1e-5, "{sup}");
        }
    }

    #[test]
    fn closed_forms_match_fock_basis() {
        let specs = [
            StateSpec::Vacuum,
            StateSpec::Fock { n: 3 },
            StateSpec::Coherent { re: 0.7, im: -1.1 },
            StateSpec::EvenCat { re: 1.2, im: 0.9 },
            StateSpec::Squeezed { r: 0.6 },
        ];
        for spec in specs {
            let state = QuantumState::library(&spec, 60).unwrap();
            for beta in [C64::new(0.0, 0.0), C64::new(0.3, -0.8), C64::new(-2.1, 1.4), C64::new(3.0, 2.0)] {
                let (a, b) = (spec.chi(beta), state.chi(beta));
                assert!((a - b).norm() < 1e-10, "{spec:?} β={beta}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn exact_source_reconstruction() {
        let cat = QuantumState::even_cat(C64::new(1.5, 0.0), 30).unwrap();
        let back = fock_from_source(&cat, 30, None).unwrap();
        let err = linalg::max_abs((back.rho() - cat.rho()).as_ref());
        assert!(err < 1e-8, "{err:e}");
    }

    #[test]
    fn interpolation_exact_on_nodes() {
        let s = QuantumState::coherent(C64::new(0.4, 0.1), 20).unwrap();
        let c = char_of_state(&s, CharGrid::new(4.0, 33).unwrap());
        let b = c.grid().beta(7, 20);
        assert!((c.interpolate(b).unwrap() - c.at(7, 20)).norm() < 1e-14);
        assert!(c.interpolate(C64::new(5.0, 0.0)).is_none());
    }

    #[test]
    fn auto_grid_widens() {
        let s = QuantumState::squeezed_vacuum(1.0, 60).unwrap();
        let c = CharFunction::sample_auto(&s, CharGrid::new(3.0, 33).unwrap(), 30.0).unwrap();
        assert!(c.boundary_max() < BOUNDARY_TOLERANCE);
        assert!(c.grid().extent > 3.0);
    }
}
