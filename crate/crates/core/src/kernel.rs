use faer::Mat;

use crate::grid::TemporalGrid;
use crate::linalg::{self, CMat};
use crate::mode::ModeFunction;
use crate::{Error, Result, C64};

/// Relative anti-Hermitian residual tolerated before symmetrization.
pub const HERMITIAN_TOLERANCE: f64 = 1e-8;
/// Negative eigenvalues above `-NEGATIVE_CLAMP * λ_max` are set to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-8;

/// Two-point kernel `K(t1, t2)` on a grid.
#[derive(Clone, Debug)]
pub struct HermitianKernel {
    grid: TemporalGrid,
    entries: CMat,
}

/// One eigenpair of a kernel.
#[derive(Clone, Debug)]
pub struct EigenMode {
    pub value: f64,
    pub mode: ModeFunction,
}

impl HermitianKernel {
    pub fn new(grid: TemporalGrid, entries: CMat) -> Result<Self> {
        let n = grid.n_points();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::GridMismatch(format!(
                "{}x{} kernel on a {n}-point grid",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { grid, entries })
    }

    /// Kernel whose `dt`-weighted matrix is `m`.
    pub fn from_discrete(grid: TemporalGrid, m: CMat) -> Result<Self> {
        let inv = 1.0 / grid.dt();
        Self::new(grid, linalg::scale(m.as_ref(), inv))
    }

    pub fn zeros(grid: TemporalGrid) -> Self {
        let n = grid.n_points();
        Self { grid, entries: Mat::zeros(n, n) }
    }

    /// `Σ λ_i v_i*(t1) v_i(t2)`.
    pub fn from_modes(grid: TemporalGrid, terms: &[(f64, &ModeFunction)]) -> Result<Self> {
        let n = grid.n_points();
        let mut entries = Mat::<C64>::zeros(n, n);
        for (lambda, v) in terms {
            grid.ensure_same(v.grid())?;
            let a = v.amplitudes();
            for j in 0..n {
                let aj = a[j] * *lambda;
                for i in 0..n {
                    entries[(i, j)] += a[i].conj() * aj;
                }
            }
        }
        Ok(Self { grid, entries })
    }

    pub fn grid(&self) -> &TemporalGrid {
        &self.grid
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    /// `dt · K`.
    pub fn discrete(&self) -> CMat {
        linalg::scale(self.entries.as_ref(), self.grid.dt())
    }

    pub fn dt_trace(&self) -> f64 {
        let n = self.grid.n_points();
        (0..n).map(|i| self.entries[(i, i)].re).sum::<f64>() * self.grid.dt()
    }

    pub fn hermitian_residual(&self) -> f64 {
        linalg::hermitian_part(self.entries.as_ref()).1
    }

    /// Eigenpairs sorted by descending eigenvalue, without clamping.
    ///
    /// The returned modes satisfy `K(t1, t2) = Σ λ v*(t1) v(t2)`.
    pub fn eigendecompose_signed(&self) -> Result<Vec<EigenMode>> {
        let (h, residual) = linalg::hermitian_part(self.discrete().as_ref());
        if residual > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { residual });
        }
        let (values, vectors) = linalg::hermitian_eigen(h.as_ref())?;
        let n = values.len();
        let mut out = Vec::with_capacity(n);
        for (j, value) in values.into_iter().enumerate() {
            let col: Vec<C64> = (0..n).map(|i| vectors[(i, j)].conj()).collect();
            let mode = ModeFunction::from_discrete(self.grid, &gauge(col))?;
            out.push(EigenMode { value, mode });
        }
        Ok(out)
    }

    /// Eigenpairs of a positive-semidefinite kernel, descending.
    pub fn eigendecompose(&self) -> Result<Vec<EigenMode>> {
        let mut modes = self.eigendecompose_signed()?;
        let largest = modes.first().map(|m| m.value.max(0.0)).unwrap_or(0.0);
        for m in &mut modes {
            if m.value < 0.0 {
                if m.value < -NEGATIVE_CLAMP * largest {
                    return Err(Error::NegativeEigenvalue { value: m.value, largest });
                }
                m.value = 0.0;
            }
        }
        Ok(modes)
    }
}

/// Free functional form of [`HermitianKernel::eigendecompose`].
pub fn eigendecompose(kernel: &HermitianKernel) -> Result<Vec<EigenMode>> {
    kernel.eigendecompose()
}

/// Fix the global phase so the largest-modulus entry is real and positive.
pub(crate) fn gauge(mut v: Vec<C64>) -> Vec<C64> {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, x) in v.iter().enumerate() {
        // Tie-break on index keeps the choice deterministic.
        if x.norm() > best_abs * (1.0 + 1e-9) {
            best = i;
            best_abs = x.norm();
        }
    }
    if best_abs > 0.0 {
        let phase = v[best].conj() / best_abs;
        for x in &mut v {
            *x *= phase;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::{inner_product, orthogonal_complement};
    use proptest::prelude::*;

    fn grid() -> TemporalGrid {
        TemporalGrid::new(-8.0, 8.0, 161).unwrap()
    }

    fn pair() -> (ModeFunction, ModeFunction) {
        let g = grid();
        let a = ModeFunction::gaussian(g, -1.0, 1.0).unwrap().scale(C64::new(0.0, 1.0));
        let raw = ModeFunction::from_fn(g, |t| C64::new(t.cos(), 0.3 * t) * (-0.2 * t * t).exp());
        let b = orthogonal_complement(&raw, &[&a]).unwrap().into_mode().unwrap();
        (a, b)
    }

    fn rel_frob(a: &HermitianKernel, b: &HermitianKernel) -> f64 {
        let d = a.entries() - b.entries();
        d.norm_l2() / a.entries().norm_l2().max(1e-300)
    }

    #[test]
    fn rank_one() {
        let (a, _) = pair();
        let k = HermitianKernel::from_modes(grid(), &[(3.0, &a)]).unwrap();
        let e = k.eigendecompose().unwrap();
        assert!((e[0].value - 3.0).abs() < 1e-10);
        assert!(e[1].value.abs() < 1e-10);
        assert!((inner_product(&a, &e[0].mode).unwrap().norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rank_two_constructed() {
        let (a, b) = pair();
        let k = HermitianKernel::from_modes(grid(), &[(2.0, &a), (1.0, &b)]).unwrap();
        let e = k.eigendecompose().unwrap();
        assert!((e[0].value - 2.0).abs() < 1e-10);
        assert!((e[1].value - 1.0).abs() < 1e-10);
        assert!((inner_product(&a, &e[0].mode).unwrap().norm() - 1.0).abs() < 1e-10);
        assert!((inner_product(&b, &e[1].mode).unwrap().norm() - 1.0).abs() < 1e-10);
        let terms: Vec<(f64, &ModeFunction)> = e.iter().map(|m| (m.value, &m.mode)).collect();
        let back = HermitianKernel::from_modes(grid(), &terms).unwrap();
        assert!(rel_frob(&k, &back) < 1e-8);
    }

    #[test]
    fn zero_kernel() {
        let e = HermitianKernel::zeros(grid()).eigendecompose().unwrap();
        assert!(e.iter().all(|m| m.value == 0.0));
    }

    #[test]
    fn rejects_non_hermitian() {
        let n = grid().n_points();
        let m = Mat::from_fn(n, n, |i, j| C64::new(0.0, if i < j { 1.0 } else { 0.0 }));
        let k = HermitianKernel::new(grid(), m).unwrap();
        assert!(matches!(k.eigendecompose(), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rejects_large_negative() {
        let (a, b) = pair();
        let k = HermitianKernel::from_modes(grid(), &[(1.0, &a), (-0.5, &b)]).unwrap();
        assert!(matches!(k.eigendecompose(), Err(Error::NegativeEigenvalue { .. })));
        let tiny = HermitianKernel::from_modes(grid(), &[(1.0, &a), (-1e-12, &b)]).unwrap();
        let e = tiny.eigendecompose().unwrap();
        assert!(e.iter().all(|m| m.value >= 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn orthonormal_and_trace(seed in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 9)) {
            let g = TemporalGrid::new(-4.0, 4.0, 48).unwrap();
            let n = g.n_points();
            // Random positive kernel X X† built from a few smooth columns.
            let x = Mat::from_fn(n, 3, |i, j| {
                let t = g.point(i);
                let (re, im) = seed[3 * j + (i % 3)];
                C64::new(re, im) * (-(t - j as f64).powi(2) / 4.0).exp()
            });
            let k = HermitianKernel::new(g, &x * x.adjoint()).unwrap();
            let e = k.eigendecompose().unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let ip = inner_product(&e[i].mode, &e[j].mode).unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((ip - want).norm() < 1e-9);
                }
            }
            let sum: f64 = e.iter().map(|m| m.value).sum();
            prop_assert!((sum - k.dt_trace()).abs() <= 1e-9 * k.dt_trace().abs().max(1e-12));
            for w in e.windows(2) {
                prop_assert!(w[0].value >= w[1].value);
            }
        }
    }
}
