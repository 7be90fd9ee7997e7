//! Wave packets on a grid and their inner-product geometry.

use serde::{Deserialize, Serialize};

use crate::grid::TemporalGrid;
use crate::{Error, Result, C64};

/// Tolerance below which a residual norm counts as "contained in span".
pub const SPAN_TOLERANCE: f64 = 1e-12;

/// Complex amplitude on a grid; the norm uses the rectangle rule with weight `dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeFunction {
    grid: TemporalGrid,
    amplitudes: Vec<C64>,
}

/// Outcome of [`orthogonal_complement`].
#[derive(Clone, Debug)]
pub enum Complement {
    Mode { mode: ModeFunction, residual_norm: f64 },
    InSpan { residual_norm: f64 },
}

impl Complement {
    pub fn residual_norm(&self) -> f64 {
        match self {
            Complement::Mode { residual_norm, .. } | Complement::InSpan { residual_norm } => {
                *residual_norm
            }
        }
    }

    pub fn mode(&self) -> Option<&ModeFunction> {
        match self {
            Complement::Mode { mode, .. } => Some(mode),
            Complement::InSpan { .. } => None,
        }
    }

    pub fn into_mode(self) -> Option<ModeFunction> {
        match self {
            Complement::Mode { mode, .. } => Some(mode),
            Complement::InSpan { .. } => None,
        }
    }
}

impl ModeFunction {
    pub fn new(grid: TemporalGrid, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for a {}-point grid",
                amplitudes.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn from_fn(grid: TemporalGrid, f: impl Fn(f64) -> C64) -> Self {
        let amplitudes = grid.points().into_iter().map(f).collect();
        Self { grid, amplitudes }
    }

    /// Normalized `exp(-(t - center)^2 / (2 width^2))`.
    pub fn gaussian(grid: TemporalGrid, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidParameter(format!("pulse width must be positive, got {width}")));
        }
        let raw = Self::from_fn(grid, |t| {
            let x = (t - center) / width;
            C64::new((-0.5 * x * x).exp(), 0.0)
        });
        Ok(raw.normalize()?.0)
    }

    /// Build from a vector normalized in the plain Euclidean sense (`√dt` scaling).
    pub fn from_discrete(grid: TemporalGrid, v: &[C64]) -> Result<Self> {
        let s = 1.0 / grid.dt().sqrt();
        Self::new(grid, v.iter().map(|x| x * s).collect())
    }

    /// Amplitudes scaled by `√dt`, so the Euclidean norm equals the mode norm.
    pub fn discrete(&self) -> Vec<C64> {
        let s = self.grid.dt().sqrt();
        self.amplitudes.iter().map(|x| x * s).collect()
    }

    pub fn grid(&self) -> &TemporalGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        (self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dt()).sqrt()
    }

    /// Returns `f/‖f‖` and `‖f‖`.
    pub fn normalize(&self) -> Result<(ModeFunction, f64)> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateMode(format!("cannot normalize a mode of norm {n}")));
        }
        Ok((self.scale(C64::new(1.0 / n, 0.0)), n))
    }

    pub fn scale(&self, s: C64) -> ModeFunction {
        Self { grid: self.grid, amplitudes: self.amplitudes.iter().map(|a| a * s).collect() }
    }

    pub fn conj(&self) -> ModeFunction {
        Self { grid: self.grid, amplitudes: self.amplitudes.iter().map(|a| a.conj()).collect() }
    }

    /// `self + s·other`
    pub fn add_scaled(&self, s: C64, other: &ModeFunction) -> Result<ModeFunction> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            amplitudes: self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a + s * b).collect(),
        })
    }

    /// Overlap `|⟨self, other⟩|^2`.
    pub fn overlap_sqr(&self, other: &ModeFunction) -> Result<f64> {
        Ok(inner_product(self, other)?.norm_sqr())
    }
}

/// `⟨a, b⟩ = Σ a_i* b_i dt`.
pub fn inner_product(a: &ModeFunction, b: &ModeFunction) -> Result<C64> {
    a.grid.ensure_same(&b.grid)?;
    let s: C64 = a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum();
    Ok(s * a.grid.dt())
}

pub fn normalize(f: &ModeFunction) -> Result<(ModeFunction, f64)> {
    f.normalize()
}

/// Component of `f` orthogonal to an orthonormal `basis`, normalized.
///
/// Projection is applied twice to keep the result orthogonal to working precision.
pub fn orthogonal_complement(f: &ModeFunction, basis: &[&ModeFunction]) -> Result<Complement> {
    let mut r = f.clone();
    for _ in 0..2 {
        for b in basis {
            let c = inner_product(b, &r)?;
            r = r.add_scaled(-c, b)?;
        }
    }
    let residual_norm = r.norm();
    if residual_norm < SPAN_TOLERANCE {
        return Ok(Complement::InSpan { residual_norm });
    }
    let mode = r.scale(C64::new(1.0 / residual_norm, 0.0));
    Ok(Complement::Mode { mode, residual_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> TemporalGrid {
        TemporalGrid::new(-12.0, 14.0, 2049).unwrap()
    }

    #[test]
    fn gaussian_overlap_matches_closed_form() {
        // ∫ exp(-t²/2) exp(-(t-2)²/2) dt / √π = exp(-1)
        let a = ModeFunction::gaussian(grid(), 0.0, 1.0).unwrap();
        let b = ModeFunction::gaussian(grid(), 2.0, 1.0).unwrap();
        let s = inner_product(&a, &b).unwrap();
        assert!((s.re - (-1.0f64).exp()).abs() < 1e-10, "{s}");
        assert!(s.im.abs() < 1e-14);
        assert!((inner_product(&a, &a).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_support_is_orthogonal() {
        let g = grid();
        let a = ModeFunction::from_fn(g, |t| C64::new(if t < 0.0 { 1.0 } else { 0.0 }, 0.0));
        let b = ModeFunction::from_fn(g, |t| C64::new(if t > 1.0 { 1.0 } else { 0.0 }, 0.0));
        assert_eq!(inner_product(&a, &b).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn normalize_constant() {
        let g = TemporalGrid::new(0.0, 1.0, 11).unwrap();
        // Σ 4·dt over 11 points = 4.4, so the constant must be rescaled accordingly.
        let c = 2.0 / (1.1f64).sqrt();
        let f = ModeFunction::new(g, vec![C64::new(c, 0.0); 11]).unwrap();
        let (n, norm) = f.normalize().unwrap();
        assert!((norm - 2.0).abs() < 1e-12);
        for a in n.amplitudes() {
            assert!((a.re * (1.1f64).sqrt() - 1.0).abs() < 1e-12);
        }
        let (again, norm1) = n.normalize().unwrap();
        assert!((norm1 - 1.0).abs() < 1e-12);
        assert!(again.add_scaled(C64::new(-1.0, 0.0), &n).unwrap().norm() < 1e-14);
    }

    #[test]
    fn zero_norm_rejected() {
        let f = ModeFunction::new(grid(), vec![C64::new(0.0, 0.0); 2049]).unwrap();
        assert!(matches!(f.normalize(), Err(Error::DegenerateMode(_))));
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(ModeFunction::new(grid(), vec![C64::new(0.0, 0.0); 3]).is_err());
        let other = TemporalGrid::new(0.0, 1.0, 2049).unwrap();
        let a = ModeFunction::gaussian(grid(), 0.0, 1.0).unwrap();
        let b = ModeFunction::gaussian(other, 0.5, 0.1).unwrap();
        assert!(matches!(inner_product(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn complement_cases() {
        let g = grid();
        let u = ModeFunction::gaussian(g, 0.0, 1.0).unwrap();
        let w = ModeFunction::from_fn(g, |t| C64::new(t * (-0.5 * t * t).exp(), 0.0))
            .normalize()
            .unwrap()
            .0;
        assert!(inner_product(&u, &w).unwrap().norm() < 1e-12);

        let c = orthogonal_complement(&u, &[&u]).unwrap();
        assert!(matches!(c, Complement::InSpan { .. }));
        assert!(c.residual_norm() < 1e-12);

        let c = orthogonal_complement(&w, &[&u]).unwrap();
        assert!((c.residual_norm() - 1.0).abs() < 1e-12);

        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mix = u.scale(s).add_scaled(s, &w).unwrap();
        let c = orthogonal_complement(&mix, &[&u]).unwrap();
        assert!((c.residual_norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let m = c.mode().unwrap();
        assert!((inner_product(&w, m).unwrap() - 1.0).norm() < 1e-12);
    }

    fn random_mode(g: TemporalGrid, coeffs: &[(f64, f64)]) -> ModeFunction {
        ModeFunction::from_fn(g, |t| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &(re, im))| {
                    let x = t - k as f64;
                    C64::new(re, im) * (-0.5 * x * x).exp()
                })
                .sum()
        })
    }

    fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 4)
    }

    proptest! {
        #[test]
        fn sesquilinear(a in coeffs(), b in coeffs(), c in coeffs(), al in (-2.0..2.0f64, -2.0..2.0f64)) {
            let g = TemporalGrid::new(-8.0, 12.0, 257).unwrap();
            let (a, b, c) = (random_mode(g, &a), random_mode(g, &b), random_mode(g, &c));
            let alpha = C64::new(al.0, al.1);
            let lhs = inner_product(&a, &b.scale(alpha).add_scaled(C64::new(1.0, 0.0), &c).unwrap()).unwrap();
            let rhs = alpha * inner_product(&a, &b).unwrap() + inner_product(&a, &c).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
            let ab = inner_product(&a, &b).unwrap();
            let ba = inner_product(&b, &a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-12 * (1.0 + ab.norm()));
        }

        #[test]
        fn complement_is_orthogonal(a in coeffs(), b in coeffs(), c in coeffs()) {
            let g = TemporalGrid::new(-8.0, 12.0, 257).unwrap();
            let e1 = random_mode(g, &a).normalize().unwrap().0;
            let e2 = orthogonal_complement(&random_mode(g, &b), &[&e1]).unwrap().into_mode().unwrap();
            if let Complement::Mode { mode, .. } = orthogonal_complement(&random_mode(g, &c), &[&e1, &e2]).unwrap() {
                prop_assert!(inner_product(&e1, &mode).unwrap().norm() < 1e-9);
                prop_assert!(inner_product(&e2, &mode).unwrap().norm() < 1e-9);
                prop_assert!((mode.norm() - 1.0).abs() < 1e-10);
            }
        }
    }
}
