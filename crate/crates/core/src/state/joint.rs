//! Joint characteristic function of two output modes.

use rayon::prelude::*;

use super::charfn::{CharGrid, CharSource};
use crate::bogoliubov::{pullback_output_mode, BogoliubovKernels};
use crate::mode::{inner_product, orthogonal_complement, ModeFunction};
use crate::{Error, Result, C64};

/// `a_{v_i} = Σ_m α_im a_m + β_im a_m†` over an orthonormal input family whose
/// first member is `u`; all other members are in vacuum.
#[derive(Clone, Debug)]
pub struct JointRows {
    pub alpha: [Vec<C64>; 2],
    pub beta: [Vec<C64>; 2],
}

impl JointRows {
    pub fn new(k: &BogoliubovKernels, u: &ModeFunction, v1: &ModeFunction, v2: &ModeFunction) -> Result<Self> {
        let (u, _) = u.normalize()?;
        if inner_product(v1, v2)?.norm() > 1e-8 {
            return Err(Error::InvalidParameter("joint output modes must be orthogonal".into()));
        }
        let p = [pullback_output_mode(k, v1)?, pullback_output_mode(k, v2)?];
        let mut family = vec![u];
        for pb in &p {
            let candidates: Vec<&ModeFunction> = std::iter::once(&pb.f).chain(pb.g.iter()).collect();
            for c in candidates {
                let refs: Vec<&ModeFunction> = family.iter().collect();
                if let Some(m) = orthogonal_complement(c, &refs)?.into_mode() {
                    family.push(m);
                }
            }
        }
        let mut alpha = [Vec::new(), Vec::new()];
        let mut beta = [Vec::new(), Vec::new()];
        for (i, pb) in p.iter().enumerate() {
            for e in &family {
                alpha[i].push(inner_product(&pb.f, e)? * pb.zeta);
                let b = match &pb.g {
                    Some(g) => inner_product(e, g)? * pb.xi,
                    None => C64::new(0.0, 0.0),
                };
                beta[i].push(b);
            }
        }
        Ok(Self { alpha, beta })
    }

    /// Arguments `μ_m = Σ_i β_i α_im* − β_i* β_im` of each family member.
    pub fn mu(&self, b1: C64, b2: C64) -> Vec<C64> {
        let bs = [b1, b2];
        (0..self.alpha[0].len())
            .map(|m| (0..2).map(|i| bs[i] * self.alpha[i][m].conj() - bs[i].conj() * self.beta[i][m]).sum())
            .collect()
    }
}

/// `χ(β₁, β₂) = χ_u(μ_u) Π_m exp(−|μ_m|²/2)`.
pub struct JointChar<'a> {
    pub rows: JointRows,
    pub input: &'a dyn CharSource,
}

impl JointChar<'_> {
    pub fn chi(&self, b1: C64, b2: C64) -> C64 {
        let mu = self.rows.mu(b1, b2);
        let vac: f64 = mu[1..].iter().map(|m| m.norm_sqr()).sum();
        let g = (-0.5 * vac).exp();
        if g == 0.0 {
            return C64::new(0.0, 0.0);
        }
        self.input.chi(mu[0]) * g
    }
}

/// Four-dimensional sample of a joint characteristic function, same grid on every axis.
#[derive(Clone, Debug)]
pub struct JointCharFunction {
    pub grid: CharGrid,
    /// Index `((i1 * n + j1) * n + i2) * n + j2` for `β₁ = (j1, i1)`, `β₂ = (j2, i2)`.
    pub values: Vec<C64>,
}

impl JointCharFunction {
    pub fn default_grid() -> CharGrid {
        CharGrid { extent: 6.0, n_side: 33 }
    }

    pub fn at(&self, i1: usize, j1: usize, i2: usize, j2: usize) -> C64 {
        let n = self.grid.n_side;
        self.values[((i1 * n + j1) * n + i2) * n + j2]
    }

    /// `(1/π²) ∫ |χ|² d²β₁ d²β₂`.
    pub fn purity(&self) -> f64 {
        let h = self.grid.spacing();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h.powi(4) / std::f64::consts::PI.powi(2)
    }
}

pub fn joint_two_mode_char(
    k: &BogoliubovKernels,
    u: &ModeFunction,
    v1: &ModeFunction,
    v2: &ModeFunction,
    chi_u: &dyn CharSource,
    grid: CharGrid,
) -> Result<JointCharFunction> {
    let jc = JointChar { rows: JointRows::new(k, u, v1, v2)?, input: chi_u };
    let n = grid.n_side;
    let blocks: Vec<Vec<C64>> = (0..n * n)
        .into_par_iter()
        .map(|ij| {
            let b1 = grid.beta(ij / n, ij % n);
            let mut out = Vec::with_capacity(n * n);
            for i2 in 0..n {
                for j2 in 0..n {
                    out.push(jc.chi(b1, grid.beta(i2, j2)));
                }
            }
            out
        })
        .collect();
    Ok(JointCharFunction { grid, values: blocks.concat() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::identity_kernels;
    use crate::grid::TemporalGrid;
    use crate::state::QuantumState;

    #[test]
    fn identity_product_state() {
        let g = TemporalGrid::new(-8.0, 8.0, 128).unwrap();
        let u = ModeFunction::gaussian(g, 0.0, 1.0).unwrap();
        let raw = ModeFunction::gaussian(g, 1.0, 1.0).unwrap();
        let w = orthogonal_complement(&raw, &[&u]).unwrap().into_mode().unwrap();
        let s = QuantumState::fock(1, 6).unwrap();
        let jc = JointChar { rows: JointRows::new(&identity_kernels(g), &u, &u, &w).unwrap(), input: &s };
        for &(b1, b2) in &[(C64::new(0.3, 0.1), C64::new(-0.4, 0.7)), (C64::new(1.0, -1.0), C64::new(0.0, 0.0))] {
            let want = s.chi(b1) * (-0.5 * b2.norm_sqr()).exp();
            assert!((jc.chi(b1, b2) - want).norm() < 1e-12);
        }
    }
}
