//! Wigner functions on an `(x, p)` grid, with `a = (x + ip)/√2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::charfn::{char_of_state, CharFunction, CharGrid};
use super::QuantumState;
use crate::C64;

/// Square phase-space grid `x, p ∈ [−extent, extent]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub extent: f64,
    pub n_side: usize,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self { extent: 6.0, n_side: 121 }
    }
}

impl PhaseGrid {
    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.n_side - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing()
    }
}

#[derive(Clone, Debug)]
pub struct WignerGrid {
    pub grid: PhaseGrid,
    /// Row-major, `values[i * n + j] = W(x_j, p_i)`.
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn at(&self, ip: usize, ix: usize) -> f64 {
        self.values[ip * self.grid.n_side + ix]
    }

    /// `W(x, p)` at the nearest grid node.
    pub fn nearest(&self, x: f64, p: f64) -> f64 {
        let h = self.grid.spacing();
        let last = self.grid.n_side - 1;
        let ix = (((x + self.grid.extent) / h).round().max(0.0) as usize).min(last);
        let ip = (((p + self.grid.extent) / h).round().max(0.0) as usize).min(last);
        self.at(ip, ix)
    }

    /// `∫∫ W dx dp` by the rectangle rule.
    pub fn integral(&self) -> f64 {
        let h = self.grid.spacing();
        self.values.iter().sum::<f64>() * h * h
    }
}

/// `W(x, p) = (1/2π²) ∫ χ(β) e^{β*α − βα*} d²β`, evaluated as two separable sums.
pub fn wigner_from_char(chi: &CharFunction, out: PhaseGrid) -> WignerGrid {
    let cg = *chi.grid();
    let n = cg.n_side;
    let h = cg.spacing();
    if chi.boundary_max() > 1e-3 {
        log::warn!("characteristic function has not decayed at the grid edge; the Wigner function may alias");
    }
    let m = out.n_side;
    let s2 = std::f64::consts::SQRT_2;
    // e^{β*α − βα*} = e^{i√2 (β_re p − β_im x)}
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|k| {
                    let p = out.coord(k);
                    (0..n).map(|j| chi.at(i, j) * C64::from_polar(1.0, s2 * cg.coord(j) * p)).sum()
                })
                .collect()
        })
        .collect();
    let pref = h * h / (2.0 * std::f64::consts::PI * std::f64::consts::PI);
    let values: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|k| {
            (0..m)
                .map(|l| {
                    let x = out.coord(l);
                    let s: C64 = (0..n).map(|i| rows[i][k] * C64::from_polar(1.0, -s2 * cg.coord(i) * x)).sum();
                    s.re * pref
                })
                .collect()
        })
        .collect();
    WignerGrid { grid: out, values: values.concat() }
}

/// Wigner function of a Fock-basis state via its sampled characteristic function.
pub fn wigner_of_state(state: &QuantumState, chi_grid: CharGrid, out: PhaseGrid) -> WignerGrid {
    wigner_from_char(&char_of_state(state, chi_grid), out)
}
