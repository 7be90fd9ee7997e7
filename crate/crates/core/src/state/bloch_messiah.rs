//! Beam-splitter / squeezer / beam-splitter factorization of an output-mode row.
//!
//! Heisenberg conventions for the elementary operations:
//!
//! - beam splitter on `(x, y)`: `a_x → cos θ a_x + e^{iφ} sin θ a_y`,
//!   `a_y → −e^{−iφ} sin θ a_x + cos θ a_y`
//! - squeezer: `a → cosh r a + e^{iψ} sinh r a†`
//! - phase: `a_u → e^{iφ₀} a_u`
//!
//! The row of `a_v` equals the `u` row of
//! `R_u(φ₀) U_us(θ₃, φ₃) U_uk(θ₂, φ₂) S_u(r₁, ψ₁) S_k(r₂, ψ₂) U_uk(θ₁, φ₁)`,
//! where the leftmost factor acts last.

use serde::{Deserialize, Serialize};

use super::decomposition::OutputDecomposition;
use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochMessiahParams {
    pub theta1: f64,
    pub phi1: f64,
    pub theta2: f64,
    pub phi2: f64,
    pub theta3: f64,
    pub phi3: f64,
    pub r1: f64,
    pub r2: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub phi0: f64,
    /// Some angle was undetermined (a vanishing amplitude) and set to zero.
    pub degenerate: bool,
}

/// Mode index: 0 = u, 1 = k, 2 = s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Op {
    Phase { mode: usize, phi: f64 },
    BeamSplitter { x: usize, y: usize, theta: f64, phi: f64 },
    Squeezer { mode: usize, r: f64, psi: f64 },
}

impl BlochMessiahParams {
    /// Operations in the order they act on the input.
    pub fn sequence(&self) -> [Op; 6] {
        [
            Op::BeamSplitter { x: 0, y: 1, theta: self.theta1, phi: self.phi1 },
            Op::Squeezer { mode: 1, r: self.r2, psi: self.psi2 },
            Op::Squeezer { mode: 0, r: self.r1, psi: self.psi1 },
            Op::BeamSplitter { x: 0, y: 1, theta: self.theta2, phi: self.phi2 },
            Op::BeamSplitter { x: 0, y: 2, theta: self.theta3, phi: self.phi3 },
            Op::Phase { mode: 0, phi: self.phi0 },
        ]
    }

    /// `(A, B, C, D, E)` produced by the sequence.
    pub fn reconstruct(&self) -> [C64; 5] {
        let mut alpha = [ONE, ZERO, ZERO];
        let mut beta = [ZERO; 3];
        for op in self.sequence().iter().rev() {
            substitute(op, &mut alpha, &mut beta);
        }
        [alpha[0], beta[0], alpha[1], beta[1], alpha[2]]
    }
}

/// Rewrite `Σ α_x a_x + β_x a_x†` after substituting the Heisenberg map of `op`.
fn substitute(op: &Op, alpha: &mut [C64; 3], beta: &mut [C64; 3]) {
    // a_x → Σ_y P_xy a_y + Q_xy a_y†
    let mut p = [[ZERO; 3]; 3];
    let mut q = [[ZERO; 3]; 3];
    for (i, row) in p.iter_mut().enumerate() {
        row[i] = ONE;
    }
    match *op {
        Op::Phase { mode, phi } => p[mode][mode] = C64::from_polar(1.0, phi),
        Op::BeamSplitter { x, y, theta, phi } => {
            let (c, s) = (theta.cos(), theta.sin());
            p[x][x] = C64::new(c, 0.0);
            p[x][y] = C64::from_polar(s, phi);
            p[y][x] = -C64::from_polar(s, -phi);
            p[y][y] = C64::new(c, 0.0);
        }
        Op::Squeezer { mode, r, psi } => {
            p[mode][mode] = C64::new(r.cosh(), 0.0);
            q[mode][mode] = C64::from_polar(r.sinh(), psi);
        }
    }
    let (a0, b0) = (*alpha, *beta);
    for y in 0..3 {
        alpha[y] = (0..3).map(|x| a0[x] * p[x][y] + b0[x] * q[x][y].conj()).sum();
        beta[y] = (0..3).map(|x| a0[x] * q[x][y] + b0[x] * p[x][y].conj()).sum();
    }
}

pub fn bloch_messiah_params(decomp: &OutputDecomposition) -> Result<BlochMessiahParams> {
    bloch_messiah_from_row(decomp.coefficients())
}

/// Parameters for an arbitrary row satisfying the commutator identity.
pub fn bloch_messiah_from_row(row: [C64; 5]) -> Result<BlochMessiahParams> {
    let [a, b, c, d, e] = row;
    let defect = a.norm_sqr() - b.norm_sqr() + c.norm_sqr() - d.norm_sqr() + e.norm_sqr() - 1.0;
    if defect.abs() > 1e-6 {
        return Err(Error::TheoryViolation(format!("row violates the commutator by {defect:.3e}")));
    }
    let mut degenerate = false;
    let e_abs = e.norm().min(1.0);
    let theta3 = e_abs.asin();
    let cos3 = theta3.cos();

    // (u, k) block: α = (A, C), β = (B, D); N = αα† − β̄β̄†.
    let alpha = [a, c];
    let beta = [b, d];
    let mut n = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            n[i][j] = alpha[i] * alpha[j].conj() - beta[i].conj() * beta[j];
        }
    }
    let (l1, l2, e1, e2) = herm2_eigen(n);
    let tr = l1 + l2;

    let try_basis = |r_u: [C64; 2]| -> Option<([C64; 2], [Squeeze; 2])> {
        let (theta, phi, r_u) = bs_from_row(r_u);
        let r_k = [-C64::from_polar(theta.sin(), -phi), C64::new(theta.cos(), 0.0)];
        let sq = [squeeze_for(alpha, beta, r_u)?, squeeze_for(alpha, beta, r_k)?];
        Some(([C64::new(theta, 0.0), C64::new(phi, 0.0)], sq))
    };

    let mut chosen = None;
    if l2 >= -1e-14 * tr.abs().max(1e-300) {
        chosen = try_basis(e1);
    }
    if chosen.is_none() {
        // Equal-diagonal basis: both rows carry half the trace of N.
        let r_u = [(e1[0] + e2[0]) * std::f64::consts::FRAC_1_SQRT_2, (e1[1] + e2[1]) * std::f64::consts::FRAC_1_SQRT_2];
        chosen = try_basis(r_u);
    }
    let ([t1, p1], [s_u, s_k]) =
        chosen.ok_or_else(|| Error::Numerical("no admissible Bloch-Messiah basis".into()))?;

    let (wu, wk) = (s_u.w, s_k.w);
    let phi0 = if wu.norm() > 1e-14 {
        wu.arg()
    } else {
        degenerate = true;
        0.0
    };
    let theta2 = if cos3 > 1e-14 {
        wk.norm().atan2(wu.norm())
    } else {
        degenerate = true;
        0.0
    };
    let phi2 = if wk.norm() > 1e-14 {
        wk.arg() - phi0
    } else {
        0.0
    };
    let phi3 = if e_abs > 1e-14 { e.arg() - phi0 } else { 0.0 };
    degenerate |= s_u.degenerate || s_k.degenerate;
    Ok(BlochMessiahParams {
        theta1: t1.re,
        phi1: p1.re,
        theta2,
        phi2,
        theta3,
        phi3,
        r1: s_u.r,
        r2: s_k.r,
        psi1: s_u.psi,
        psi2: s_k.psi,
        phi0,
        degenerate,
    })
}

#[derive(Clone, Copy, Debug)]
struct Squeeze {
    r: f64,
    psi: f64,
    w: C64,
    degenerate: bool,
}

/// For basis row `r`: `x = α·r̄ = w cosh r`, `y = β·r = w e^{iψ} sinh r`.
fn squeeze_for(alpha: [C64; 2], beta: [C64; 2], row: [C64; 2]) -> Option<Squeeze> {
    let x = alpha[0] * row[0].conj() + alpha[1] * row[1].conj();
    let y = beta[0] * row[0] + beta[1] * row[1];
    let (ax, ay) = (x.norm(), y.norm());
    if ax < 1e-14 && ay < 1e-14 {
        return Some(Squeeze { r: 0.0, psi: 0.0, w: ZERO, degenerate: true });
    }
    let t = ay / ax;
    // Near-equal magnitudes mean unbounded squeezing; reject the basis.
    if !(t < 1.0 - 1e-9) {
        return None;
    }
    let r = t.atanh();
    let psi = if ay > 1e-14 { (y / x).arg() } else { 0.0 };
    Some(Squeeze { r, psi, w: x / r.cosh(), degenerate: false })
}

/// `(θ, φ)` with row `(cos θ, e^{iφ} sin θ)` after removing the row's overall phase.
fn bs_from_row(r: [C64; 2]) -> (f64, f64, [C64; 2]) {
    let ph = if r[0].norm() > 1e-300 { r[0].conj() / r[0].norm() } else { ONE };
    let r = [r[0] * ph, r[1] * ph];
    let theta = r[1].norm().atan2(r[0].re);
    let phi = if r[1].norm() > 1e-14 { r[1].arg() } else { 0.0 };
    (theta, phi, [C64::new(theta.cos(), 0.0), C64::from_polar(theta.sin(), phi)])
}

/// Eigenpairs of a 2×2 Hermitian matrix, descending.
fn herm2_eigen(n: [[C64; 2]; 2]) -> (f64, f64, [C64; 2], [C64; 2]) {
    let (a, dd, b) = (n[0][0].re, n[1][1].re, n[0][1]);
    let mean = 0.5 * (a + dd);
    let half = 0.5 * (a - dd);
    let rad = (half * half + b.norm_sqr()).sqrt();
    let (l1, l2) = (mean + rad, mean - rad);
    if b.norm() < 1e-300 {
        return if a >= dd {
            (a, dd, [ONE, ZERO], [ZERO, ONE])
        } else {
            (dd, a, [ZERO, ONE], [ONE, ZERO])
        };
    }
    // (N − l1) v = 0 → v ∝ (b, l1 − a)
    let v = [b, C64::new(l1 - a, 0.0)];
    let nv = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let v1 = [v[0] / nv, v[1] / nv];
    let v2 = [-v1[1].conj(), v1[0].conj()];
    (l1, l2, v1, v2)
}
