//! Fock-basis matrix elements of `D(β) = exp(β a† − β* a)`.

use crate::C64;

/// `⟨m|D(β)|n⟩` for `m, n < dim`, row-major (`out[m * dim + n]`).
///
/// For `m = n + k`, `D_{m,n} = e^{ik arg β} y_n` with
/// `y_n = √(n!/m!) |β|ᵏ e^{−|β|²/2} L_n^{(k)}(|β|²)` advanced by the Laguerre
/// three-term recurrence; the upper triangle uses `D_{n,m} = (−1)ᵏ D_{m,n}*`.
pub fn displacement_matrix(beta: C64, dim: usize) -> Vec<C64> {
    let mut d = vec![C64::new(0.0, 0.0); dim * dim];
    fill_displacement(beta, dim, &mut d);
    d
}

/// In-place variant of [`displacement_matrix`]; `out` must hold `dim²` entries.
pub fn fill_displacement(beta: C64, dim: usize, out: &mut [C64]) {
    assert_eq!(out.len(), dim * dim);
    let x = beta.norm_sqr();
    let ln_r = 0.5 * x.ln();
    let unit = if x > 0.0 { beta / x.sqrt() } else { C64::new(1.0, 0.0) };
    let mut phase = C64::new(1.0, 0.0);
    let mut ln_fact = 0.0;
    for k in 0..dim {
        if k > 0 {
            ln_fact += (k as f64).ln();
            phase *= unit;
        }
        let kf = k as f64;
        let mut prev = 0.0;
        let mut y = if k == 0 {
            (-0.5 * x).exp()
        } else if x > 0.0 {
            (kf * ln_r - 0.5 * x - 0.5 * ln_fact).exp()
        } else {
            0.0
        };
        for n in 0..dim - k {
            let v = phase * y;
            out[(n + k) * dim + n] = v;
            if k > 0 {
                out[n * dim + n + k] = if k % 2 == 0 { v.conj() } else { -v.conj() };
            }
            let nf = n as f64;
            let next = ((2.0 * nf + 1.0 + kf - x) * y - (nf * (nf + kf)).sqrt() * prev) / ((nf + 1.0) * (nf + kf + 1.0)).sqrt();
            prev = y;
            y = next;
        }
    }
}
