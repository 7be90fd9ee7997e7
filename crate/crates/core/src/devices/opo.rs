//! Pulse-pumped degenerate OPO with a single output coupler.
//!
//! Each grid bin is one collision: a half-step of the pumped, detuned cavity,
//! a beam splitter with transmissivity `e^{−γ dt}` exchanging the cavity with
//! the bin's travelling field, and another half-step. The cavity's state at
//! the start of the grid is identified with its state at the end, closing the
//! loop; because every step is an exact two-mode Bogoliubov map, the result is
//! symplectic to machine precision.

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::pump::GaussianPump;
use crate::bogoliubov::BogoliubovKernels;
use crate::grid::TemporalGrid;
use crate::{Error, Result, C64};

/// Largest tolerated cavity memory `|Φ(t_end, t₀)|`.
pub const RINGDOWN_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpoParams {
    /// Cavity detuning Δ, same units as `decay`.
    pub detuning: f64,
    /// Output-coupler decay rate γ.
    pub decay: f64,
    pub pump: GaussianPump,
}

impl OpoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0) || !self.decay.is_finite() {
            return Err(Error::InvalidParameter(format!("decay must be positive, got {}", self.decay)));
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidParameter("detuning must be finite".into()));
        }
        self.pump.validate()
    }
}

/// `exp` of `[[−iΔτ, Ξ], [Ξ*, iΔτ]]`, returned as `(e11, e12)`; the second row is the conjugate.
fn half_step(delta_tau: f64, xi: C64) -> (C64, C64) {
    let k2 = xi.norm_sqr() - delta_tau * delta_tau;
    let (ch, sh_over_k) = if k2.abs() < 1e-6 {
        // Series in k² keeps both branches smooth through k = 0.
        let c = 1.0 + k2 / 2.0 + k2 * k2 / 24.0 + k2 * k2 * k2 / 720.0;
        let s = 1.0 + k2 / 6.0 + k2 * k2 / 120.0 + k2 * k2 * k2 / 5040.0;
        (c, s)
    } else if k2 > 0.0 {
        let k = k2.sqrt();
        (k.cosh(), k.sinh() / k)
    } else {
        let k = (-k2).sqrt();
        (k.cos(), k.sin() / k)
    };
    (C64::new(ch, -delta_tau * sh_over_k), xi * sh_over_k)
}

pub fn build_opo(params: &OpoParams, grid: &TemporalGrid) -> Result<BogoliubovKernels> {
    params.validate()?;
    let pump = params.pump;
    let (lo, hi) = pump.support();
    if lo < grid.t_start() || hi > grid.t_end() {
        return Err(Error::InvalidParameter(format!(
            "pump support [{lo:.4}, {hi:.4}] exceeds grid [{:.4}, {:.4}]",
            grid.t_start(),
            grid.t_end()
        )));
    }
    let n = grid.n_points();
    let dt = grid.dt();
    let gamma = params.decay;
    let cos_t = (-0.5 * gamma * dt).exp();
    let sin_t = (-(-gamma * dt).exp_m1()).sqrt();
    let tau = 0.5 * dt;
    let carrier = C64::from_polar(1.0, pump.phase);

    // Cavity operator as Σ_k P_k x_k + Q_k x_k†, with x_0 = initial cavity and x_{k+1} = bin k.
    let mut p = vec![C64::new(0.0, 0.0); n + 1];
    let mut q = vec![C64::new(0.0, 0.0); n + 1];
    p[0] = C64::new(1.0, 0.0);
    let mut a = Mat::<C64>::zeros(n, n);
    let mut b = Mat::<C64>::zeros(n, n);
    let mut a0 = vec![C64::new(0.0, 0.0); n];
    let mut b0 = vec![C64::new(0.0, 0.0); n];

    let apply = |p: &mut [C64], q: &mut [C64], upto: usize, e: (C64, C64)| {
        for k in 0..upto {
            let (pk, qk) = (p[k], q[k]);
            p[k] = e.0 * pk + e.1 * qk.conj();
            q[k] = e.0 * qk + e.1 * pk.conj();
        }
    };

    for j in 0..n {
        let t = grid.point(j);
        let first = half_step(params.detuning * tau, carrier * pump.integral(t - tau, t));
        let second = half_step(params.detuning * tau, carrier * pump.integral(t, t + tau));
        // Bins after j have not touched the cavity yet.
        apply(&mut p, &mut q, j + 1, first);
        a0[j] = p[0] * sin_t;
        b0[j] = q[0] * sin_t;
        for k in 0..j {
            a[(j, k)] = p[k + 1] * sin_t;
            b[(j, k)] = q[k + 1] * sin_t;
        }
        a[(j, j)] = C64::new(cos_t, 0.0);
        for k in 0..=j {
            p[k] *= cos_t;
            q[k] *= cos_t;
        }
        p[j + 1] = C64::new(-sin_t, 0.0);
        apply(&mut p, &mut q, j + 2, second);
    }

    check_ringdown(params, grid, &p, &q, sin_t)?;

    // Close the loop: the initial cavity operator equals the final one.
    let (alpha, beta) = (p[0], q[0]);
    let m11 = C64::new(1.0, 0.0) - alpha;
    let m12 = -beta;
    let m21 = -beta.conj();
    let m22 = C64::new(1.0, 0.0) - alpha.conj();
    let det = m11 * m22 - m12 * m21;
    if det.norm() < 1e-12 {
        return Err(Error::NonConvergent(
            "cavity round trip is not contractive; the pump exceeds threshold for this grid".into(),
        ));
    }
    let mut xs = vec![C64::new(0.0, 0.0); n];
    let mut ys = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let (pi, kc) = (p[k + 1], q[k + 1].conj());
        let x = (m22 * pi - m12 * kc) / det;
        let yc = (m11 * kc - m21 * pi) / det;
        xs[k] = x;
        ys[k] = yc.conj();
    }
    for k in 0..n {
        let (x, y) = (xs[k], ys[k]);
        for j in 0..n {
            a[(j, k)] += a0[j] * x + b0[j] * y.conj();
            b[(j, k)] += a0[j] * y + b0[j] * x.conj();
        }
    }
    BogoliubovKernels::from_discrete(*grid, a, b)
}

/// Errors if the cavity still remembers the pump-centre bin at the end of the grid.
fn check_ringdown(params: &OpoParams, grid: &TemporalGrid, p: &[C64], q: &[C64], sin_t: f64) -> Result<()> {
    let n = grid.n_points();
    let t0 = params.pump.center;
    let k0 = (((t0 - grid.t_start()) / grid.dt()).round().max(0.0) as usize).min(n - 1);
    let remaining = (p[k0 + 1].norm_sqr() + q[k0 + 1].norm_sqr()).sqrt() / sin_t;
    if remaining > RINGDOWN_TOLERANCE {
        let extra = 2.0 * (remaining / RINGDOWN_TOLERANCE).ln() / params.decay + 2.0 / params.decay;
        return Err(Error::GridTooShort { remaining, suggested_t_end: grid.t_end() + extra });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov::{pullback_output_mode, verify_symplectic};
    use crate::linalg;
    use crate::mode::{inner_product, ModeFunction};

    fn params(area: f64, width: f64, detuning: f64) -> OpoParams {
        OpoParams { detuning, decay: 1.0, pump: GaussianPump::new(area, 0.0, width) }
    }

    #[test]
    fn half_step_is_symplectic() {
        for &(d, x) in &[(0.0, 0.3), (0.4, 0.1), (0.2, 0.2), (1.0, 0.0), (0.0, 0.0)] {
            let (e11, e12) = half_step(d, C64::from_polar(x, 0.7));
            assert!((e11.norm_sqr() - e12.norm_sqr() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn passive_is_unitary_circulant() {
        let g = TemporalGrid::new(-10.0, 30.0, 256).unwrap();
        let k = build_opo(&params(0.0, 1.0, 0.0), &g).unwrap();
        assert!(k.is_dispersive());
        let aa = k.a() * k.a().adjoint();
        assert!(linalg::max_abs((aa - linalg::identity(256)).as_ref()) < 1e-12);
        // Time invariance: rows are shifts of each other.
        for j in 1..256 {
            assert!((k.a()[(j, 0)] - k.a()[(0, (256 - j) % 256)]).norm() < 1e-12);
        }
    }

    #[test]
    fn passive_response_is_all_pass_lorentzian() {
        let n = 512;
        let g = TemporalGrid::new(-20.0, 60.0, n).unwrap();
        let delta = 0.3;
        let k = build_opo(&params(0.0, 1.0, delta), &g).unwrap();
        // Circulant eigenvalue at frequency ω: Σ_m a[m, 0] e^{iω t_m}.
        let dt = g.dt();
        for idx in [0usize, 3, 10, 25, 60] {
            let w = 2.0 * std::f64::consts::PI * idx as f64 / (n as f64 * dt);
            let mut s = C64::new(0.0, 0.0);
            for m in 0..n {
                s += k.a()[(m, 0)] * C64::from_polar(1.0, w * m as f64 * dt);
            }
            assert!((s.norm() - 1.0).abs() < 1e-3);
            let expected = C64::new(-0.5, delta - w) / C64::new(0.5, delta - w);
            assert!((s - expected).norm() < 2e-2, "w={w}: {s} vs {expected}");
        }
    }

    #[test]
    fn pumped_is_symplectic() {
        let g = TemporalGrid::new(-10.0, 30.0, 256).unwrap();
        for &(area, width, det) in &[(1.0, 0.5, 0.0), (1.5, 1.0, 0.3), (0.7, 0.05, -0.5), (2.0, 2.0, 1.0)] {
            let k = build_opo(&params(area, width, det), &g).unwrap();
            let r = verify_symplectic(&k);
            assert!(r.max() < 1e-11, "{r:?}");
            assert!(!k.is_dispersive());
        }
    }

    #[test]
    fn short_grid_rejected() {
        let g = TemporalGrid::new(-10.0, 5.0, 256).unwrap();
        match build_opo(&params(1.0, 0.5, 0.0), &g) {
            Err(Error::GridTooShort { remaining, suggested_t_end }) => {
                assert!(remaining > 1e-3);
                assert!(suggested_t_end > 5.0);
                let g2 = TemporalGrid::new(-10.0, suggested_t_end, 256).unwrap();
                assert!(build_opo(&params(1.0, 0.5, 0.0), &g2).is_ok());
            }
            other => panic!("expected GridTooShort, got {other:?}"),
        }
    }

    #[test]
    fn pump_outside_grid_rejected() {
        let g = TemporalGrid::new(-1.0, 30.0, 256).unwrap();
        assert!(build_opo(&params(1.0, 0.5, 0.0), &g).is_err());
    }

    #[test]
    fn negated_detuning_conjugates() {
        let g = TemporalGrid::new(-10.0, 30.0, 128).unwrap();
        let k1 = build_opo(&params(1.2, 0.6, 0.4), &g).unwrap();
        let k2 = build_opo(&params(1.2, 0.6, -0.4), &g).unwrap();
        let d = linalg::max_abs((k1.a() - linalg::conj(k2.a().as_ref())).as_ref());
        assert!(d < 1e-12);
    }

    #[test]
    fn pump_phase_rotates_squeezing() {
        let g = TemporalGrid::new(-10.0, 30.0, 128).unwrap();
        let mut p = params(1.0, 0.5, 0.0);
        let k0 = build_opo(&p, &g).unwrap();
        p.pump.phase = 0.9;
        let k1 = build_opo(&p, &g).unwrap();
        // Phase only enters through a† terms: B picks up e^{iφ}, A is unchanged.
        assert!(linalg::max_abs((k0.a() - k1.a()).as_ref()) < 1e-12);
        let ph = C64::from_polar(1.0, 0.9);
        let rotated = Mat::from_fn(128, 128, |i, j| k0.b()[(i, j)] * ph);
        assert!(linalg::max_abs((rotated - k1.b()).as_ref()) < 1e-12);
    }

    #[test]
    fn commutator_for_random_modes() {
        let g = TemporalGrid::new(-10.0, 30.0, 256).unwrap();
        let k = build_opo(&params(1.5, 1.0, 0.2), &g).unwrap();
        for c in [-2.0, 0.0, 1.0, 3.0] {
            let v = ModeFunction::gaussian(g, c, 0.8).unwrap();
            let pb = pullback_output_mode(&k, &v).unwrap();
            assert!((pb.zeta * pb.zeta - pb.xi * pb.xi - 1.0).abs() < 1e-10);
            assert!((inner_product(&pb.f, &pb.f).unwrap().re - 1.0).abs() < 1e-10);
        }
    }
}
