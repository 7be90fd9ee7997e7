//! Built-in invariant suite for the `verify` subcommand.

use std::fmt::Write as _;

use pulse_squeeze_core::bogoliubov::{ideal_squeezer_kernels, pullback_output_mode, verify_symplectic};
use pulse_squeeze_core::devices::{build_opa, build_opo, build_twpa, GaussianPump, OpaParams, OpoParams, TwpaParams};
use pulse_squeeze_core::metrics::fidelity;
use pulse_squeeze_core::pipeline::{mode_spectrum, run_state, InputState, ModeChoice, StateOptions};
use pulse_squeeze_core::state::bloch_messiah::bloch_messiah_params;
use pulse_squeeze_core::state::charfn::{CharFunction, OutputChar};
use pulse_squeeze_core::state::decomposition::decompose_output_mode;
use pulse_squeeze_core::state::wigner::{wigner_from_char, PhaseGrid};
use pulse_squeeze_core::state::StateSpec;
use pulse_squeeze_core::{BogoliubovKernels, ModeFunction, Result, TemporalGrid, C64};
use serde::Serialize;

use crate::commands::char_grid_for;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    fn from_result(name: &'static str, tolerance: f64, r: Result<f64>) -> Self {
        match r {
            Ok(residual) => Check { name, residual, tolerance, passed: residual.is_finite() && residual < tolerance, error: None },
            Err(e) => Check { name, residual: f64::NAN, tolerance, passed: false, error: Some(e.to_string()) },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<34} {:>12} {:>10}  result", "check", "residual", "tolerance");
        for c in &self.checks {
            let _ = write!(
                s,
                "{:<34} {:>12.3e} {:>10.1e}  {}",
                c.name,
                c.residual,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" }
            );
            if let Some(e) = &c.error {
                let _ = write!(s, " ({e})");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "{} of {} checks passed", self.checks.len() - self.failures(), self.checks.len());
        s
    }
}

fn time_grid() -> Result<TemporalGrid> {
    TemporalGrid::new(-8.0, 24.0, 192)
}

fn opo_params() -> OpoParams {
    OpoParams { detuning: 0.3, decay: 1.0, pump: GaussianPump::new(1.2, 0.5, 0.3) }
}

/// Scales `B` so that the symplectic conditions break by about `1e-3`.
fn corrupt(k: BogoliubovKernels) -> Result<BogoliubovKernels> {
    let (grid, a, b) = k.into_parts();
    let b = pulse_squeeze_core::linalg::scale(b.as_ref(), 1.001);
    BogoliubovKernels::from_discrete(grid, a, b)
}

fn symplectic(k: &BogoliubovKernels) -> f64 {
    verify_symplectic(k).max()
}

/// Runs every check; `corrupt_injection` perturbs the OPO kernels before their symplectic check.
pub fn run_verify(corrupt_injection: bool) -> VerifyReport {
    let mut checks = Vec::new();
    let opo = time_grid().and_then(|g| build_opo(&opo_params(), &g));

    checks.push(Check::from_result(
        "opo_symplectic",
        1e-9,
        opo.as_ref().map_err(clone_err).and_then(|k| {
            if corrupt_injection {
                corrupt(k.clone()).map(|c| symplectic(&c))
            } else {
                Ok(symplectic(k))
            }
        }),
    ));
    checks.push(Check::from_result(
        "opa_symplectic",
        1e-9,
        TemporalGrid::new(-8.0, 8.0, 161).and_then(|g| {
            let p = OpaParams { gain: 1.5, pump_center_detuning: 0.2, pump_spectral_width: 0.8 };
            build_opa(&p, &g).map(|k| symplectic(&k))
        }),
    ));
    checks.push(Check::from_result(
        "twpa_symplectic",
        1e-8,
        time_grid().and_then(|g| {
            let p = TwpaParams::with_total_gain(opo_params(), 20, 1.0)?;
            build_twpa(&p, &g).map(|k| symplectic(&k))
        }),
    ));

    let r = 0.5;
    checks.push(Check::from_result(
        "ideal_squeezer_coefficients",
        1e-10,
        time_grid().and_then(|g| {
            let u = ModeFunction::gaussian(g, 0.0, 1.0)?;
            let k = ideal_squeezer_kernels(g, &u, r)?;
            let d = decompose_output_mode(&k, &u, &u)?;
            let [a, b, c, dd, e] = d.coefficients();
            Ok((a - C64::new(r.cosh(), 0.0)).norm() + (b - C64::new(r.sinh(), 0.0)).norm() + c.norm() + dd.norm() + e.norm())
        }),
    ));

    let cat = StateSpec::EvenCat { re: 1.5, im: 0.0 };
    let opo_cat = || -> Result<_> {
        let g = time_grid()?;
        let k = opo.as_ref().map_err(clone_err)?;
        let u = ModeFunction::gaussian(g, 0.0, 1.0)?;
        let input = InputState::from_spec(cat.clone(), 30)?;
        let s = mode_spectrum(k, &u, &input.moments()?, true)?;
        let v1 = s.seeded.first().ok_or(pulse_squeeze_core::Error::NoSeededModes)?.mode.clone();
        Ok((k, u, input, s, v1))
    };
    checks.push(Check::from_result(
        "pullback_commutator",
        1e-8,
        opo_cat().and_then(|(k, _, _, _, v1)| {
            let p = pullback_output_mode(k, &v1)?;
            Ok((p.zeta * p.zeta - p.xi * p.xi - 1.0).abs())
        }),
    ));
    checks.push(Check::from_result(
        "decomposition_commutator",
        1e-8,
        opo_cat().and_then(|(k, u, _, _, v1)| Ok(decompose_output_mode(k, &u, &v1)?.commutator_defect().abs())),
    ));
    checks.push(Check::from_result(
        "bloch_messiah_reconstruction",
        1e-8,
        opo_cat().and_then(|(k, u, _, _, v1)| {
            let d = decompose_output_mode(k, &u, &v1)?;
            let bm = bloch_messiah_params(&d)?;
            let rec = bm.reconstruct();
            Ok(rec.iter().zip(d.coefficients()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
        }),
    ));
    checks.push(Check::from_result(
        "fock_seeds_two_modes",
        1e-8,
        opo.as_ref().map_err(clone_err).and_then(|k| {
            let u = ModeFunction::gaussian(*k.grid(), 0.0, 1.0)?;
            let input = InputState::from_spec(StateSpec::Fock { n: 1 }, 4)?;
            let s = mode_spectrum(k, &u, &input.moments()?, true)?;
            if s.seeded.len() != 2 {
                return Ok(f64::INFINITY);
            }
            Ok(s.seeded_remainder.abs() / s.seeded_total())
        }),
    ));
    checks.push(Check::from_result(
        "coherent_seeds_one_mode",
        1e-8,
        opo.as_ref().map_err(clone_err).and_then(|k| {
            let u = ModeFunction::gaussian(*k.grid(), 0.0, 1.0)?;
            let input = InputState::from_spec(StateSpec::Coherent { re: 1.0, im: 0.5 }, 30)?;
            let s = mode_spectrum(k, &u, &input.moments()?, true)?;
            Ok(s.n2() / s.n1())
        }),
    ));

    let squeezed = || -> Result<_> {
        let g = time_grid()?;
        let u = ModeFunction::gaussian(g, 0.0, 1.0)?;
        let k = ideal_squeezer_kernels(g, &u, r)?;
        let input = InputState::from_spec(StateSpec::Vacuum, 4)?;
        let opts = StateOptions { mode: ModeChoice::Explicit(u.clone()), dim: Some(40), fit: false, ..StateOptions::default() };
        Ok((run_state(&k, &u, &input, &opts)?, input))
    };
    checks.push(Check::from_result(
        "squeezed_vacuum_populations",
        1e-8,
        squeezed().map(|(run, _)| {
            let t = r.tanh();
            let mut err = 0.0f64;
            let mut coef = 1.0 / r.cosh();
            for n in 0..15 {
                err = err.max((run.rho.population(2 * n) - coef).abs());
                err = err.max(run.rho.population(2 * n + 1).abs());
                coef *= t * t * ((2 * n + 1) as f64) / ((2 * n + 2) as f64);
            }
            err
        }),
    ));
    checks.push(Check::from_result(
        "wigner_normalization",
        1e-4,
        squeezed().and_then(|(run, input)| {
            let out = PhaseGrid { extent: 6.0, n_side: 61 };
            let source = OutputChar::new(&run.decomposition, &input);
            let chi = CharFunction::sample_auto(&source, char_grid_for(&out), 20.0)?;
            Ok((wigner_from_char(&chi, out).integral() - 1.0).abs())
        }),
    ));
    checks.push(Check::from_result(
        "dispersive_fidelity",
        1e-6,
        time_grid().and_then(|g| {
            let p = OpoParams { detuning: 0.5, decay: 1.0, pump: GaussianPump::new(0.0, 0.5, 0.3) };
            let k = build_opo(&p, &g)?;
            let u = ModeFunction::gaussian(g, 0.0, 1.0)?;
            let input = InputState::from_spec(StateSpec::Coherent { re: 1.0, im: 0.0 }, 30)?;
            let run = run_state(&k, &u, &input, &StateOptions { fit: false, ..StateOptions::default() })?;
            Ok(1.0 - fidelity(&run.rho, &input.state.with_dim(run.rho.dim())?)?)
        }),
    ));
    VerifyReport { checks }
}

fn clone_err(e: &pulse_squeeze_core::Error) -> pulse_squeeze_core::Error {
    pulse_squeeze_core::Error::Numerical(e.to_string())
}
