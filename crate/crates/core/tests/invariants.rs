mod support;

use proptest::prelude::*;
use pulse_squeeze_core::coherence::{g1_total, input_moments, seeded_vacuum_split};
use pulse_squeeze_core::devices::{build_opo, GaussianPump, OpoParams};
use pulse_squeeze_core::metrics::{covariance, fidelity, gaussian_purity, purity, quadrature_variance};
use pulse_squeeze_core::pipeline::{run_state, InputState, StateOptions};
use pulse_squeeze_core::state::charfn::{char_of_state, fock_from_char, CharSource, OutputChar};
use pulse_squeeze_core::state::{CharGrid, StateSpec};
use pulse_squeeze_core::{BogoliubovKernels, ModeFunction, QuantumState, TemporalGrid, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{random_state, trace_distance};

fn grid() -> TemporalGrid {
    TemporalGrid::new(-8.0, 24.0, 160).unwrap()
}

fn opo(area: f64, center: f64, width: f64, detuning: f64, phase: f64) -> BogoliubovKernels {
    let pump = GaussianPump::new(area, center, width).with_phase(phase);
    build_opo(&OpoParams { detuning, decay: 1.0, pump }, &grid()).unwrap()
}

fn pump_params() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (0.0..0.8f64, -1.0..2.0f64, 0.1..1.0f64, -0.8..0.8f64, 0.0..std::f64::consts::TAU)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn unpumped_cavity_conserves_photon_number(seed in 0u64..1000, detuning in -1.0..1.0f64) {
        let k = opo(0.0, 0.0, 0.3, detuning, 0.0);
        let u = ModeFunction::gaussian(grid(), 0.0, 1.0).unwrap();
        let state = random_state(&mut ChaCha8Rng::seed_from_u64(seed), 8, 2);
        let s = seeded_vacuum_split(&k, &u, &input_moments(&state).unwrap()).unwrap();
        let n_in = state.mean_photon_number();
        prop_assert!((s.total - n_in).abs() < 1e-6 * n_in.max(1.0), "{} vs {}", s.total, n_in);
    }

    #[test]
    fn coherence_trace_splits_and_is_positive((a, c, w, d, ph) in pump_params(), seed in 0u64..1000) {
        let k = opo(a, c, w, d, ph);
        let u = ModeFunction::gaussian(grid(), 0.0, 1.0).unwrap();
        let state = random_state(&mut ChaCha8Rng::seed_from_u64(seed), 8, 2);
        let mo = input_moments(&state).unwrap();
        let s = seeded_vacuum_split(&k, &u, &mo).unwrap();
        let parts = s.seeded_total() + s.seeded_remainder + s.vacuum_total() + s.vacuum_remainder;
        prop_assert!((parts - s.total).abs() < 1e-6 * s.total.abs().max(1e-12));
        let modes = g1_total(&k, &u, &mo).unwrap().eigendecompose();
        prop_assert!(modes.is_ok(), "g1 not positive semidefinite: {:?}", modes.err());
    }

    #[test]
    fn reconstructed_states_are_physical((a, c, w, d, ph) in pump_params(), seed in 0u64..1000, theta in 0.0..3.2f64) {
        let k = opo(a, c, w, d, ph);
        let u = ModeFunction::gaussian(grid(), 0.0, 1.0).unwrap();
        let input = InputState::from_state(random_state(&mut ChaCha8Rng::seed_from_u64(seed), 6, 2));
        let run = run_state(&k, &u, &input, &StateOptions { fit: false, ..StateOptions::default() }).unwrap();
        prop_assert!(run.decomposition.commutator_defect().abs() < 1e-6);
        let source = OutputChar::new(&run.decomposition, &input.state);
        prop_assert!((source.chi(C64::new(0.0, 0.0)) - 1.0).norm() < 1e-12);
        let p = purity(&run.rho);
        prop_assert!(p <= 1.0 + 1e-9 && p > 0.0, "purity {p}");
        let target = QuantumState::fock(1, run.rho.dim()).unwrap();
        let f = fidelity(&run.rho, &target).unwrap();
        prop_assert!((0.0..=1.0).contains(&f), "fidelity {f}");
        let prod = quadrature_variance(&run.rho, theta) * quadrature_variance(&run.rho, theta + std::f64::consts::FRAC_PI_2);
        prop_assert!(prod >= 0.25 - 1e-4, "uncertainty product {prod}");
    }

    #[test]
    fn gaussian_outputs_match_covariance_purity((a, c, w, d, ph) in pump_params(), re in -1.5..1.5f64, im in -1.5..1.5f64) {
        let k = opo(a, c, w, d, ph);
        let u = ModeFunction::gaussian(grid(), 0.0, 1.0).unwrap();
        let input = InputState::from_spec(StateSpec::Coherent { re, im }, 40).unwrap();
        let run = run_state(&k, &u, &input, &StateOptions { fit: false, ..StateOptions::default() }).unwrap();
        let direct = purity(&run.rho);
        let gaussian = gaussian_purity(&covariance(&run.rho));
        prop_assert!((direct - gaussian).abs() < 1e-3, "{direct} vs {gaussian}");
    }

    #[test]
    fn char_fock_round_trip(seed in 0u64..1000) {
        let state = random_state(&mut ChaCha8Rng::seed_from_u64(seed), 8, 3);
        let chi = char_of_state(&state, CharGrid { extent: 9.0, n_side: 181 });
        let back = fock_from_char(&chi, 8).unwrap();
        let td = trace_distance(back.rho(), state.rho());
        prop_assert!(td < 1e-5, "trace distance {td:e}");
    }
}

#[test]
fn seeded_occupations_converge_with_grid() {
    let u_at = |g: TemporalGrid| ModeFunction::gaussian(g, 0.0, 1.0).unwrap();
    let params = OpoParams { detuning: 0.3, decay: 1.0, pump: GaussianPump::new(0.9, 0.5, 0.4) };
    let mo = input_moments(&QuantumState::fock(1, 4).unwrap()).unwrap();
    let at = |n: usize| {
        let g = TemporalGrid::new(-8.0, 24.0, n).unwrap();
        let s = seeded_vacuum_split(&build_opo(&params, &g).unwrap(), &u_at(g), &mo).unwrap();
        (s.n1(), s.n2())
    };
    let (coarse, fine) = (at(256), at(512));
    assert!((coarse.0 - fine.0).abs() < 0.01 * fine.0, "{coarse:?} {fine:?}");
    assert!((coarse.1 - fine.1).abs() < 0.01 * fine.1, "{coarse:?} {fine:?}");
}
