//! Device-to-metrics chain for a single input state.

use serde::Serialize;

use crate::bogoliubov::BogoliubovKernels;
use crate::coherence::{input_moments, seeded_spectrum, seeded_vacuum_split, InputMoments, ModeSpectrum};
use crate::metrics::{optimize_squeeze_fidelity, MetricBundle, SqueezeFitResult};
use crate::mode::ModeFunction;
use crate::state::charfn::{fock_from_source_within, CharSource, OutputChar, Quadrature, MAX_LOST_TRACE};
use crate::state::decomposition::{decompose_output_mode, gauge_output_mode, OutputDecomposition};
use crate::state::{QuantumState, StateSpec};
use crate::{Error, Result, C64};

/// Input state with a closed-form characteristic function when available.
#[derive(Clone, Debug)]
pub struct InputState {
    pub spec: Option<StateSpec>,
    pub state: QuantumState,
}

impl InputState {
    pub fn from_spec(spec: StateSpec, dim: usize) -> Result<Self> {
        Ok(Self { state: QuantumState::library(&spec, dim)?, spec: Some(spec) })
    }

    pub fn from_state(state: QuantumState) -> Self {
        Self { spec: None, state }
    }

    pub fn moments(&self) -> Result<InputMoments> {
        input_moments(&self.state)
    }
}

impl CharSource for InputState {
    fn chi(&self, beta: C64) -> C64 {
        match &self.spec {
            Some(s) => s.chi(beta),
            None => self.state.chi(beta),
        }
    }
}

/// Which output mode to analyse.
#[derive(Clone, Debug)]
pub enum ModeChoice {
    V1,
    V2,
    Explicit(ModeFunction),
}

#[derive(Clone, Debug)]
pub struct StateOptions {
    pub mode: ModeChoice,
    /// Fixed output truncation; chosen from the output photon number when absent.
    pub dim: Option<usize>,
    pub max_dim: usize,
    /// Trace allowed above the truncation before it is enlarged; at `max_dim`
    /// up to [`MAX_LOST_TRACE`] is accepted.
    pub tail_tolerance: f64,
    pub quadrature: Option<Quadrature>,
    /// Run the squeezing-fidelity fit against the input.
    pub fit: bool,
    pub r_grid: Option<Vec<f64>>,
    /// Use the full eigendecomposition rather than the two-dimensional seeded span.
    pub full_split: bool,
}

impl Default for StateOptions {
    fn default() -> Self {
        Self { mode: ModeChoice::V1, dim: None, max_dim: 120, tail_tolerance: 1e-6, quadrature: None, fit: true, r_grid: None, full_split: false }
    }
}

#[derive(Clone, Debug)]
pub struct StateRun {
    pub spectrum: ModeSpectrum,
    pub mode: ModeFunction,
    pub decomposition: OutputDecomposition,
    pub rho: QuantumState,
    pub fit: Option<SqueezeFitResult>,
    pub metrics: MetricBundle,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateSummary<'a> {
    pub metrics: &'a MetricBundle,
    pub coefficients: crate::state::decomposition::CoefficientRow,
    pub output_dim: usize,
    pub mean_photon_number: f64,
    pub fit_curve: Option<&'a [(f64, f64)]>,
}

impl StateRun {
    pub fn summary(&self) -> StateSummary<'_> {
        StateSummary {
            metrics: &self.metrics,
            coefficients: self.decomposition.row(),
            output_dim: self.rho.dim(),
            mean_photon_number: self.rho.mean_photon_number(),
            fit_curve: self.fit.as_ref().map(|f| f.fidelity_curve.as_slice()),
        }
    }
}

pub fn mode_spectrum(k: &BogoliubovKernels, u: &ModeFunction, moments: &InputMoments, full: bool) -> Result<ModeSpectrum> {
    if full {
        seeded_vacuum_split(k, u, moments)
    } else {
        seeded_spectrum(k, u, moments)
    }
}

/// Starting truncation for an output with mean photon number `n`; enlarged
/// on demand when the reconstruction misses trace.
pub fn suggested_dim(n: f64) -> usize {
    (1.5 * n + 10.0 * (n + 1.0).sqrt() + 24.0).ceil() as usize
}

pub fn run_state(k: &BogoliubovKernels, u: &ModeFunction, input: &InputState, opts: &StateOptions) -> Result<StateRun> {
    let moments = input.moments()?;
    let spectrum = mode_spectrum(k, u, &moments, opts.full_split)?;
    let raw = match &opts.mode {
        ModeChoice::V1 => spectrum.seeded.first().ok_or(Error::NoSeededModes)?.mode.clone(),
        ModeChoice::V2 => spectrum
            .seeded
            .get(1)
            .ok_or_else(|| Error::InvalidParameter("the input seeds only one output mode; v2 does not exist".into()))?
            .mode
            .clone(),
        ModeChoice::Explicit(m) => m.clone(),
    };
    let mode = gauge_output_mode(k, u, &raw)?;
    let decomposition = decompose_output_mode(k, u, &mode)?;
    let n_out = decomposition.mean_photon_number(moments.n, moments.m);
    let source = OutputChar::new(&decomposition, input);
    let mut dim = opts.dim.unwrap_or_else(|| suggested_dim(n_out).min(opts.max_dim));
    let rho = loop {
        let at_limit = opts.dim.is_some() || dim >= opts.max_dim;
        let tol = if at_limit { opts.tail_tolerance.max(MAX_LOST_TRACE) } else { opts.tail_tolerance };
        match fock_from_source_within(&source, dim, opts.quadrature, tol) {
            Err(Error::Truncation(msg)) if !at_limit => {
                log::info!("{msg}; enlarging truncation");
                dim = (dim * 3 / 2).min(opts.max_dim);
            }
            other => break other?,
        }
    };
    let fit = if opts.fit { Some(optimize_squeeze_fidelity(&rho, &input.state, opts.r_grid.as_deref())?) } else { None };
    let metrics = MetricBundle::from_spectrum(&spectrum).with_state(&rho, fit.as_ref());
    Ok(StateRun { spectrum, mode, decomposition, rho, fit, metrics })
}
