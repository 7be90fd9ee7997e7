//! Turning a resolved configuration into kernels, input states and pipeline runs.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use pulse_squeeze_core::bogoliubov::{identity_kernels, ideal_squeezer_kernels};
use pulse_squeeze_core::devices::{build_opa, build_opo, build_twpa};
use pulse_squeeze_core::pipeline::{mode_spectrum, run_state, InputState, ModeChoice, StateOptions, StateRun};
use pulse_squeeze_core::{BogoliubovKernels, ModeFunction, ModeSpectrum, C64};

use crate::config::{DeviceConfig, ExperimentConfig, OutputModeConfig};
use crate::error::{CliError, CliResult, Context};

pub fn input_mode(cfg: &ExperimentConfig) -> CliResult<ModeFunction> {
    let grid = cfg.temporal_grid()?;
    ModeFunction::gaussian(grid, cfg.input.pulse.center, cfg.input.pulse.width).context(|| "input pulse".into())
}

pub fn input_state(cfg: &ExperimentConfig) -> CliResult<InputState> {
    InputState::from_spec(cfg.input.state.clone(), cfg.input.dim).context(|| "input state".into())
}

pub fn build_kernels(cfg: &ExperimentConfig) -> CliResult<BogoliubovKernels> {
    let grid = cfg.temporal_grid()?;
    let k = match &cfg.device {
        DeviceConfig::Opo(p) => build_opo(p, &grid),
        DeviceConfig::Opa(p) => build_opa(p, &grid),
        DeviceConfig::Twpa(p) => build_twpa(p, &grid),
        DeviceConfig::Identity => Ok(identity_kernels(grid)),
        DeviceConfig::Squeezer { r } => ideal_squeezer_kernels(grid, &input_mode(cfg)?, *r),
    };
    k.context(|| "building device kernels".into())
}

/// Kernels shared between points that differ only in their input.
#[derive(Default)]
pub struct KernelCache {
    entries: Mutex<HashMap<String, Arc<BogoliubovKernels>>>,
}

impl KernelCache {
    pub fn get(&self, cfg: &ExperimentConfig) -> CliResult<Arc<BogoliubovKernels>> {
        let mut key = toml::to_string(&cfg.grid).map_err(|e| CliError::Config(e.to_string()))?;
        key.push_str(&toml::to_string(&cfg.device).map_err(|e| CliError::Config(e.to_string()))?);
        if matches!(cfg.device, DeviceConfig::Squeezer { .. }) {
            key.push_str(&format!("{:?}", cfg.input.pulse));
        }
        if let Some(k) = self.entries.lock().expect("kernel cache poisoned").get(&key) {
            return Ok(k.clone());
        }
        let k = Arc::new(build_kernels(cfg)?);
        self.entries.lock().expect("kernel cache poisoned").insert(key, k.clone());
        Ok(k)
    }
}

pub fn spectrum(k: &BogoliubovKernels, cfg: &ExperimentConfig) -> CliResult<ModeSpectrum> {
    let u = input_mode(cfg)?;
    let moments = input_state(cfg)?.moments().context(|| "input moments".into())?;
    mode_spectrum(k, &u, &moments, cfg.analysis.full_split).context(|| "mode analysis".into())
}

pub fn state_options(cfg: &ExperimentConfig, fit: bool) -> CliResult<StateOptions> {
    let mode = match &cfg.output_mode {
        OutputModeConfig::AutoV1 => ModeChoice::V1,
        OutputModeConfig::AutoV2 => ModeChoice::V2,
        OutputModeConfig::Explicit { file } => ModeChoice::Explicit(read_mode(file, cfg)?),
    };
    let a = &cfg.analysis;
    Ok(StateOptions {
        mode,
        dim: a.dim,
        max_dim: a.max_dim,
        tail_tolerance: a.tail_tolerance,
        quadrature: None,
        fit: fit && a.fit,
        r_grid: a.r_grid.clone(),
        full_split: a.full_split,
    })
}

pub fn state(k: &BogoliubovKernels, cfg: &ExperimentConfig, fit: bool) -> CliResult<StateRun> {
    let u = input_mode(cfg)?;
    let input = input_state(cfg)?;
    run_state(k, &u, &input, &state_options(cfg, fit)?).context(|| "output state".into())
}

/// Reads `t, re, im` rows (lines starting with `#` and a header are skipped).
pub fn read_mode(path: &Path, cfg: &ExperimentConfig) -> CliResult<ModeFunction> {
    let grid = cfg.temporal_grid()?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read mode file {}: {e}", path.display())))?;
    let mut amps = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('t') {
            continue;
        }
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), line_no + 1)))?;
        if cells.len() != 3 {
            return Err(CliError::Config(format!(
                "{}:{}: expected 3 columns (t, re, im), found {}",
                path.display(),
                line_no + 1,
                cells.len()
            )));
        }
        amps.push(C64::new(cells[1], cells[2]));
    }
    if amps.len() != grid.n_points() {
        return Err(CliError::Config(format!(
            "mode file {} has {} rows, grid has {} points",
            path.display(),
            amps.len(),
            grid.n_points()
        )));
    }
    ModeFunction::new(grid, amps).context(|| "explicit output mode".into())
}
