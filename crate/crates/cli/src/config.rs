//! Experiment configuration: parsing, validation and sweep-point expansion.

use std::path::{Path, PathBuf};

use pulse_squeeze_core::devices::{GaussianPump, OpaParams, OpoParams, TwpaParams};
use pulse_squeeze_core::grid::GridSpec;
use pulse_squeeze_core::state::wigner::PhaseGrid;
use pulse_squeeze_core::state::StateSpec;
use pulse_squeeze_core::TemporalGrid;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MAX_SWEEP_AXES: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub device: DeviceConfig,
    pub input: InputConfig,
    #[serde(default)]
    pub output_mode: OutputModeConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeviceConfig {
    Opo(OpoParams),
    Opa(OpaParams),
    Twpa(TwpaParams),
    /// Pass-through kernels.
    Identity,
    /// Ideal single-mode squeezer acting on the input pulse mode.
    Squeezer { r: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub state: StateSpec,
    /// Fock truncation of the input state.
    #[serde(default = "default_input_dim")]
    pub dim: usize,
    #[serde(default)]
    pub pulse: PulseConfig,
}

fn default_input_dim() -> usize {
    pulse_squeeze_core::state::DEFAULT_DIM
}

/// Gaussian input mode `u(t) ∝ exp(−(t − center)²/(2 width²))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub center: f64,
    pub width: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self { center: 0.0, width: 1.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutputModeConfig {
    #[default]
    AutoV1,
    AutoV2,
    /// CSV with columns `t, re, im` on the configured grid.
    Explicit { file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Modes,
    State,
    Wigner,
    Metrics,
    Sweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub steps: Vec<Step>,
    /// Fixed output truncation; adaptive when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub max_dim: usize,
    /// Trace allowed above the output truncation before it is enlarged.
    pub tail_tolerance: f64,
    pub fit: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
    pub full_split: bool,
    pub max_vacuum_modes: usize,
    pub wigner: PhaseGrid,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            steps: vec![Step::Modes, Step::State, Step::Wigner, Step::Metrics],
            dim: None,
            max_dim: 120,
            tail_tolerance: 1e-6,
            fit: true,
            r_grid: None,
            full_split: false,
            max_vacuum_modes: 4,
            wigner: PhaseGrid::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn has(&self, step: Step) -> bool {
        self.steps.contains(&step)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<SweepAxis>,
}

/// A dotted parameter path with either a numeric range or explicit values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub param: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default)]
    pub scale: Scale,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<toml::Value>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl SweepAxis {
    pub fn values(&self) -> CliResult<Vec<toml::Value>> {
        match (&self.values, self.start, self.stop, self.points) {
            (Some(v), None, None, None) => {
                if v.is_empty() {
                    return Err(CliError::Config(format!("sweep axis `{}` has no values", self.param)));
                }
                Ok(v.clone())
            }
            (None, Some(a), Some(b), Some(n)) => {
                if n == 0 || !a.is_finite() || !b.is_finite() {
                    return Err(CliError::Config(format!("sweep axis `{}` needs finite bounds and points ≥ 1", self.param)));
                }
                if self.scale == Scale::Log && (a <= 0.0 || b <= 0.0) {
                    return Err(CliError::Config(format!("log sweep axis `{}` needs positive bounds", self.param)));
                }
                let at = |i: usize| {
                    let s = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                    match self.scale {
                        Scale::Linear => a + (b - a) * s,
                        Scale::Log => (a.ln() + (b.ln() - a.ln()) * s).exp(),
                    }
                };
                Ok((0..n).map(|i| toml::Value::Float(at(i))).collect())
            }
            _ => Err(CliError::Config(format!(
                "sweep axis `{}` needs either `values` or all of `start`, `stop`, `points`",
                self.param
            ))),
        }
    }

    /// Numeric coordinate of each value: the value itself, or its index when not numeric.
    pub fn coordinates(&self) -> CliResult<Vec<f64>> {
        let v = self.values()?;
        Ok(v.iter()
            .enumerate()
            .map(|(i, x)| match x {
                toml::Value::Float(f) => *f,
                toml::Value::Integer(n) => *n as f64,
                _ => i as f64,
            })
            .collect())
    }
}

/// One resolved sweep point.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub index: Vec<usize>,
    pub coords: Vec<f64>,
    pub config: ExperimentConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let OutputModeConfig::Explicit { file } = &mut cfg.output_mode {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> CliResult<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn temporal_grid(&self) -> CliResult<TemporalGrid> {
        Ok(TemporalGrid::try_from(self.grid)?)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.temporal_grid()?;
        match &self.device {
            DeviceConfig::Opo(p) => p.validate()?,
            DeviceConfig::Opa(p) => p.validate()?,
            DeviceConfig::Twpa(p) => p.validate()?,
            DeviceConfig::Identity => {}
            DeviceConfig::Squeezer { r } => {
                if !r.is_finite() {
                    return Err(CliError::Config(format!("device.r must be finite, got {r}")));
                }
            }
        }
        if !(self.input.pulse.width > 0.0) || !self.input.pulse.center.is_finite() {
            return Err(CliError::Config("input.pulse needs a finite center and positive width".into()));
        }
        if self.input.dim < 2 {
            return Err(CliError::Config("input.dim must be at least 2".into()));
        }
        let a = &self.analysis;
        if a.max_dim < 2 || a.dim.is_some_and(|d| d < 2) {
            return Err(CliError::Config("analysis dimensions must be at least 2".into()));
        }
        if !(a.tail_tolerance > 0.0 && a.tail_tolerance < 1.0) {
            return Err(CliError::Config("analysis.tail_tolerance must lie in (0, 1)".into()));
        }
        if !(a.wigner.extent > 0.0) || a.wigner.n_side < 2 {
            return Err(CliError::Config("analysis.wigner needs a positive extent and at least 2 points".into()));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.axes.is_empty() || sweep.axes.len() > MAX_SWEEP_AXES {
                return Err(CliError::Config(format!(
                    "sweep needs between 1 and {MAX_SWEEP_AXES} axes, got {}",
                    sweep.axes.len()
                )));
            }
            let base = self.without_sweep();
            for axis in &sweep.axes {
                for v in axis.values()? {
                    base.with_param(&axis.param, v)?;
                }
            }
        }
        Ok(())
    }

    pub fn without_sweep(&self) -> ExperimentConfig {
        ExperimentConfig { sweep: None, ..self.clone() }
    }

    /// Copy with the dotted parameter `path` replaced; the key must already exist.
    pub fn with_param(&self, path: &str, value: toml::Value) -> CliResult<ExperimentConfig> {
        let mut doc = toml::Value::try_from(self.without_sweep()).map_err(|e| CliError::Config(e.to_string()))?;
        let mut slot = &mut doc;
        for key in path.split('.') {
            slot = slot
                .as_table_mut()
                .and_then(|t| t.get_mut(key))
                .ok_or_else(|| CliError::Config(format!("unknown parameter `{path}` for this configuration")))?;
        }
        *slot = match (&*slot, value) {
            (toml::Value::Integer(_), toml::Value::Float(f)) if f.fract() == 0.0 => toml::Value::Integer(f as i64),
            (toml::Value::Float(_), toml::Value::Integer(n)) => toml::Value::Float(n as f64),
            (_, v) => v,
        };
        let cfg: ExperimentConfig =
            doc.try_into().map_err(|e: toml::de::Error| CliError::Config(format!("setting `{path}`: {e}")))?;
        Ok(ExperimentConfig { sweep: self.sweep.clone(), ..cfg })
    }

    /// Apply a `path=value` override, parsing `value` as a TOML value (bare words as strings).
    pub fn with_override(&self, assignment: &str) -> CliResult<ExperimentConfig> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not of the form key=value")))?;
        let (path, raw) = (path.trim(), raw.trim());
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        let top = path.split('.').next().unwrap_or_default();
        let cfg = if top == "sweep" {
            let mut doc = toml::Value::try_from(self).map_err(|e| CliError::Config(e.to_string()))?;
            if let Some(t) = doc.as_table_mut() {
                t.entry("sweep").or_insert_with(|| toml::Value::Table(toml::Table::new()));
            }
            set_path(&mut doc, path, value)?;
            doc.try_into().map_err(|e: toml::de::Error| CliError::Config(format!("setting `{path}`: {e}")))?
        } else {
            self.with_param(path, value)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every sweep point in row-major order (last axis fastest); a single point without a sweep.
    pub fn sweep_points(&self) -> CliResult<Vec<SweepPoint>> {
        let base = self.without_sweep();
        let Some(sweep) = &self.sweep else {
            return Ok(vec![SweepPoint { index: vec![], coords: vec![], config: base }]);
        };
        let values: Vec<Vec<toml::Value>> = sweep.axes.iter().map(|a| a.values()).collect::<CliResult<_>>()?;
        let coords: Vec<Vec<f64>> = sweep.axes.iter().map(|a| a.coordinates()).collect::<CliResult<_>>()?;
        let mut out = Vec::new();
        let mut index = vec![0usize; values.len()];
        loop {
            let mut cfg = base.clone();
            for (k, axis) in sweep.axes.iter().enumerate() {
                cfg = cfg.with_param(&axis.param, values[k][index[k]].clone())?;
            }
            let c = index.iter().enumerate().map(|(k, &i)| coords[k][i]).collect();
            out.push(SweepPoint { index: index.clone(), coords: c, config: cfg });
            let mut k = values.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                index[k] += 1;
                if index[k] < values[k].len() {
                    break;
                }
                index[k] = 0;
            }
        }
    }

    pub fn pump(&self) -> Option<&GaussianPump> {
        match &self.device {
            DeviceConfig::Opo(p) => Some(&p.pump),
            DeviceConfig::Twpa(p) => Some(&p.stage.pump),
            _ => None,
        }
    }
}

/// Sets a dotted path inside `doc`; the last key may be new when its parent is a table.
fn set_path(doc: &mut toml::Value, path: &str, value: toml::Value) -> CliResult<()> {
    let unknown = || CliError::Config(format!("unknown parameter `{path}`"));
    let (parents, last) = path.rsplit_once('.').map_or(("", path), |(p, l)| (p, l));
    let mut slot = doc;
    for key in parents.split('.').filter(|k| !k.is_empty()) {
        slot = match slot {
            toml::Value::Table(t) => t.get_mut(key),
            toml::Value::Array(a) => key.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
            _ => None,
        }
        .ok_or_else(unknown)?;
    }
    match slot {
        toml::Value::Table(t) => {
            t.insert(last.to_string(), value);
        }
        toml::Value::Array(a) => *last.parse::<usize>().ok().and_then(|i| a.get_mut(i)).ok_or_else(unknown)? = value,
        _ => return Err(unknown()),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[grid]
t_start = -8.0
t_end = 24.0
n_points = 64

[device]
kind = "opo"
detuning = 0.0
decay = 1.0
pump = { area = 1.0, center = 0.5, width = 0.3 }

[input]
state = { kind = "fock", n = 1 }
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_toml(BASIC).unwrap();
        assert_eq!(c.input.dim, 60);
        assert_eq!(c.output_mode, OutputModeConfig::AutoV1);
        assert!(c.analysis.has(Step::Metrics));
        assert_eq!(c.pump().unwrap().phase, 0.0);
    }

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::from_toml(BASIC).unwrap();
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash().unwrap(), again.hash().unwrap());
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let bad = BASIC.replace("decay = 1.0", "decay = 1.0\ngain = 2.0");
        let e = ExperimentConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(e.contains("gain"), "{e}");
        assert!(e.contains("line"), "{e}");
    }

    #[test]
    fn parameter_paths() {
        let c = ExperimentConfig::from_toml(BASIC).unwrap();
        let d = c.with_param("device.pump.width", toml::Value::Float(0.7)).unwrap();
        assert_eq!(d.pump().unwrap().width, 0.7);
        let d = c.with_param("grid.n_points", toml::Value::Float(128.0)).unwrap();
        assert_eq!(d.grid.n_points, 128);
        assert!(c.with_param("device.gain", toml::Value::Float(1.0)).is_err());
        assert!(c.with_param("input.state.re", toml::Value::Float(1.0)).is_err());
        let d = c.with_override("input.state = { kind = \"coherent\", re = 1.5 }").unwrap();
        assert_eq!(d.input.state, StateSpec::Coherent { re: 1.5, im: 0.0 });
    }

    #[test]
    fn sweep_expansion_is_row_major() {
        let text = format!(
            "{BASIC}\n[[sweep.axes]]\nparam = \"device.pump.center\"\nvalues = [0.0, 1.0]\n\n[[sweep.axes]]\nparam = \"device.pump.width\"\nstart = 0.1\nstop = 1.0\npoints = 3\nscale = \"log\"\n"
        );
        let c = ExperimentConfig::from_toml(&text).unwrap();
        let pts = c.sweep_points().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1].index, vec![0, 1]);
        assert!((pts[1].config.pump().unwrap().width - 0.1f64.sqrt()).abs() < 1e-12);
        assert_eq!(pts[3].config.pump().unwrap().center, 1.0);
        assert!(pts.iter().all(|p| p.config.sweep.is_none()));
    }

    #[test]
    fn too_many_axes() {
        let axis = "[[sweep.axes]]\nparam = \"device.pump.area\"\nvalues = [1.0]\n";
        let text = format!("{BASIC}\n{axis}{axis}{axis}");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }
}
