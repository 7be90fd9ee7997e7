use serde::{Deserialize, Serialize};

use super::opo::{build_opo, OpoParams};
use crate::bogoliubov::{compose_power, BogoliubovKernels};
use crate::grid::TemporalGrid;
use crate::{Error, Result};

/// Chain of identical OPO stages; `per_stage_gain` replaces the stage pump area.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwpaParams {
    pub stage: OpoParams,
    pub n_stages: usize,
    pub per_stage_gain: f64,
}

impl TwpaParams {
    /// Spread `total_gain` evenly over `n_stages`.
    pub fn with_total_gain(stage: OpoParams, n_stages: usize, total_gain: f64) -> Result<Self> {
        if n_stages == 0 {
            return Err(Error::InvalidParameter("n_stages must be at least 1".into()));
        }
        Ok(Self { stage, n_stages, per_stage_gain: total_gain / n_stages as f64 })
    }

    pub fn stage_params(&self) -> OpoParams {
        let mut s = self.stage;
        s.pump.area = self.per_stage_gain;
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_stages == 0 {
            return Err(Error::InvalidParameter("n_stages must be at least 1".into()));
        }
        self.stage_params().validate()
    }
}

pub fn build_twpa(params: &TwpaParams, grid: &TemporalGrid) -> Result<BogoliubovKernels> {
    params.validate()?;
    let stage = build_opo(&params.stage_params(), grid)?;
    compose_power(&stage, params.n_stages)
}
