//! Comparison schemes. Each reuses the proposed blocks with one variable
//! frozen and is scored by the same SEE evaluation.

use crate::ao::{run_plan, AngleStrategy, AoConfig, AoResult, BlockPlan};
use crate::error::Result;
use crate::scenario::Scenario;

pub const FIXED_ANTENNA: BlockPlan = BlockPlan {
    trajectory: true,
    angles: AngleStrategy::Fixed,
    beams: true,
};

pub const DIRECT_PATH: BlockPlan = BlockPlan {
    trajectory: false,
    angles: AngleStrategy::Optimize,
    beams: true,
};

pub const EVE_ORIENTED: BlockPlan = BlockPlan {
    trajectory: true,
    angles: AngleStrategy::TrackEve,
    beams: true,
};

/// Panel fixed at zero rotation; no actuation energy is charged.
pub fn baseline_fixed_antenna(scenario: &Scenario, config: &AoConfig) -> Result<AoResult> {
    run_plan(scenario, config, &FIXED_ANTENNA)
}

/// Uniform straight flight from `q_i` to `q_f`.
pub fn baseline_direct_path(scenario: &Scenario, config: &AoConfig) -> Result<AoResult> {
    run_plan(scenario, config, &DIRECT_PATH)
}

/// Array boresight kept on the nominal eavesdropper position.
pub fn baseline_eve_oriented(scenario: &Scenario, config: &AoConfig) -> Result<AoResult> {
    run_plan(scenario, config, &EVE_ORIENTED)
}
