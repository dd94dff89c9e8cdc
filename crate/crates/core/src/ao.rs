//! Alternating optimization: trajectory, then angles, then beams, repeated
//! until SEE stops moving.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::angles::{optimize_angles, track_eve, AngleConfig};
use crate::beam::{optimize_beams, BeamConfig};
use crate::channel::{channel, BoundMode};
use crate::error::{Error, Result};
use crate::fractional::DinkelbachRecord;
use crate::metrics::{mrt_beam, see_objective, Problem, SEEReport, SolutionState};
use crate::scenario::Scenario;
use crate::trajectory::{optimize_trajectory, TrajConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoConfig {
    pub eps_th: f64,
    pub max_outer: usize,
    pub bound: BoundMode,
    pub seed: u64,
    pub traj: TrajConfig,
    pub angles: AngleConfig,
    pub beams: BeamConfig,
}

impl Default for AoConfig {
    fn default() -> Self {
        AoConfig {
            eps_th: 1e-4,
            max_outer: 50,
            bound: BoundMode::default(),
            seed: 0,
            traj: TrajConfig::default(),
            angles: AngleConfig::default(),
            beams: BeamConfig::default(),
        }
    }
}

impl AoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_th > 0.0) {
            return Err(Error::schema("eps_th", format!("must be > 0, got {}", self.eps_th)));
        }
        if self.max_outer == 0 {
            return Err(Error::schema("max_outer", "must be >= 1"));
        }
        Ok(())
    }
}

/// How the MA angles are handled by a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleStrategy {
    Optimize,
    /// Held at zero; the array is a fixed panel with no actuation energy.
    Fixed,
    /// Boresight toward the nominal eve, re-pointed whenever the trajectory
    /// changes (subject to the angular rate limits).
    TrackEve,
}

/// Which variables a scheme optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPlan {
    pub trajectory: bool,
    pub angles: AngleStrategy,
    pub beams: bool,
}

impl BlockPlan {
    pub const PROPOSED: BlockPlan = BlockPlan {
        trajectory: true,
        angles: AngleStrategy::Optimize,
        beams: true,
    };

    pub fn movable_array(&self) -> bool {
        self.angles != AngleStrategy::Fixed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 0 is the initial state.
    pub k: usize,
    pub see: f64,
    pub sum_secrecy: f64,
    pub total_energy: f64,
    /// SEE change contributed by each block in this iteration.
    pub traj_delta: f64,
    pub angle_delta: f64,
    pub beam_delta: f64,
    /// Blocks that failed and were skipped, with the reason.
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub iterations: Vec<IterationRecord>,
    pub dinkelbach: Vec<DinkelbachRecord>,
    pub wall_time: Duration,
    pub converged: bool,
}

impl ConvergenceTrace {
    pub fn see_values(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.see).collect()
    }

    /// Largest drop between consecutive iterations (0 when monotone).
    pub fn worst_decrease(&self) -> f64 {
        self.iterations
            .windows(2)
            .map(|w| w[0].see - w[1].see)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct AoResult {
    pub state: SolutionState,
    pub report: SEEReport,
    pub trace: ConvergenceTrace,
}

/// Straight flight with the plan's starting angles and unit MRT beams
/// toward the nominal eve.
pub fn initial_state(scenario: &Scenario, plan: &BlockPlan) -> Result<SolutionState> {
    let mut st = SolutionState::straight_line(scenario);
    if plan.angles == AngleStrategy::TrackEve {
        st.orientations = track_eve(&st, scenario)?;
    }
    let geom = scenario.ma_geometry();
    for k in 0..st.slots() {
        let h = channel(
            st.trajectory[k + 1],
            scenario.q_e,
            st.orientations[k],
            &geom,
            scenario.alpha_je,
            scenario.frequency,
        )?;
        st.beams[k] = mrt_beam(&h.gain)?;
    }
    Ok(st)
}

fn record(k: usize, report: &SEEReport) -> IterationRecord {
    IterationRecord {
        k,
        see: report.see,
        sum_secrecy: report.sum_secrecy,
        total_energy: report.total_energy,
        traj_delta: 0.0,
        angle_delta: 0.0,
        beam_delta: 0.0,
        skipped: Vec::new(),
    }
}

/// Runs the alternating optimization for one scheme.
pub fn run_plan(scenario: &Scenario, config: &AoConfig, plan: &BlockPlan) -> Result<AoResult> {
    config.validate()?;
    let started = Instant::now();
    let problem = Problem::new(scenario.clone(), config.bound, plan.movable_array())?;
    let mut state = initial_state(scenario, plan)?;
    let mut see = problem.see(&state)?;
    let mut iterations = vec![record(0, &see_objective(&state, &problem)?)];
    let mut dinkelbach = Vec::new();
    let mut converged = false;

    for k in 1..=config.max_outer {
        let mut rec = record(k, &see_objective(&state, &problem)?);
        let start_see = see;

        if plan.trajectory {
            match optimize_trajectory(&state, &problem, &config.traj) {
                Ok(out) => {
                    dinkelbach.extend(out.records);
                    if let Some(w) = out.warning {
                        rec.skipped.push(w);
                    }
                    let mut candidate = out.state;
                    if plan.angles == AngleStrategy::TrackEve {
                        candidate.orientations = track_eve(&candidate, scenario)?;
                    }
                    let candidate_see = problem.see(&candidate)?;
                    if candidate_see >= see {
                        rec.traj_delta = candidate_see - see;
                        state = candidate;
                        see = candidate_see;
                    }
                }
                Err(e) => rec.skipped.push(format!("trajectory: {e}")),
            }
        }

        if plan.angles == AngleStrategy::Optimize {
            match optimize_angles(&state, &problem, &config.angles) {
                Ok(out) if out.see >= see => {
                    rec.angle_delta = out.see - see;
                    state = out.state;
                    see = out.see;
                }
                Ok(_) => {}
                Err(e) => rec.skipped.push(format!("angles: {e}")),
            }
        }

        if plan.beams {
            match optimize_beams(&state, &problem, &config.beams, config.seed, k as u64) {
                Ok(out) => {
                    dinkelbach.extend(out.records);
                    if out.see >= see {
                        rec.beam_delta = out.see - see;
                        state = out.state;
                        see = out.see;
                    }
                }
                Err(e) => rec.skipped.push(format!("beams: {e}")),
            }
        }

        let report = see_objective(&state, &problem)?;
        rec.see = report.see;
        rec.sum_secrecy = report.sum_secrecy;
        rec.total_energy = report.total_energy;
        iterations.push(rec);
        if (see - start_see).abs() < config.eps_th {
            converged = true;
            break;
        }
    }

    let report = see_objective(&state, &problem)?;
    Ok(AoResult {
        state,
        report,
        trace: ConvergenceTrace {
            iterations,
            dinkelbach,
            wall_time: started.elapsed(),
            converged,
        },
    })
}

/// The proposed scheme: every variable optimized.
pub fn run(scenario: &Scenario, config: &AoConfig) -> Result<AoResult> {
    run_plan(scenario, config, &BlockPlan::PROPOSED)
}

/// Independent runs in parallel; each keeps its own state.
pub fn run_batch(jobs: &[(Scenario, AoConfig)]) -> Vec<Result<AoResult>> {
    jobs.par_iter().map(|(s, c)| run(s, c)).collect()
}
