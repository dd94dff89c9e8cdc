//! MA orientation block: per-slot projected gradient ascent on the global SEE
//! with the trajectory and beams frozen.
//!
//! A slot's feasible box is the mechanical box intersected with the angular
//! reach from the previous slot's orientation and to the next one's, so
//! every update keeps the whole orientation sequence feasible.

use crate::energy::slot_ma_energy;
use crate::error::Result;
use crate::geometry::{boresight_angles_toward, Orientation, ANGLE_LIMIT};
use crate::metrics::{Problem, SeeCache, SolutionState};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleConfig {
    pub eps_phi: f64,
    /// Length of the first trial step (rad).
    pub init_step: f64,
    pub armijo: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
    /// Sweeps over all slots.
    pub max_iter: usize,
    /// Stop once a sweep improves SEE by less than this fraction.
    pub tol: f64,
}

impl Default for AngleConfig {
    fn default() -> Self {
        AngleConfig {
            eps_phi: 1e-5,
            init_step: 0.1,
            armijo: 0.1,
            shrink: 0.5,
            max_backtracks: 20,
            max_iter: 50,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl AngleBox {
    pub fn clamp(&self, o: [f64; 2]) -> [f64; 2] {
        [o[0].clamp(self.lo[0], self.hi[0]), o[1].clamp(self.lo[1], self.hi[1])]
    }
}

/// Orientations slot `k` may take without breaking the mechanical box or
/// the per-slot angular reach to either neighbour.
pub fn slot_box(state: &SolutionState, k: usize, problem: &Problem) -> AngleBox {
    let s = &problem.scenario;
    let reach = [s.ma.omega_el_max * s.dt(), s.ma.omega_az_max * s.dt()];
    let prev = state.previous_orientation(k);
    let mut lo = [
        (-ANGLE_LIMIT).max(prev.phi_x - reach[0]),
        (-ANGLE_LIMIT).max(prev.phi_z - reach[1]),
    ];
    let mut hi = [ANGLE_LIMIT.min(prev.phi_x + reach[0]), ANGLE_LIMIT.min(prev.phi_z + reach[1])];
    if let Some(next) = state.orientations.get(k + 1) {
        lo = [lo[0].max(next.phi_x - reach[0]), lo[1].max(next.phi_z - reach[1])];
        hi = [hi[0].min(next.phi_x + reach[0]), hi[1].min(next.phi_z + reach[1])];
    }
    // the current orientation is feasible; guard against rounding
    let cur = state.orientations[k];
    AngleBox {
        lo: [lo[0].min(cur.phi_x), lo[1].min(cur.phi_z)],
        hi: [hi[0].max(cur.phi_x), hi[1].max(cur.phi_z)],
    }
}

/// Global SEE with slot `k` re-oriented to `o`.
fn see_at(cache: &SeeCache, state: &SolutionState, k: usize, o: Orientation, problem: &Problem) -> Result<f64> {
    let s = &problem.scenario;
    let r = problem
        .slot_rates_at(state.trajectory[k + 1], o, &state.beams[k])?
        .clipped();
    let mut ma = Vec::with_capacity(2);
    if problem.movable_array {
        ma.push((k, slot_ma_energy(s, state.previous_orientation(k), o)));
        if let Some(next) = state.orientations.get(k + 1) {
            ma.push((k + 1, slot_ma_energy(s, o, *next)));
        }
    }
    Ok(cache.see_with(k, r, cache.energy.e_com[k], &ma))
}

fn orientation(v: [f64; 2]) -> Orientation {
    Orientation { phi_x: v[0], phi_z: v[1] }
}

fn fd_gradient_cached(
    cache: &SeeCache,
    state: &SolutionState,
    k: usize,
    eps: f64,
    problem: &Problem,
) -> Result<[f64; 2]> {
    let bx = slot_box(state, k, problem);
    let cur = state.orientations[k];
    let x = [cur.phi_x, cur.phi_z];
    let f0 = cache.see();
    let mut g = [0.0; 2];
    for axis in 0..2 {
        let up = x[axis] + eps <= bx.hi[axis];
        let down = x[axis] - eps >= bx.lo[axis];
        let eval = |delta: f64| {
            let mut y = x;
            y[axis] += delta;
            see_at(cache, state, k, orientation(y), problem)
        };
        g[axis] = match (up, down) {
            (true, true) => (eval(eps)? - eval(-eps)?) / (2.0 * eps),
            (true, false) => (eval(eps)? - f0) / eps,
            (false, true) => (f0 - eval(-eps)?) / eps,
            (false, false) => 0.0,
        };
    }
    Ok(g)
}

/// Finite-difference gradient of the global SEE with respect to slot `k`'s
/// angles: central differences, one-sided where a step would leave the box.
pub fn fd_gradient(state: &SolutionState, k: usize, eps_phi: f64, problem: &Problem) -> Result<[f64; 2]> {
    let cache = SeeCache::new(state, problem)?;
    fd_gradient_cached(&cache, state, k, eps_phi, problem)
}

#[derive(Debug, Clone)]
pub struct AngleOutcome {
    pub state: SolutionState,
    pub see: f64,
    pub sweeps: usize,
    pub accepted_steps: usize,
}

/// One Armijo step on slot `k`; returns whether it was accepted.
fn step_slot(
    cache: &mut SeeCache,
    state: &mut SolutionState,
    k: usize,
    problem: &Problem,
    cfg: &AngleConfig,
) -> Result<bool> {
    let g = fd_gradient_cached(cache, state, k, cfg.eps_phi, problem)?;
    let gnorm_sq = g[0] * g[0] + g[1] * g[1];
    if gnorm_sq == 0.0 || !gnorm_sq.is_finite() {
        return Ok(false);
    }
    let bx = slot_box(state, k, problem);
    let cur = state.orientations[k];
    let x = [cur.phi_x, cur.phi_z];
    let f0 = cache.see();
    let mut alpha = cfg.init_step / gnorm_sq.sqrt();
    for _ in 0..=cfg.max_backtracks {
        let y = bx.clamp([x[0] + alpha * g[0], x[1] + alpha * g[1]]);
        if y == x {
            return Ok(false);
        }
        let f = see_at(cache, state, k, orientation(y), problem)?;
        if f >= f0 + cfg.armijo * alpha * gnorm_sq {
            let o = orientation(y);
            state.orientations[k] = o;
            cache.r_sec[k] = problem
                .slot_rates_at(state.trajectory[k + 1], o, &state.beams[k])?
                .clipped();
            if problem.movable_array {
                let s = &problem.scenario;
                cache.energy.e_ma[k] = slot_ma_energy(s, state.previous_orientation(k), o);
                if let Some(next) = state.orientations.get(k + 1) {
                    cache.energy.e_ma[k + 1] = slot_ma_energy(s, o, *next);
                }
            }
            return Ok(true);
        }
        alpha *= cfg.shrink;
    }
    Ok(false)
}

/// Re-points every slot at the nominal eve, moving each slot no further
/// than the angular reach allows from the previous one.
pub fn track_eve(state: &SolutionState, scenario: &Scenario) -> Result<Vec<Orientation>> {
    let reach_x = scenario.ma.omega_el_max * scenario.dt();
    let reach_z = scenario.ma.omega_az_max * scenario.dt();
    let mut out = Vec::with_capacity(state.slots());
    let mut prev = Orientation::ZERO;
    for k in 0..state.slots() {
        let target = boresight_angles_toward(state.trajectory[k + 1], scenario.q_e)?.orientation;
        let o = Orientation {
            phi_x: target.phi_x.clamp(prev.phi_x - reach_x, prev.phi_x + reach_x).clamp(-ANGLE_LIMIT, ANGLE_LIMIT),
            phi_z: target.phi_z.clamp(prev.phi_z - reach_z, prev.phi_z + reach_z).clamp(-ANGLE_LIMIT, ANGLE_LIMIT),
        };
        out.push(o);
        prev = o;
    }
    Ok(out)
}

fn sweep(state: &SolutionState, problem: &Problem, cfg: &AngleConfig) -> Result<AngleOutcome> {
    let mut st = state.clone();
    let mut cache = SeeCache::new(&st, problem)?;
    let mut accepted = 0;
    let mut sweeps = 0;
    for _ in 0..cfg.max_iter {
        sweeps += 1;
        let before = cache.see();
        let mut any = false;
        for k in 0..st.slots() {
            if step_slot(&mut cache, &mut st, k, problem, cfg)? {
                accepted += 1;
                any = true;
            }
        }
        let after = cache.see();
        if !any || after - before <= cfg.tol * after.abs() {
            break;
        }
    }
    let see = problem.see(&st)?;
    Ok(AngleOutcome { state: st, see, sweeps, accepted_steps: accepted })
}

/// Sweeps the slots in order, one projected gradient step each, until a
/// sweep stops paying off. The sweeps run from the current angles and from
/// the eve-tracking sequence, and the better end point is kept. SEE never
/// decreases.
pub fn optimize_angles(state: &SolutionState, problem: &Problem, cfg: &AngleConfig) -> Result<AngleOutcome> {
    let mut best = sweep(state, problem, cfg)?;
    if problem.movable_array {
        let mut seeded = state.clone();
        seeded.orientations = track_eve(state, &problem.scenario)?;
        let alt = sweep(&seeded, problem, cfg)?;
        if alt.see > best.see {
            best = alt;
        }
    }
    let start = problem.see(state)?;
    if best.see < start {
        // rounding in the incremental sums cannot be allowed to cost SEE
        return Ok(AngleOutcome { state: state.clone(), see: start, sweeps: best.sweeps, accepted_steps: 0 });
    }
    Ok(best)
}
