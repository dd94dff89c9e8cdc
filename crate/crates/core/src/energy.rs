//! Propulsion, MA-actuation, and communication energy models.

use crate::error::{Error, Result};
use crate::geometry::Orientation;
use crate::metrics::SolutionState;
use crate::scenario::Scenario;

/// Rotary-wing propulsion model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorcraftPowerParams {
    /// Blade profile power in hover (W).
    pub p0: f64,
    /// Induced power in hover (W).
    pub p1: f64,
    /// Rotor tip speed squared (m²/s²).
    pub u_tip_sq: f64,
    /// Mean rotor induced velocity in hover (m/s).
    pub v0: f64,
    /// Fuselage drag ratio.
    pub r_drag: f64,
    /// Air density (kg/m³).
    pub rho: f64,
    /// Rotor solidity.
    pub s: f64,
    /// Rotor disc area (m²).
    pub a: f64,
}

impl RotorcraftPowerParams {
    pub const TABLE1: RotorcraftPowerParams = RotorcraftPowerParams {
        p0: 125.4,
        p1: 200.0,
        u_tip_sq: 8100.0,
        v0: 2.5669,
        r_drag: 0.6,
        rho: 1.225,
        s: 0.05,
        a: 0.79,
    };

    pub fn parasite_coefficient(&self) -> f64 {
        0.5 * self.r_drag * self.rho * self.s * self.a
    }
}

/// MA actuation power model and rate limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MAPowerParams {
    pub p_base: f64,
    /// Power per radian of X′ (elevation) rotation (W/rad).
    pub zeta: f64,
    /// Power per radian of Z′ (azimuth) rotation (W/rad).
    pub xi: f64,
    pub omega_el_max: f64,
    pub omega_az_max: f64,
}

impl MAPowerParams {
    pub const DEFAULT_OMEGA: f64 = std::f64::consts::FRAC_PI_4;

    pub const TABLE1: MAPowerParams = MAPowerParams {
        p_base: 2.0,
        zeta: 0.05,
        xi: 0.03,
        omega_el_max: Self::DEFAULT_OMEGA,
        omega_az_max: Self::DEFAULT_OMEGA,
    };
}

/// The three additive terms of the propulsion model (W).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropulsionTerms {
    pub blade: f64,
    pub induced: f64,
    pub parasite: f64,
}

impl PropulsionTerms {
    pub fn total(&self) -> f64 {
        self.blade + self.induced + self.parasite
    }
}

/// `(√(1 + v⁴/4v₀⁴) − v²/2v₀²)^{1/2}`, written in the cancellation-free form
/// `(√(1 + s²) + s)^{-1/2}` with `s = v²/2v₀²`.
pub fn induced_factor(v: f64, v0: f64) -> f64 {
    let s = v * v / (2.0 * v0 * v0);
    1.0 / ((1.0 + s * s).sqrt() + s).sqrt()
}

pub fn propulsion_terms(v: f64, p: &RotorcraftPowerParams) -> Result<PropulsionTerms> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("speed must be finite and >= 0, got {v}")));
    }
    Ok(PropulsionTerms {
        blade: p.p0 * (1.0 + 3.0 * v * v / p.u_tip_sq),
        induced: p.p1 * induced_factor(v, p.v0),
        parasite: p.parasite_coefficient() * v * v * v,
    })
}

/// Propulsion power at constant speed `v`.
pub fn propulsion_power(v: f64, p: &RotorcraftPowerParams) -> Result<f64> {
    propulsion_terms(v, p).map(|t| t.total())
}

/// Actuation power and active time for rotating from `prev` to `next`.
///
/// The active time is the slower axis' travel time at its maximum angular
/// rate, capped at the slot length `dt`.
pub fn ma_power_and_time(
    prev: Orientation,
    next: Orientation,
    p: &MAPowerParams,
    dt: f64,
) -> (f64, f64) {
    let dx = (next.phi_x - prev.phi_x).abs();
    let dz = (next.phi_z - prev.phi_z).abs();
    let power = p.p_base + p.zeta * dx + p.xi * dz;
    let time = (dx / p.omega_el_max).max(dz / p.omega_az_max).min(dt);
    (power, time)
}

/// Per-slot energies (J). Slot `k` covers the flight from waypoint `k` to
/// waypoint `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyBreakdown {
    pub e_prop: Vec<f64>,
    pub e_ma: Vec<f64>,
    pub e_com: Vec<f64>,
}

impl EnergyBreakdown {
    pub fn slot_total(&self, k: usize) -> f64 {
        self.e_prop[k] + self.e_ma[k] + self.e_com[k]
    }

    pub fn total_prop(&self) -> f64 {
        self.e_prop.iter().sum()
    }

    pub fn total_ma(&self) -> f64 {
        self.e_ma.iter().sum()
    }

    pub fn total_com(&self) -> f64 {
        self.e_com.iter().sum()
    }

    pub fn total(&self) -> f64 {
        (0..self.e_prop.len()).map(|k| self.slot_total(k)).sum()
    }

    pub fn len(&self) -> usize {
        self.e_prop.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e_prop.is_empty()
    }
}

pub fn slot_propulsion_energy(scenario: &Scenario, distance: f64) -> f64 {
    let dt = scenario.dt();
    let v = distance / dt;
    propulsion_power(v, &scenario.propulsion).expect("distance is a norm") * dt
}

pub fn slot_ma_energy(scenario: &Scenario, prev: Orientation, next: Orientation) -> f64 {
    let (p, t) = ma_power_and_time(prev, next, &scenario.ma, scenario.dt());
    p * t
}

pub fn slot_com_energy(scenario: &Scenario, beam_norm_sqr: f64) -> f64 {
    scenario.p_j * beam_norm_sqr * scenario.dt()
}

/// Energy of every slot. With `movable_array = false` the actuation term is
/// omitted entirely (a fixed panel has no actuator to power).
pub fn total_energy(state: &SolutionState, scenario: &Scenario, movable_array: bool) -> EnergyBreakdown {
    let n = state.slots();
    let mut out = EnergyBreakdown {
        e_prop: Vec::with_capacity(n),
        e_ma: Vec::with_capacity(n),
        e_com: Vec::with_capacity(n),
    };
    for k in 0..n {
        let dist = state.trajectory[k + 1].distance(state.trajectory[k]);
        out.e_prop.push(slot_propulsion_energy(scenario, dist));
        out.e_ma.push(if movable_array {
            slot_ma_energy(scenario, state.previous_orientation(k), state.orientations[k])
        } else {
            0.0
        });
        out.e_com.push(slot_com_energy(scenario, state.beams[k].norm_sqr()));
    }
    out
}
