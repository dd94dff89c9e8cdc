//! SINR, secrecy rates and the secrecy-energy-efficiency objective.
//!
//! Slot `k` (zero-based, `0..n_step`) is evaluated at its end waypoint
//! `trajectory[k + 1]` with `orientations[k]` and `beams[k]`.

use crate::channel::{
    bs_channel, channel, channel_in_frame, uncertainty_grid, worst_case_eve_gains, BoundMode,
    ChannelVec, RIGOROUS_GRID,
};
use crate::energy::{total_energy, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::geometry::{frame_matrix, steering_vector, local_direction_in_frame, ArrayGeometry, Orientation, Vec3};
use crate::numerics::ComplexVec;
use crate::scenario::Scenario;

/// Feasibility slack on speed caps and beam norms.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Optimization variables: `n_step + 1` waypoints and one orientation and
/// jamming beam per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub trajectory: Vec<Vec3>,
    pub orientations: Vec<Orientation>,
    pub beams: Vec<ComplexVec>,
}

impl SolutionState {
    pub fn slots(&self) -> usize {
        self.orientations.len()
    }

    /// Orientation before slot `k` rotates; the array starts at rest.
    pub fn previous_orientation(&self, k: usize) -> Orientation {
        if k == 0 {
            Orientation::ZERO
        } else {
            self.orientations[k - 1]
        }
    }

    /// Uniformly sampled straight flight, zero angles, silent jammer.
    pub fn straight_line(scenario: &Scenario) -> Self {
        let n = scenario.n_step;
        let trajectory = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                scenario.q_i + (scenario.q_f - scenario.q_i) * t
            })
            .collect();
        SolutionState {
            trajectory,
            orientations: vec![Orientation::ZERO; n],
            beams: vec![ComplexVec::zeros(scenario.n_ma()); n],
        }
    }

    /// Straight flight, zero angles and unit-norm MRT beams toward the
    /// nominal eavesdropper position.
    pub fn initial(scenario: &Scenario) -> Result<Self> {
        let mut s = Self::straight_line(scenario);
        let geom = scenario.ma_geometry();
        for k in 0..s.slots() {
            let h = channel(
                s.trajectory[k + 1],
                scenario.q_e,
                s.orientations[k],
                &geom,
                scenario.alpha_je,
                scenario.frequency,
            )?;
            s.beams[k] = mrt_beam(&h.gain)?;
        }
        Ok(s)
    }

    pub fn path_length(&self) -> f64 {
        self.trajectory.windows(2).map(|w| w[1].distance(w[0])).sum()
    }

    /// Every violated constraint, described.
    pub fn violations(&self, scenario: &Scenario) -> Vec<String> {
        let n = scenario.n_step;
        let mut out = Vec::new();
        if self.trajectory.len() != n + 1 || self.orientations.len() != n || self.beams.len() != n {
            out.push(format!(
                "shape mismatch: {} waypoints, {} orientations, {} beams for {n} slots",
                self.trajectory.len(),
                self.orientations.len(),
                self.beams.len()
            ));
            return out;
        }
        if self.trajectory[0] != scenario.q_i || self.trajectory[n] != scenario.q_f {
            out.push("trajectory endpoints differ from q_i / q_f".into());
        }
        let cap = scenario.max_step() + FEASIBILITY_TOL;
        for (k, w) in self.trajectory.windows(2).enumerate() {
            let d = w[1].distance(w[0]);
            if !(d <= cap) {
                out.push(format!("slot {k}: displacement {d} exceeds {cap}"));
            }
            if (w[1].z - scenario.h_j).abs() > FEASIBILITY_TOL {
                out.push(format!("waypoint {}: altitude {} != {}", k + 1, w[1].z, scenario.h_j));
            }
        }
        let dt = scenario.dt();
        let reach_x = scenario.ma.omega_el_max * dt + FEASIBILITY_TOL;
        let reach_z = scenario.ma.omega_az_max * dt + FEASIBILITY_TOL;
        for k in 0..n {
            let o = self.orientations[k];
            if !o.is_valid() {
                out.push(format!("slot {k}: orientation {o:?} outside the angle box"));
            }
            let prev = self.previous_orientation(k);
            if (o.phi_x - prev.phi_x).abs() > reach_x || (o.phi_z - prev.phi_z).abs() > reach_z {
                out.push(format!("slot {k}: rotation exceeds the per-slot angular reach"));
            }
            let norm = self.beams[k].norm();
            if !(norm <= 1.0 + FEASIBILITY_TOL) {
                out.push(format!("slot {k}: beam norm {norm} > 1"));
            }
            if self.beams[k].len() != scenario.n_ma() {
                out.push(format!("slot {k}: beam has wrong dimension"));
            }
        }
        out
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        let v = self.violations(scenario);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v.join("; ")))
        }
    }
}

/// `w = h / ‖h‖`.
pub fn mrt_beam(h: &ComplexVec) -> Result<ComplexVec> {
    let n = h.norm();
    if !(n > 0.0) {
        return Err(Error::DegenerateGeometry("MRT toward a zero channel".into()));
    }
    Ok(h.scaled_real(1.0 / n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    User,
    Eve,
}

/// Exact channels from both transmitters to one receiver.
#[derive(Debug, Clone)]
pub struct NodeChannels {
    pub from_bs: ChannelVec,
    pub from_jammer: ChannelVec,
}

#[derive(Debug, Clone)]
pub struct TrueChannels {
    pub user: NodeChannels,
    pub eve: NodeChannels,
}

/// Exact channels for a jammer at `q_j` and an eavesdropper at `eve_pos`.
pub fn true_channels(q_j: Vec3, o: Orientation, eve_pos: Vec3, scenario: &Scenario) -> Result<TrueChannels> {
    let geom = scenario.ma_geometry();
    let f = scenario.frequency;
    Ok(TrueChannels {
        user: NodeChannels {
            from_bs: bs_channel(scenario, scenario.q_u, scenario.alpha_bu)?,
            from_jammer: channel(q_j, scenario.q_u, o, &geom, scenario.alpha_ju, f)?,
        },
        eve: NodeChannels {
            from_bs: bs_channel(scenario, eve_pos, scenario.alpha_be)?,
            from_jammer: channel(q_j, eve_pos, o, &geom, scenario.alpha_je, f)?,
        },
    })
}

/// `γ = P_B|h_Bᴴ w_B|² / (P_J|h_Jᴴ w_J|² + σ²)`.
pub fn sinr(node: Node, ch: &TrueChannels, w_b: &ComplexVec, w_j: &ComplexVec, scenario: &Scenario) -> f64 {
    let (links, sigma2) = match node {
        Node::User => (&ch.user, scenario.sigma2_u),
        Node::Eve => (&ch.eve, scenario.sigma2_e),
    };
    let signal = scenario.p_b * links.from_bs.gain.inner(w_b).norm_sqr();
    let jam = scenario.p_j * links.from_jammer.gain.inner(w_j).norm_sqr();
    signal / (jam + sigma2)
}

/// Jamming power reaching the (worst-case) eavesdropper as a function of
/// the beam: `offset + P_J · minᵢ |aᵢᴴ w|²`, or just `offset` when there are
/// no direction vectors.
#[derive(Debug, Clone)]
pub struct EveJamming {
    pub offset: f64,
    pub directions: Vec<ComplexVec>,
}

impl EveJamming {
    pub fn power(&self, p_j: f64, w: &ComplexVec) -> f64 {
        self.offset + p_j * self.min_gain(w).map_or(0.0, |g| g)
    }

    /// Smallest `|aᵢᴴ w|²` with its index.
    pub fn min_gain(&self, w: &ComplexVec) -> Option<f64> {
        self.directions
            .iter()
            .map(|a| a.inner(w).norm_sqr())
            .min_by(f64::total_cmp)
    }

    pub fn argmin(&self, w: &ComplexVec) -> Option<usize> {
        self.directions
            .iter()
            .map(|a| a.inner(w).norm_sqr())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

/// What a slot's secrecy depends on, for a given jammer position and
/// orientation.
#[derive(Debug, Clone)]
pub struct SlotLinks {
    /// Jammer → user channel.
    pub h_ju: ChannelVec,
    pub eve_jam: EveJamming,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRates {
    pub r_u: f64,
    pub r_e: f64,
}

impl SlotRates {
    /// Secrecy rate without the non-negative clip.
    pub fn unclipped(&self) -> f64 {
        self.r_u - self.r_e
    }

    pub fn clipped(&self) -> f64 {
        self.unclipped().max(0.0)
    }
}

/// Scenario plus evaluation choices, with the static link budgets cached.
#[derive(Debug, Clone)]
pub struct Problem {
    pub scenario: Scenario,
    pub bound: BoundMode,
    /// `false` models a fixed panel: no actuation energy is charged.
    pub movable_array: bool,
    geom: ArrayGeometry,
    w_b: ComplexVec,
    /// `P_B |h_Buᴴ w_B|²`.
    user_signal: f64,
    /// Worst-case BS signal power at the eavesdropper under `bound`.
    eve_signal: f64,
    eve_grid: Vec<Vec3>,
}

impl Problem {
    pub fn new(scenario: Scenario, bound: BoundMode, movable_array: bool) -> Result<Self> {
        if let Some(f) = scenario.check().first() {
            return Err(Error::InfeasibleScenario(format!("{}: {}", f.key, f.message)));
        }
        let h_bu = bs_channel(&scenario, scenario.q_u, scenario.alpha_bu)?;
        let w_b = mrt_beam(&h_bu.gain)?;
        let user_signal = scenario.p_b * h_bu.gain.inner(&w_b).norm_sqr();
        let bs_eve = worst_case_eve_gains(scenario.q_i, &scenario)?.bs_eve;
        let eve_signal = match bound {
            BoundMode::Nominal => {
                let g_be = bs_channel(&scenario, scenario.q_e, scenario.alpha_be)?.steering();
                scenario.p_b * bs_eve * g_be.inner(&w_b).norm_sqr()
            }
            BoundMode::PathOnly => scenario.p_b * bs_eve,
            BoundMode::Rigorous => scenario.p_b * bs_eve * scenario.n_b as f64 * w_b.norm_sqr(),
        };
        let eve_grid = if bound == BoundMode::Rigorous {
            uncertainty_grid(&scenario, RIGOROUS_GRID)
        } else {
            Vec::new()
        };
        Ok(Problem {
            geom: scenario.ma_geometry(),
            scenario,
            bound,
            movable_array,
            w_b,
            user_signal,
            eve_signal,
            eve_grid,
        })
    }

    pub fn bs_beam(&self) -> &ComplexVec {
        &self.w_b
    }

    pub fn user_signal(&self) -> f64 {
        self.user_signal
    }

    pub fn eve_signal(&self) -> f64 {
        self.eve_signal
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    pub fn slot_links(&self, q_j: Vec3, o: Orientation) -> Result<SlotLinks> {
        let s = &self.scenario;
        let frame = frame_matrix(o);
        let h_ju = channel_in_frame(q_j, s.q_u, &frame, &self.geom, s.alpha_ju, s.frequency)?;
        let jam_path = worst_case_eve_gains(q_j, s)?.jammer_eve;
        let amp = jam_path.sqrt();
        let eve_jam = match self.bound {
            BoundMode::Nominal => {
                let u = local_direction_in_frame(&frame, q_j, s.q_e)?;
                EveJamming {
                    offset: 0.0,
                    directions: vec![steering_vector(&self.geom, u, s.frequency).scaled_real(amp)],
                }
            }
            BoundMode::PathOnly => EveJamming {
                offset: s.p_j * jam_path,
                directions: Vec::new(),
            },
            BoundMode::Rigorous => {
                let mut directions = Vec::with_capacity(self.eve_grid.len());
                for q in &self.eve_grid {
                    let u = local_direction_in_frame(&frame, q_j, *q)?;
                    directions.push(steering_vector(&self.geom, u, s.frequency).scaled_real(amp));
                }
                EveJamming {
                    offset: 0.0,
                    directions,
                }
            }
        };
        Ok(SlotLinks { h_ju, eve_jam })
    }

    pub fn user_rate(&self, links: &SlotLinks, w_j: &ComplexVec) -> f64 {
        let s = &self.scenario;
        let jam = s.p_j * links.h_ju.gain.inner(w_j).norm_sqr();
        (1.0 + self.user_signal / (jam + s.sigma2_u)).log2()
    }

    /// Upper bound `r̃_e` on the eavesdropper rate over the uncertainty disc.
    pub fn eve_rate_bound(&self, links: &SlotLinks, w_j: &ComplexVec) -> f64 {
        let s = &self.scenario;
        let jam = links.eve_jam.power(s.p_j, w_j);
        (1.0 + self.eve_signal / (jam + s.sigma2_e)).log2()
    }

    pub fn rates(&self, links: &SlotLinks, w_j: &ComplexVec) -> SlotRates {
        SlotRates {
            r_u: self.user_rate(links, w_j),
            r_e: self.eve_rate_bound(links, w_j),
        }
    }

    pub fn slot_rates_at(&self, q_j: Vec3, o: Orientation, w_j: &ComplexVec) -> Result<SlotRates> {
        Ok(self.rates(&self.slot_links(q_j, o)?, w_j))
    }

    pub fn slot_rates(&self, state: &SolutionState, k: usize) -> Result<SlotRates> {
        self.slot_rates_at(state.trajectory[k + 1], state.orientations[k], &state.beams[k])
    }

    pub fn energy(&self, state: &SolutionState) -> EnergyBreakdown {
        total_energy(state, &self.scenario, self.movable_array)
    }

    /// Clipped SEE of `state`.
    pub fn see(&self, state: &SolutionState) -> Result<f64> {
        see_objective(state, self).map(|r| r.see)
    }
}

/// Worst-case secrecy rate `[r_u − r̃_e]⁺` of slot `k`.
pub fn secrecy_rate_slot(state: &SolutionState, k: usize, problem: &Problem) -> Result<f64> {
    problem.slot_rates(state, k).map(|r| r.clipped())
}

/// `r_u − r̃_e` of slot `k`, without the clip.
pub fn secrecy_rate_unclipped(state: &SolutionState, k: usize, problem: &Problem) -> Result<f64> {
    problem.slot_rates(state, k).map(|r| r.unclipped())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotReport {
    pub r_sec: f64,
    pub r_sec_unclipped: f64,
    pub r_u: f64,
    pub r_e_bound: f64,
    pub e_prop: f64,
    pub e_ma: f64,
    pub e_com: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SEEReport {
    /// `Σ r̃_sec` (bit/s/Hz summed over slots).
    pub sum_secrecy: f64,
    pub total_energy: f64,
    /// bit/Hz/J.
    pub see: f64,
    pub per_slot: Vec<SlotReport>,
}

impl SEEReport {
    pub fn total_prop(&self) -> f64 {
        self.per_slot.iter().map(|s| s.e_prop).sum()
    }

    pub fn total_ma(&self) -> f64 {
        self.per_slot.iter().map(|s| s.e_ma).sum()
    }

    pub fn total_com(&self) -> f64 {
        self.per_slot.iter().map(|s| s.e_com).sum()
    }
}

/// `(Σ r̃_sec·Δt) / Σ E_total`.
pub fn see_objective(state: &SolutionState, problem: &Problem) -> Result<SEEReport> {
    let scenario = &problem.scenario;
    let energy = problem.energy(state);
    let mut per_slot = Vec::with_capacity(state.slots());
    for k in 0..state.slots() {
        let r = problem.slot_rates(state, k)?;
        per_slot.push(SlotReport {
            r_sec: r.clipped(),
            r_sec_unclipped: r.unclipped(),
            r_u: r.r_u,
            r_e_bound: r.r_e,
            e_prop: energy.e_prop[k],
            e_ma: energy.e_ma[k],
            e_com: energy.e_com[k],
        });
    }
    let sum_secrecy: f64 = per_slot.iter().map(|s| s.r_sec).sum();
    let total_energy = energy.total();
    assert!(total_energy > 0.0, "propulsion power is strictly positive");
    Ok(SEEReport {
        sum_secrecy,
        total_energy,
        see: sum_secrecy * scenario.dt() / total_energy,
        per_slot,
    })
}

/// Per-slot secrecy rates and energies of a state, so block updates can
/// evaluate the global SEE after changing one slot without recomputing the
/// others.
#[derive(Debug, Clone)]
pub struct SeeCache {
    pub r_sec: Vec<f64>,
    pub energy: EnergyBreakdown,
    dt: f64,
}

impl SeeCache {
    pub fn new(state: &SolutionState, problem: &Problem) -> Result<Self> {
        let r_sec = (0..state.slots())
            .map(|k| secrecy_rate_slot(state, k, problem))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeeCache {
            r_sec,
            energy: problem.energy(state),
            dt: problem.scenario.dt(),
        })
    }

    pub fn see(&self) -> f64 {
        self.r_sec.iter().sum::<f64>() * self.dt / self.energy.total()
    }

    /// Secrecy sum (times Δt) and energy of every slot except `k`, plus the
    /// given replacement energies for the actuation terms in `ma_override`.
    pub fn see_with(&self, k: usize, r_sec: f64, e_com: f64, ma_override: &[(usize, f64)]) -> f64 {
        let mut sum = 0.0;
        let mut energy = 0.0;
        for i in 0..self.r_sec.len() {
            sum += if i == k { r_sec } else { self.r_sec[i] };
            let e_ma = ma_override
                .iter()
                .find(|(j, _)| *j == i)
                .map_or(self.energy.e_ma[i], |(_, e)| *e);
            let e_com_i = if i == k { e_com } else { self.energy.e_com[i] };
            energy += self.energy.e_prop[i] + e_ma + e_com_i;
        }
        sum * self.dt / energy
    }
}
