//! Trajectory block: successive lower-bound maximization of SEE over the
//! waypoints with angles and beams frozen. Each round maximizes a ratio of a
//! secrecy minorant to an energy majorant with Dinkelbach's method.
//!
//! The surrogate keeps the direction-dependent array gains exact and only
//! bounds the path-loss dependence, so it stays below the true secrecy rate
//! everywhere, not only near the reference point.

use std::f64::consts::LN_2;

use crate::ascent::{projected_ascent, AscentConfig, Objective};
use crate::energy::RotorcraftPowerParams;
use crate::error::{Error, Result};
use crate::fractional::{dinkelbach, DinkelbachConfig, DinkelbachRecord, FractionalProgram};
use crate::geometry::{Orientation, Vec3};
use crate::metrics::{Problem, SolutionState, FEASIBILITY_TOL};
use crate::numerics::ComplexVec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajConfig {
    pub sca_iters: usize,
    /// Stop the rounds once SEE improves by less than this fraction.
    pub sca_tol: f64,
    pub dinkelbach: DinkelbachConfig,
    pub ascent: AscentConfig,
    /// Central-difference step for the secrecy minorant (m).
    pub fd_step: f64,
    /// Largest distance any waypoint may move in one block call (m);
    /// `None` means one slot of travel at full speed.
    pub trust_radius: Option<f64>,
}

impl Default for TrajConfig {
    fn default() -> Self {
        TrajConfig {
            sca_iters: 10,
            sca_tol: 1e-9,
            dinkelbach: DinkelbachConfig { tol: 1e-6, max_iter: 30 },
            ascent: AscentConfig {
                max_iter: 100,
                init_step: 1.0,
                armijo: 0.1,
                shrink: 0.5,
                max_backtracks: 30,
                tol: 1e-12,
            },
            fd_step: 1e-3,
            trust_radius: None,
        }
    }
}

const DYKSTRA_MAX_ITER: usize = 500;
const DYKSTRA_TOL: f64 = 1e-12;

fn sqr(v: Vec3) -> f64 {
    v.dot(v)
}

fn max_violation(traj: &[Vec3], max_step: f64) -> f64 {
    traj.windows(2)
        .map(|w| w[1].distance(w[0]) - max_step)
        .fold(0.0, f64::max)
}

/// Moves interior waypoint pairs `(k, k + 1)` with `k % 2 == parity` onto
/// their speed balls. Pairs in one parity class share no waypoint, so this
/// is the exact projection onto their intersection.
fn project_pairs(traj: &mut [Vec3], parity: usize, max_step: f64) {
    let n = traj.len() - 1;
    let mut k = parity;
    while k < n {
        let (a, b) = (traj[k], traj[k + 1]);
        let d = b - a;
        let len = d.norm();
        if len > max_step {
            let first_free = k > 0;
            let second_free = k + 1 < n;
            match (first_free, second_free) {
                (true, true) => {
                    let mid = (a + b) * 0.5;
                    let half = d * (0.5 * max_step / len);
                    traj[k] = mid - half;
                    traj[k + 1] = mid + half;
                }
                (false, true) => traj[k + 1] = a + d * (max_step / len),
                (true, false) => traj[k] = b - d * (max_step / len),
                (false, false) => {}
            }
        }
        k += 2;
    }
}

/// Per-waypoint balls the trajectory must stay inside.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegion {
    pub centre: Vec<Vec3>,
    pub radius: f64,
}

impl TrustRegion {
    fn violation(&self, traj: &[Vec3]) -> f64 {
        traj.iter()
            .zip(&self.centre)
            .map(|(q, c)| q.distance(*c) - self.radius)
            .fold(0.0, f64::max)
    }

    fn project(&self, traj: &mut [Vec3]) {
        for (q, c) in traj.iter_mut().zip(&self.centre) {
            let d = q.distance(*c);
            if d > self.radius {
                *q = *c + (*q - *c) * (self.radius / d);
            }
        }
    }
}

/// Euclidean projection of the interior waypoints onto the speed
/// constraints (Dykstra's alternating projections over the even and odd
/// slot classes). Endpoints are never moved.
///
/// If the alternating scheme has not reached feasibility within
/// [`FEASIBILITY_TOL`], the result is pulled back along the segment toward
/// the feasible `anchor`.
pub fn project_trajectory(traj: &[Vec3], max_step: f64, anchor: &[Vec3]) -> Result<Vec<Vec3>> {
    project_trajectory_within(traj, max_step, None, anchor)
}

/// [`project_trajectory`] with the trust region as a third Dykstra set.
pub fn project_trajectory_within(
    traj: &[Vec3],
    max_step: f64,
    trust: Option<&TrustRegion>,
    anchor: &[Vec3],
) -> Result<Vec<Vec3>> {
    let n = traj.len();
    if n < 2 || anchor.len() != n || trust.is_some_and(|t| t.centre.len() != n) {
        return Err(Error::Projection("trajectory, anchor and trust centre lengths differ".into()));
    }
    let tol = FEASIBILITY_TOL * 0.1;
    let violation = |x: &[Vec3]| max_violation(x, max_step).max(trust.map_or(0.0, |t| t.violation(x)));
    let mut x = traj.to_vec();
    if violation(&x) <= 0.0 {
        return Ok(x);
    }
    let mut p = vec![Vec3::ZERO; n];
    let mut q = vec![Vec3::ZERO; n];
    let mut r = vec![Vec3::ZERO; n];
    for _ in 0..DYKSTRA_MAX_ITER {
        let mut y: Vec<Vec3> = x.iter().zip(&p).map(|(a, b)| *a + *b).collect();
        project_pairs(&mut y, 0, max_step);
        for i in 0..n {
            p[i] = x[i] + p[i] - y[i];
        }
        let mut z: Vec<Vec3> = y.iter().zip(&q).map(|(a, b)| *a + *b).collect();
        project_pairs(&mut z, 1, max_step);
        for i in 0..n {
            q[i] = y[i] + q[i] - z[i];
        }
        if let Some(t) = trust {
            let mut w: Vec<Vec3> = z.iter().zip(&r).map(|(a, b)| *a + *b).collect();
            t.project(&mut w);
            for i in 0..n {
                r[i] = z[i] + r[i] - w[i];
            }
            z = w;
        }
        let moved = z.iter().zip(&x).map(|(a, b)| a.distance(*b)).fold(0.0, f64::max);
        x = z;
        if moved < DYKSTRA_TOL * (1.0 + max_step) && violation(&x) <= tol {
            break;
        }
    }
    if violation(&x) <= tol {
        return Ok(x);
    }
    let anchor_violation = violation(anchor);
    if anchor_violation > tol {
        return Err(Error::Projection(format!(
            "projection did not converge (violation {}) and the fallback anchor is infeasible ({anchor_violation})",
            violation(&x)
        )));
    }
    let along = |t: f64| -> Vec<Vec3> { anchor.iter().zip(&x).map(|(a, b)| *a + (*b - *a) * t).collect() };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if violation(&along(mid)) <= tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(along(lo))
}

/// Per-slot linearization data at the reference waypoint.
#[derive(Debug, Clone, Copy)]
struct SlotRef {
    q: Vec3,
    /// `‖q − q_u‖²`.
    d_u_sq: f64,
    /// `‖q − q̃_e‖`.
    d_e: f64,
}

/// Induced-power factor as a function of squared speed, and its derivative.
fn induced_in_sq_speed(x: f64, v0: f64) -> (f64, f64) {
    let x = x.max(0.0);
    let c = 1.0 / (2.0 * v0 * v0);
    let s = c * x;
    let root = (1.0 + s * s).sqrt();
    let base = root + s;
    let value = 1.0 / base.sqrt();
    let d_ds = -0.5 * base.powf(-1.5) * (s / root + 1.0);
    (value, c * d_ds)
}

/// Secrecy minorant and energy majorant around a reference trajectory.
#[derive(Debug, Clone)]
pub struct TrajSurrogate<'a> {
    problem: &'a Problem,
    orientations: Vec<Orientation>,
    beams: Vec<ComplexVec>,
    q_ref: Vec<Vec3>,
    refs: Vec<SlotRef>,
    /// Actuation plus communication energy, which the trajectory cannot change.
    fixed_energy: f64,
    trust: Option<TrustRegion>,
}

impl<'a> TrajSurrogate<'a> {
    /// Linearizes around the trajectory of `state`.
    pub fn build(problem: &'a Problem, state: &SolutionState) -> Result<Self> {
        let s = &problem.scenario;
        let n = s.n_step;
        if state.trajectory.len() != n + 1 || state.slots() != n {
            return Err(Error::Validation("state shape does not match the scenario".into()));
        }
        if state.trajectory[0] != s.q_i || state.trajectory[n] != s.q_f {
            return Err(Error::Validation("reference trajectory endpoints differ from q_i / q_f".into()));
        }
        let viol = max_violation(&state.trajectory, s.max_step());
        if viol > FEASIBILITY_TOL {
            return Err(Error::Validation(format!("reference trajectory exceeds the speed cap by {viol} m")));
        }
        let refs = (0..n)
            .map(|k| {
                let q = state.trajectory[k + 1];
                SlotRef {
                    q,
                    d_u_sq: sqr(q - s.q_u),
                    d_e: q.distance(s.q_e),
                }
            })
            .collect();
        let energy = problem.energy(state);
        Ok(TrajSurrogate {
            problem,
            orientations: state.orientations.clone(),
            beams: state.beams.clone(),
            q_ref: state.trajectory.clone(),
            refs,
            fixed_energy: energy.total_ma() + energy.total_com(),
            trust: None,
        })
    }

    /// Restricts the surrogate problem to balls of `radius` around
    /// `centre`, which must contain the reference.
    pub fn with_trust_region(mut self, centre: &[Vec3], radius: f64) -> Result<Self> {
        let region = TrustRegion { centre: centre.to_vec(), radius };
        if centre.len() != self.q_ref.len() || region.violation(&self.q_ref) > FEASIBILITY_TOL {
            return Err(Error::Validation("reference lies outside the trust region".into()));
        }
        self.trust = Some(region);
        Ok(self)
    }

    pub fn reference(&self) -> &[Vec3] {
        &self.q_ref
    }

    /// Interior waypoints as `[x₁, y₁, x₂, y₂, …]`.
    pub fn flatten(traj: &[Vec3]) -> Vec<f64> {
        traj[1..traj.len() - 1].iter().flat_map(|q| [q.x, q.y]).collect()
    }

    pub fn unflatten(&self, x: &[f64]) -> Vec<Vec3> {
        let n = self.q_ref.len() - 1;
        let h = self.problem.scenario.h_j;
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.q_ref[0]);
        out.extend(x.chunks_exact(2).map(|c| Vec3::new(c[0], c[1], h)));
        out.push(self.q_ref[n]);
        out
    }

    /// Lower bound on the un-clipped secrecy rate of slot `k` with the
    /// jammer at `q`; equal to it at the reference waypoint.
    pub fn slot_secrecy(&self, k: usize, q: Vec3) -> Result<f64> {
        let p = self.problem;
        let s = &p.scenario;
        let r = &self.refs[k];
        let w = &self.beams[k];
        let links = p.slot_links(q, self.orientations[k])?;

        // user side, μ = (α/2)·ln d²
        let a_u = s.p_j * s.beta0() * links.h_ju.steering().inner(w).norm_sqr();
        let half_alpha = 0.5 * s.alpha_ju;
        let d_sq = sqr(q - s.q_u);
        let mu_ref = half_alpha * r.d_u_sq.ln();
        let mu_hi = half_alpha * (r.d_u_sq.ln() + (d_sq - r.d_u_sq) / r.d_u_sq);
        let i_ref = a_u * (-mu_ref).exp();
        let total_ref = s.sigma2_u + p.user_signal() + i_ref;
        let user_sig = total_ref.log2() - i_ref / (total_ref * LN_2) * (mu_hi - mu_ref);
        let h_u = q.z - s.q_u.z;
        let affine_u = r.d_u_sq + 2.0 * (r.q - s.q_u).dot(q - r.q);
        let mu_lo = half_alpha * affine_u.max(h_u * h_u).ln();
        let user_noise = -(s.sigma2_u + a_u * (-mu_lo).exp()).log2();

        // eve side, τ = α·ln(d + ε)
        let d_e = q.distance(s.q_e);
        let eps = s.epsilon;
        let alpha = s.alpha_je;
        let a_e = links.eve_jam.power(s.p_j, w) * (d_e + eps).powf(alpha);
        let tau_ref = alpha * (r.d_e + eps).ln();
        let tau_hi = alpha * ((r.d_e + eps).ln() + (d_e - r.d_e) / (r.d_e + eps));
        let j_ref = a_e * (-tau_ref).exp();
        let eve_floor_ref = s.sigma2_e + j_ref;
        let eve_noise = eve_floor_ref.log2() - j_ref / (eve_floor_ref * LN_2) * (tau_hi - tau_ref);
        let h_e = q.z - s.q_e.z;
        let affine_e = r.d_e * r.d_e + 2.0 * (r.q - s.q_e).dot(q - r.q);
        let d_lo = affine_e.max(h_e * h_e).sqrt();
        let eve_sig = -(s.sigma2_e + p.eve_signal() + a_e * (d_lo + eps).powf(-alpha)).log2();

        Ok(user_sig + user_noise + eve_noise + eve_sig)
    }

    /// `Δt · Σ max(ŝ_k, 0)`.
    pub fn numerator_of(&self, traj: &[Vec3]) -> Result<f64> {
        let mut sum = 0.0;
        for k in 0..self.refs.len() {
            sum += self.slot_secrecy(k, traj[k + 1])?.max(0.0);
        }
        Ok(sum * self.problem.scenario.dt())
    }

    /// Upper bound on slot propulsion energy for displacement `d`: blade
    /// and parasite terms exact, the induced term evaluated at a lower bound
    /// of the squared speed.
    pub fn slot_propulsion_bound(&self, k: usize, d: Vec3) -> f64 {
        let s = &self.problem.scenario;
        let pp: &RotorcraftPowerParams = &s.propulsion;
        let dt = s.dt();
        let d_ref = self.q_ref[k + 1] - self.q_ref[k];
        let len_sq = sqr(d);
        let len = len_sq.sqrt();
        let x_lo = (sqr(d_ref) + 2.0 * d_ref.dot(d - d_ref)) / (dt * dt);
        let (chi, _) = induced_in_sq_speed(x_lo, pp.v0);
        let v = len / dt;
        dt * (pp.p0 * (1.0 + 3.0 * v * v / pp.u_tip_sq) + pp.p1 * chi + pp.parasite_coefficient() * v * v * v)
    }

    pub fn denominator_of(&self, traj: &[Vec3]) -> f64 {
        let prop: f64 = (0..self.refs.len())
            .map(|k| self.slot_propulsion_bound(k, traj[k + 1] - traj[k]))
            .sum();
        prop + self.fixed_energy
    }

    /// Gradient of the energy majorant with respect to the interior
    /// waypoints, flattened like [`Self::flatten`].
    fn denominator_gradient(&self, traj: &[Vec3]) -> Vec<f64> {
        let s = &self.problem.scenario;
        let pp = &s.propulsion;
        let dt = s.dt();
        let n = traj.len() - 1;
        let mut g = vec![0.0; 2 * (n - 1)];
        for k in 0..n {
            let d = traj[k + 1] - traj[k];
            let d_ref = self.q_ref[k + 1] - self.q_ref[k];
            let len = d.norm();
            let x_lo = (sqr(d_ref) + 2.0 * d_ref.dot(d - d_ref)) / (dt * dt);
            let (_, dchi) = induced_in_sq_speed(x_lo, pp.v0);
            let induced = if x_lo > 0.0 { dt * pp.p1 * dchi * 2.0 / (dt * dt) } else { 0.0 };
            let radial = dt * (6.0 * pp.p0 / (pp.u_tip_sq * dt * dt) + 3.0 * pp.parasite_coefficient() * len / dt.powi(3));
            let gx = radial * d.x + induced * d_ref.x;
            let gy = radial * d.y + induced * d_ref.y;
            if k + 1 < n {
                g[2 * k] += gx;
                g[2 * k + 1] += gy;
            }
            if k > 0 {
                g[2 * (k - 1)] -= gx;
                g[2 * (k - 1) + 1] -= gy;
            }
        }
        g
    }

    fn numerator_gradient(&self, traj: &[Vec3], h: f64) -> Result<Vec<f64>> {
        let n = traj.len() - 1;
        let dt = self.problem.scenario.dt();
        let mut g = vec![0.0; 2 * (n - 1)];
        for i in 1..n {
            let k = i - 1;
            let q = traj[i];
            let f = |q: Vec3| self.slot_secrecy(k, q).map(|v| v.max(0.0));
            let gx = (f(q + Vec3::new(h, 0.0, 0.0))? - f(q - Vec3::new(h, 0.0, 0.0))?) / (2.0 * h);
            let gy = (f(q + Vec3::new(0.0, h, 0.0))? - f(q - Vec3::new(0.0, h, 0.0))?) / (2.0 * h);
            g[2 * k] = gx * dt;
            g[2 * k + 1] = gy * dt;
        }
        Ok(g)
    }
}

struct Parametric<'s, 'a> {
    sur: &'s TrajSurrogate<'a>,
    lambda: f64,
    fd_step: f64,
}

impl Objective for Parametric<'_, '_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let traj = self.sur.unflatten(x);
        Ok(self.sur.numerator_of(&traj)? - self.lambda * self.sur.denominator_of(&traj))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let traj = self.sur.unflatten(x);
        let mut g = self.sur.numerator_gradient(&traj, self.fd_step)?;
        for (gi, di) in g.iter_mut().zip(self.sur.denominator_gradient(&traj)) {
            *gi -= self.lambda * di;
        }
        Ok(g)
    }

    fn project(&self, x: Vec<f64>) -> Result<Vec<f64>> {
        let traj = self.sur.unflatten(&x);
        let max_step = self.sur.problem.scenario.max_step();
        let out = project_trajectory_within(&traj, max_step, self.sur.trust.as_ref(), &self.sur.q_ref)?;
        Ok(TrajSurrogate::flatten(&out))
    }
}

/// Surrogate ratio solved with a fixed inner configuration.
struct SurrogateRatio<'s, 'a> {
    sur: &'s TrajSurrogate<'a>,
    cfg: TrajConfig,
}

impl FractionalProgram for SurrogateRatio<'_, '_> {
    type Point = Vec<f64>;

    fn numerator(&self, x: &Vec<f64>) -> Result<f64> {
        self.sur.numerator_of(&self.sur.unflatten(x))
    }

    fn denominator(&self, x: &Vec<f64>) -> Result<f64> {
        Ok(self.sur.denominator_of(&self.sur.unflatten(x)))
    }

    fn maximize_parametric(&self, lambda: f64, start: &Vec<f64>) -> Result<Vec<f64>> {
        inner_parametric_solve(self.sur, lambda, start, &self.cfg)
    }
}

/// Projected gradient ascent on `N̂ − λD̂` from a feasible start; never
/// returns a worse point.
pub fn inner_parametric_solve(sur: &TrajSurrogate<'_>, lambda: f64, start: &[f64], cfg: &TrajConfig) -> Result<Vec<f64>> {
    let obj = Parametric { sur, lambda, fd_step: cfg.fd_step };
    Ok(projected_ascent(&obj, start.to_vec(), &cfg.ascent)?.x)
}

/// Dinkelbach on the surrogate ratio, starting from the reference.
pub fn dinkelbach_solve(sur: &TrajSurrogate<'_>, cfg: &TrajConfig) -> Result<(Vec<Vec3>, DinkelbachRecord)> {
    let ratio = SurrogateRatio { sur, cfg: *cfg };
    let out = dinkelbach(&ratio, TrajSurrogate::flatten(sur.reference()), &cfg.dinkelbach)?;
    Ok((sur.unflatten(&out.point), out.record("trajectory", None)))
}

#[derive(Debug, Clone)]
pub struct TrajOutcome {
    pub state: SolutionState,
    pub see: f64,
    pub records: Vec<DinkelbachRecord>,
    /// Set when a round failed and the best state so far was kept.
    pub warning: Option<String>,
}

/// Improves the trajectory of `state` with angles and beams frozen. The
/// returned SEE is never below the input's.
pub fn optimize_trajectory(state: &SolutionState, problem: &Problem, cfg: &TrajConfig) -> Result<TrajOutcome> {
    let mut current = state.clone();
    let mut see = problem.see(&current)?;
    let mut records = Vec::new();
    let mut warning = None;
    if problem.scenario.n_step < 2 {
        return Ok(TrajOutcome { state: current, see, records, warning });
    }
    let radius = cfg.trust_radius.unwrap_or_else(|| problem.scenario.max_step());
    for _ in 0..cfg.sca_iters {
        let round = TrajSurrogate::build(problem, &current)
            .and_then(|sur| match radius.is_finite() {
                true => sur.with_trust_region(&state.trajectory, radius),
                false => Ok(sur),
            })
            .and_then(|sur| dinkelbach_solve(&sur, cfg));
        let (traj, record) = match round {
            Ok(r) => r,
            Err(e) => {
                warning = Some(format!("trajectory round failed: {e}"));
                break;
            }
        };
        records.push(record);
        let mut candidate = current.clone();
        candidate.trajectory = traj;
        let candidate_see = problem.see(&candidate)?;
        if candidate_see < see {
            break;
        }
        let gain = candidate_see - see;
        current = candidate;
        see = candidate_see;
        if gain <= cfg.sca_tol * see.abs() {
            break;
        }
    }
    Ok(TrajOutcome { state: current, see, records, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::BoundMode;
    use crate::metrics::{secrecy_rate_unclipped, SolutionState};
    use crate::scenario::Scenario;
    use rand::Rng;

    fn problem() -> Problem {
        Problem::new(Scenario::table1(), BoundMode::Nominal, true).unwrap()
    }

    #[test]
    fn tangency_at_reference() {
        let p = problem();
        let st = SolutionState::initial(&p.scenario).unwrap();
        let sur = TrajSurrogate::build(&p, &st).unwrap();
        for k in 0..p.scenario.n_step {
            let exact = secrecy_rate_unclipped(&st, k, &p).unwrap();
            let bound = sur.slot_secrecy(k, st.trajectory[k + 1]).unwrap();
            assert!((exact - bound).abs() <= 1e-9, "slot {k}: {exact} vs {bound}");
        }
        let e = p.energy(&st).total();
        assert!((sur.denominator_of(&st.trajectory) - e).abs() <= 1e-9 * e);
    }

    #[test]
    fn minorant_below_true_rate() {
        let p = problem();
        let st = SolutionState::initial(&p.scenario).unwrap();
        let sur = TrajSurrogate::build(&p, &st).unwrap();
        let mut rng = crate::numerics::stream_rng(3, 0);
        for _ in 0..200 {
            let k = rng.random_range(0..p.scenario.n_step);
            let q = st.trajectory[k + 1]
                + Vec3::new(rng.random_range(-200.0..200.0), rng.random_range(-200.0..200.0), 0.0);
            let bound = sur.slot_secrecy(k, q).unwrap();
            let exact = p.slot_rates_at(q, st.orientations[k], &st.beams[k]).unwrap().unclipped();
            assert!(bound <= exact + 1e-12, "{bound} > {exact}");
        }
    }

    #[test]
    fn energy_majorant_above_true_energy() {
        let p = problem();
        let st = SolutionState::initial(&p.scenario).unwrap();
        let sur = TrajSurrogate::build(&p, &st).unwrap();
        let mut rng = crate::numerics::stream_rng(4, 0);
        for _ in 0..200 {
            let d = Vec3::new(rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0), 0.0);
            let exact = crate::energy::slot_propulsion_energy(&p.scenario, d.norm());
            assert!(sur.slot_propulsion_bound(3, d) >= exact - 1e-9);
        }
        // exact at the reference displacement
        assert!((sur.slot_propulsion_bound(3, Vec3::new(10.0, 0.0, 0.0)) - crate::energy::slot_propulsion_energy(&p.scenario, 10.0)).abs() < 1e-9);
    }

    #[test]
    fn denominator_gradient_matches_differences() {
        let p = problem();
        let mut st = SolutionState::initial(&p.scenario).unwrap();
        for (i, q) in st.trajectory.iter_mut().enumerate().skip(1).take(39) {
            q.y += 3.0 * (i as f64 * 0.7).sin();
        }
        let sur = TrajSurrogate::build(&p, &SolutionState::initial(&p.scenario).unwrap()).unwrap();
        let x = TrajSurrogate::flatten(&st.trajectory);
        let g = sur.denominator_gradient(&st.trajectory);
        let h = 1e-5;
        for i in [0, 1, 10, 37, 77] {
            let mut xp = x.clone();
            xp[i] += h;
            let mut xm = x.clone();
            xm[i] -= h;
            let fd = (sur.denominator_of(&sur.unflatten(&xp)) - sur.denominator_of(&sur.unflatten(&xm))) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-5 * (1.0 + fd.abs()), "coord {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn projection_restores_speed_caps() {
        let s = Scenario::table1();
        let anchor = SolutionState::straight_line(&s).trajectory;
        let mut traj = anchor.clone();
        traj[5].y += 40.0;
        traj[6].x -= 25.0;
        traj[30].y -= 12.0;
        let out = project_trajectory(&traj, s.max_step(), &anchor).unwrap();
        assert!(max_violation(&out, s.max_step()) <= FEASIBILITY_TOL);
        assert_eq!(out[0], s.q_i);
        assert_eq!(out[40], s.q_f);
        // identity on feasible input
        assert_eq!(project_trajectory(&anchor, s.max_step(), &anchor).unwrap(), anchor);
    }

    #[test]
    fn trust_projection_meets_balls_and_speed_caps() {
        let s = Scenario::table1();
        let anchor = SolutionState::straight_line(&s).trajectory;
        let region = TrustRegion { centre: anchor.clone(), radius: 4.0 };
        let mut traj = anchor.clone();
        for (i, q) in traj.iter_mut().enumerate().skip(1).take(39) {
            q.y += 30.0 * (i as f64 * 0.4).sin();
            q.x -= 9.0 * (i as f64 * 1.3).cos();
        }
        let out = project_trajectory_within(&traj, s.max_step(), Some(&region), &anchor).unwrap();
        assert!(max_violation(&out, s.max_step()) <= FEASIBILITY_TOL);
        assert!(region.violation(&out) <= FEASIBILITY_TOL);
        assert_eq!(out[0], s.q_i);
        assert_eq!(out[40], s.q_f);
    }

    #[test]
    fn trust_region_must_contain_reference() {
        let p = problem();
        let st = SolutionState::initial(&p.scenario).unwrap();
        let mut far = st.trajectory.clone();
        far[7].y += 10.0;
        let sur = TrajSurrogate::build(&p, &st).unwrap();
        assert!(sur.clone().with_trust_region(&far, 5.0).is_err());
        assert!(sur.with_trust_region(&far, 10.5).is_ok());
    }

    #[test]
    fn projection_of_single_free_waypoint_is_lens_projection() {
        // two balls of radius 1 around (0,0) and (1.5,0): the projection of
        // (0.75, 2) is (0.75, √(1 − 0.75²))
        let traj = vec![Vec3::ZERO, Vec3::new(0.75, 2.0, 0.0), Vec3::new(1.5, 0.0, 0.0)];
        let anchor = vec![Vec3::ZERO, Vec3::new(0.75, 0.0, 0.0), Vec3::new(1.5, 0.0, 0.0)];
        let out = project_trajectory(&traj, 1.0, &anchor).unwrap();
        let expected = (1.0f64 - 0.75 * 0.75).sqrt();
        assert!((out[1].x - 0.75).abs() < 1e-6 && (out[1].y - expected).abs() < 1e-6, "{:?}", out[1]);
    }

    #[test]
    fn trajectory_block_improves_see() {
        let p = problem();
        let st = SolutionState::initial(&p.scenario).unwrap();
        let before = p.see(&st).unwrap();
        let cfg = TrajConfig { sca_iters: 2, ..TrajConfig::default() };
        let out = optimize_trajectory(&st, &p, &cfg).unwrap();
        assert!(out.see >= before);
        assert!(out.state.violations(&p.scenario).is_empty());
        for r in &out.records {
            assert!(r.lambdas_nondecreasing());
        }
    }
}
