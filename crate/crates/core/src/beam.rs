//! Jamming-beam block: per-slot semidefinite relaxation of the SEE ratio,
//! a concave minorant of the secrecy rate in `W = w wᴴ`, Dinkelbach with
//! projected gradient ascent, and Gaussian randomization back to a vector.

use std::f64::consts::LN_2;

use rand::Rng;

use crate::ascent::{projected_ascent, AscentConfig, Objective};
use crate::error::Result;
use crate::fractional::{dinkelbach, DinkelbachConfig, DinkelbachRecord, FractionalProgram};
use crate::metrics::{EveJamming, Problem, SeeCache, SolutionState};
use crate::numerics::{eig_hermitian, project_psd_trace, sample_complex_gaussian, stream_rng, ComplexVec, HermitianMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig {
    pub dinkelbach: DinkelbachConfig,
    pub ascent: AscentConfig,
    /// Gaussian randomization draws per slot.
    pub samples: usize,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            dinkelbach: DinkelbachConfig { tol: 1e-6, max_iter: 30 },
            ascent: AscentConfig {
                max_iter: 100,
                init_step: 1.0,
                armijo: 0.1,
                shrink: 0.5,
                max_backtracks: 30,
                tol: 1e-12,
            },
            samples: 100,
        }
    }
}

/// Everything slot `slot`'s beam update needs, with the rest of the state
/// folded into `omega1` (secrecy of the other slots times Δt) and `omega2`
/// (all energy except this slot's communication energy).
#[derive(Debug, Clone)]
pub struct BeamSubproblem {
    pub slot: usize,
    pub user_signal: f64,
    pub eve_signal: f64,
    pub sigma2_u: f64,
    pub sigma2_e: f64,
    pub p_j: f64,
    pub dt: f64,
    /// Jammer → user channel.
    pub h_u: ComplexVec,
    pub eve: EveJamming,
    pub omega1: f64,
    pub omega2: f64,
}

impl BeamSubproblem {
    pub fn new(problem: &Problem, state: &SolutionState, cache: &SeeCache, k: usize) -> Result<Self> {
        let s = &problem.scenario;
        let links = problem.slot_links(state.trajectory[k + 1], state.orientations[k])?;
        let dt = s.dt();
        let omega1 = dt * (0..state.slots()).filter(|&i| i != k).map(|i| cache.r_sec[i]).sum::<f64>();
        let omega2 = cache.energy.total() - cache.energy.e_com[k];
        Ok(BeamSubproblem {
            slot: k,
            user_signal: problem.user_signal(),
            eve_signal: problem.eve_signal(),
            sigma2_u: s.sigma2_u,
            sigma2_e: s.sigma2_e,
            p_j: s.p_j,
            dt,
            h_u: links.h_ju.gain,
            eve: links.eve_jam,
            omega1,
            omega2,
        })
    }

    pub fn dim(&self) -> usize {
        self.h_u.len()
    }

    /// Neither receiver can hear the jammer, so the beam only costs energy.
    pub fn is_degenerate(&self) -> bool {
        self.h_u.norm_sqr() == 0.0 && self.eve.directions.iter().all(|a| a.norm_sqr() == 0.0)
    }

    fn user_jam(&self, w: &HermitianMatrix) -> f64 {
        self.p_j * w.quad_form(&self.h_u)
    }

    /// Jamming power at the eve and the direction attaining the minimum.
    fn eve_jam(&self, w: &HermitianMatrix) -> (f64, Option<usize>) {
        let mut best: Option<(f64, usize)> = None;
        for (i, a) in self.eve.directions.iter().enumerate() {
            let g = w.quad_form(a);
            if best.is_none_or(|(b, _)| g < b) {
                best = Some((g, i));
            }
        }
        match best {
            Some((g, i)) => (self.eve.offset + self.p_j * g, Some(i)),
            None => (self.eve.offset, None),
        }
    }

    /// Un-clipped secrecy rate with the beam lifted to `W`.
    pub fn secrecy(&self, w: &HermitianMatrix) -> f64 {
        let iu = self.user_jam(w);
        let (je, _) = self.eve_jam(w);
        (self.sigma2_u + self.user_signal + iu).log2() - (self.sigma2_u + iu).log2() + (self.sigma2_e + je).log2()
            - (self.sigma2_e + self.eve_signal + je).log2()
    }

    /// Concave minorant of [`Self::secrecy`], tight at `w_ref`: the two
    /// convex terms are replaced by their tangents there.
    pub fn secrecy_lower_bound(&self, w: &HermitianMatrix, w_ref: &HermitianMatrix) -> f64 {
        let iu = self.user_jam(w);
        let iu_ref = self.user_jam(w_ref);
        let user = (self.sigma2_u + self.user_signal + iu).log2() - (self.sigma2_u + iu_ref).log2()
            - (iu - iu_ref) / ((self.sigma2_u + iu_ref) * LN_2);
        let (je, _) = self.eve_jam(w);
        let (je_ref, active) = self.eve_jam(w_ref);
        // the tangent follows the piece active at the reference
        let je_piece = match active {
            Some(i) => self.eve.offset + self.p_j * w.quad_form(&self.eve.directions[i]),
            None => self.eve.offset,
        };
        let floor_ref = self.sigma2_e + self.eve_signal + je_ref;
        let eve = (self.sigma2_e + je).log2() - floor_ref.log2() - (je_piece - je_ref) / (floor_ref * LN_2);
        user + eve
    }

    /// Gradient of the minorant (a supergradient where the eve minimum has
    /// ties), flattened like [`HermitianMatrix::to_real_vec`].
    fn lower_bound_gradient(&self, w: &HermitianMatrix, w_ref: &HermitianMatrix) -> Vec<f64> {
        let n = self.dim();
        let mut g = vec![0.0; 2 * n * n];
        let mut add_outer = |v: &ComplexVec, scale: f64| {
            for i in 0..n {
                for j in 0..n {
                    let z = v[i] * v[j].conj() * scale;
                    g[2 * (i * n + j)] += z.re;
                    g[2 * (i * n + j) + 1] += z.im;
                }
            }
        };
        let iu = self.user_jam(w);
        let iu_ref = self.user_jam(w_ref);
        let cu = self.p_j / LN_2 * (1.0 / (self.sigma2_u + self.user_signal + iu) - 1.0 / (self.sigma2_u + iu_ref));
        add_outer(&self.h_u, cu);
        let (je, active_now) = self.eve_jam(w);
        let (je_ref, active_ref) = self.eve_jam(w_ref);
        if let Some(i) = active_now {
            add_outer(&self.eve.directions[i], self.p_j / ((self.sigma2_e + je) * LN_2));
        }
        if let Some(i) = active_ref {
            let floor_ref = self.sigma2_e + self.eve_signal + je_ref;
            add_outer(&self.eve.directions[i], -self.p_j / (floor_ref * LN_2));
        }
        g
    }

    /// The exact global SEE with this slot's beam set to `w`.
    pub fn slot_objective(&self, w: &ComplexVec) -> f64 {
        let r = self.secrecy(&w.outer()).max(0.0);
        (self.omega1 + self.dt * r) / (self.omega2 + self.p_j * w.norm_sqr() * self.dt)
    }
}

struct SdrRatio<'a> {
    sub: &'a BeamSubproblem,
    w_ref: HermitianMatrix,
    ascent: AscentConfig,
}

impl SdrRatio<'_> {
    fn matrix(&self, x: &[f64]) -> Result<HermitianMatrix> {
        HermitianMatrix::from_real_vec(self.sub.dim(), x)
    }
}

impl FractionalProgram for SdrRatio<'_> {
    type Point = Vec<f64>;

    fn numerator(&self, x: &Vec<f64>) -> Result<f64> {
        let w = self.matrix(x)?;
        Ok(self.sub.omega1 + self.sub.dt * self.sub.secrecy_lower_bound(&w, &self.w_ref))
    }

    fn denominator(&self, x: &Vec<f64>) -> Result<f64> {
        let w = self.matrix(x)?;
        Ok(self.sub.omega2 + self.sub.p_j * w.trace() * self.sub.dt)
    }

    fn maximize_parametric(&self, lambda: f64, start: &Vec<f64>) -> Result<Vec<f64>> {
        let obj = SdrParametric { ratio: self, lambda };
        Ok(projected_ascent(&obj, start.clone(), &self.ascent)?.x)
    }
}

struct SdrParametric<'r, 'a> {
    ratio: &'r SdrRatio<'a>,
    lambda: f64,
}

impl Objective for SdrParametric<'_, '_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let x = x.to_vec();
        Ok(self.ratio.numerator(&x)? - self.lambda * self.ratio.denominator(&x)?)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let sub = self.ratio.sub;
        let w = self.ratio.matrix(x)?;
        let mut g = sub.lower_bound_gradient(&w, &self.ratio.w_ref);
        for v in g.iter_mut() {
            *v *= sub.dt;
        }
        let n = sub.dim();
        for i in 0..n {
            g[2 * (i * n + i)] -= self.lambda * sub.p_j * sub.dt;
        }
        Ok(g)
    }

    fn project(&self, x: Vec<f64>) -> Result<Vec<f64>> {
        let w = self.ratio.matrix(&x)?;
        Ok(project_psd_trace(&w, 1.0)?.to_real_vec())
    }
}

/// Maximizes the relaxed slot ratio from the feasible `w_init`, linearizing
/// at `w_init`. Returns `w_init` when the solve fails.
pub fn solve_slot_sdr(
    sub: &BeamSubproblem,
    w_init: &HermitianMatrix,
    cfg: &BeamConfig,
) -> (HermitianMatrix, Option<DinkelbachRecord>) {
    let ratio = SdrRatio { sub, w_ref: w_init.clone(), ascent: cfg.ascent };
    let solved = dinkelbach(&ratio, w_init.to_real_vec(), &cfg.dinkelbach)
        .and_then(|out| Ok((ratio.matrix(&out.point)?, out.record("beams", Some(sub.slot)))));
    match solved {
        Ok((w, rec)) => (w, Some(rec)),
        Err(_) => (w_init.clone(), None),
    }
}

/// Recovers a beam from the relaxed solution: `K` draws `V Λ^{1/2} z`
/// (rescaled into the unit ball), the dominant eigenvector at unit and at
/// `√λ₁` length, and the incumbent. The incumbent is replaced only by a
/// strictly better candidate.
pub fn gaussian_randomization<R: Rng + ?Sized>(
    w_star: &HermitianMatrix,
    sub: &BeamSubproblem,
    incumbent: &ComplexVec,
    samples: usize,
    rng: &mut R,
) -> Result<ComplexVec> {
    let eig = eig_hermitian(w_star)?;
    let n = sub.dim();
    let mut best = incumbent.clone();
    let mut best_val = sub.slot_objective(incumbent);
    let consider = |w: ComplexVec, best: &mut ComplexVec, best_val: &mut f64| {
        let v = sub.slot_objective(&w);
        if v > *best_val {
            *best_val = v;
            *best = w;
        }
    };
    let v1 = &eig.eigenvectors[0];
    consider(v1.clone(), &mut best, &mut best_val);
    let l1 = eig.eigenvalues[0].max(0.0);
    if l1 > 0.0 {
        consider(v1.scaled_real(l1.sqrt()).clamp_norm(1.0), &mut best, &mut best_val);
    }
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    for _ in 0..samples {
        let z = sample_complex_gaussian(n, rng);
        let w = ComplexVec::from_fn(n, |i| {
            eig.eigenvectors
                .iter()
                .zip(&roots)
                .enumerate()
                .map(|(j, (v, r))| v[i] * z[j] * *r)
                .sum()
        });
        consider(w.clamp_norm(1.0), &mut best, &mut best_val);
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct BeamOutcome {
    pub state: SolutionState,
    pub see: f64,
    pub records: Vec<DinkelbachRecord>,
    pub updated_slots: usize,
}

/// Updates the beams slot by slot, refreshing the other-slot aggregates
/// after every slot. SEE never decreases.
///
/// Randomness for slot `k` in outer round `round` comes from its own stream
/// of `seed`, so results do not depend on evaluation order.
pub fn optimize_beams(
    state: &SolutionState,
    problem: &Problem,
    cfg: &BeamConfig,
    seed: u64,
    round: u64,
) -> Result<BeamOutcome> {
    let mut st = state.clone();
    let mut cache = SeeCache::new(&st, problem)?;
    let mut records = Vec::new();
    let mut updated = 0;
    for k in 0..st.slots() {
        let sub = BeamSubproblem::new(problem, &st, &cache, k)?;
        if sub.is_degenerate() {
            continue;
        }
        let incumbent = st.beams[k].clone();
        let (w_star, rec) = solve_slot_sdr(&sub, &incumbent.outer(), cfg);
        records.extend(rec);
        let mut rng = stream_rng(seed, (round << 32) | k as u64);
        let w = gaussian_randomization(&w_star, &sub, &incumbent, cfg.samples, &mut rng)?;
        if w != incumbent {
            updated += 1;
            cache.r_sec[k] = problem
                .slot_rates_at(st.trajectory[k + 1], st.orientations[k], &w)?
                .clipped();
            cache.energy.e_com[k] = crate::energy::slot_com_energy(&problem.scenario, w.norm_sqr());
            st.beams[k] = w;
        }
    }
    let see = problem.see(&st)?;
    let start = problem.see(state)?;
    if see < start {
        return Ok(BeamOutcome { state: state.clone(), see: start, records, updated_slots: 0 });
    }
    Ok(BeamOutcome { state: st, see, records, updated_slots: updated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::BoundMode;
    use crate::numerics::C64;
    use crate::scenario::Scenario;

    fn setup(bound: BoundMode) -> (Problem, SolutionState) {
        let p = Problem::new(Scenario::table1(), bound, true).unwrap();
        let st = SolutionState::initial(&p.scenario).unwrap();
        (p, st)
    }

    fn random_psd(n: usize, rng: &mut impl Rng) -> HermitianMatrix {
        let v = sample_complex_gaussian(n, rng);
        let u = sample_complex_gaussian(n, rng);
        let m = v.outer().add_scaled(&u.outer(), 0.5);
        let t = m.trace() / rng.random_range(0.1..1.0);
        m.scaled(1.0 / t)
    }

    #[test]
    fn tangency_and_minorant() {
        for bound in [BoundMode::Nominal, BoundMode::PathOnly] {
            let (p, st) = setup(bound);
            let cache = SeeCache::new(&st, &p).unwrap();
            let sub = BeamSubproblem::new(&p, &st, &cache, 12).unwrap();
            let mut rng = stream_rng(9, 0);
            let w_ref = st.beams[12].outer();
            assert!((sub.secrecy_lower_bound(&w_ref, &w_ref) - sub.secrecy(&w_ref)).abs() < 1e-9);
            for _ in 0..100 {
                let w = random_psd(16, &mut rng);
                assert!(sub.secrecy_lower_bound(&w, &w_ref) <= sub.secrecy(&w) + 1e-12);
            }
        }
    }

    #[test]
    fn rank_one_lift_matches_vector_rate() {
        let (p, st) = setup(BoundMode::Nominal);
        let cache = SeeCache::new(&st, &p).unwrap();
        let sub = BeamSubproblem::new(&p, &st, &cache, 7).unwrap();
        let lifted = sub.secrecy(&st.beams[7].outer());
        let direct = p.slot_rates(&st, 7).unwrap().unclipped();
        assert!((lifted - direct).abs() < 1e-9);
        assert!((sub.slot_objective(&st.beams[7]) - p.see(&st).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_differences() {
        let (p, st) = setup(BoundMode::Nominal);
        let cache = SeeCache::new(&st, &p).unwrap();
        let sub = BeamSubproblem::new(&p, &st, &cache, 3).unwrap();
        let mut rng = stream_rng(2, 0);
        let w_ref = random_psd(16, &mut rng);
        let w = random_psd(16, &mut rng);
        let g = sub.lower_bound_gradient(&w, &w_ref);
        let dir = random_psd(16, &mut rng).add_scaled(&random_psd(16, &mut rng), -1.0);
        let h = 1e-7;
        let fd = (sub.secrecy_lower_bound(&w.add_scaled(&dir, h), &w_ref)
            - sub.secrecy_lower_bound(&w.add_scaled(&dir, -h), &w_ref))
            / (2.0 * h);
        let analytic: f64 = g.iter().zip(dir.to_real_vec()).map(|(a, b)| a * b).sum();
        assert!((fd - analytic).abs() < 1e-5 * (1.0 + fd.abs()), "{fd} vs {analytic}");
    }

    #[test]
    fn zero_jammer_power_returns_start() {
        let (p, st) = setup(BoundMode::Nominal);
        let cache = SeeCache::new(&st, &p).unwrap();
        let mut sub = BeamSubproblem::new(&p, &st, &cache, 5).unwrap();
        sub.p_j = 0.0;
        let w0 = st.beams[5].outer();
        let (w, _) = solve_slot_sdr(&sub, &w0, &BeamConfig::default());
        assert!(w.max_abs_diff(&w0) < 1e-12);
    }

    #[test]
    fn rank_one_solution_recovers_its_vector() {
        let (p, st) = setup(BoundMode::Nominal);
        let cache = SeeCache::new(&st, &p).unwrap();
        let sub = BeamSubproblem::new(&p, &st, &cache, 20).unwrap();
        let v = ComplexVec::from_fn(16, |i| C64::from_polar(0.25, 0.3 * i as f64));
        let mut rng = stream_rng(0, 0);
        let zero = ComplexVec::zeros(16);
        let w = gaussian_randomization(&v.outer(), &sub, &zero, 0, &mut rng).unwrap();
        let expected = if sub.slot_objective(&v) > sub.slot_objective(&zero) { 1.0 } else { 0.0 };
        // v is unit-norm, so both eigenvector candidates coincide with it up to phase
        assert!((w.inner(&v).norm() - expected).abs() < 1e-9);
    }

    #[test]
    fn beams_improve_and_stay_feasible() {
        let (p, st) = setup(BoundMode::Nominal);
        let before = p.see(&st).unwrap();
        let out = optimize_beams(&st, &p, &BeamConfig::default(), 0, 0).unwrap();
        assert!(out.see >= before);
        assert!(out.state.violations(&p.scenario).is_empty());
        for r in &out.records {
            assert!(r.lambdas_nondecreasing());
        }
    }
}
