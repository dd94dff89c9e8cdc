//! Line-of-sight channels and worst-case eavesdropper gain bounds.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{
    frame_matrix, local_direction_in_frame, steering_vector, ArrayGeometry, Mat3, Orientation,
    Vec3, SPEED_OF_LIGHT,
};
use crate::numerics::ComplexVec;
use crate::scenario::Scenario;

/// `β = (c / 4πf)² · d^{−α}`.
pub fn path_loss(d: f64, alpha: f64, f: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("distance must be positive, got {d}")));
    }
    let beta0 = (SPEED_OF_LIGHT / (4.0 * PI * f)).powi(2);
    Ok(beta0 * d.powf(-alpha))
}

/// Channel vector `h = √β · g` together with its large-scale parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVec {
    pub gain: ComplexVec,
    pub path_loss: f64,
    pub distance: f64,
}

impl ChannelVec {
    /// Unit-modulus array response `g = h / √β`.
    pub fn steering(&self) -> ComplexVec {
        self.gain.scaled_real(1.0 / self.path_loss.sqrt())
    }
}

pub fn channel_in_frame(
    tx_pos: Vec3,
    rx_pos: Vec3,
    frame: &Mat3,
    geom: &ArrayGeometry,
    alpha: f64,
    f: f64,
) -> Result<ChannelVec> {
    let u = local_direction_in_frame(frame, tx_pos, rx_pos)?;
    let distance = tx_pos.distance(rx_pos);
    let beta = path_loss(distance, alpha, f)?;
    Ok(ChannelVec {
        gain: steering_vector(geom, u, f).scaled_real(beta.sqrt()),
        path_loss: beta,
        distance,
    })
}

pub fn channel(
    tx_pos: Vec3,
    rx_pos: Vec3,
    o: Orientation,
    geom: &ArrayGeometry,
    alpha: f64,
    f: f64,
) -> Result<ChannelVec> {
    channel_in_frame(tx_pos, rx_pos, &frame_matrix(o), geom, alpha, f)
}

/// BS array (static, mounted with the same downward flip) to a receiver.
pub fn bs_channel(scenario: &Scenario, rx_pos: Vec3, alpha: f64) -> Result<ChannelVec> {
    channel_in_frame(
        scenario.q_b,
        rx_pos,
        &Mat3::MOUNT_FLIP,
        &scenario.bs_geometry(),
        alpha,
        scenario.frequency,
    )
}

/// Path-gain bounds over the uncertainty disc: the largest BS→eve gain and
/// the smallest jammer→eve gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveGainBounds {
    pub bs_eve: f64,
    pub jammer_eve: f64,
}

pub fn worst_case_eve_gains(q_j: Vec3, scenario: &Scenario) -> Result<EveGainBounds> {
    let d_be = scenario.q_b.distance(scenario.q_e);
    if d_be <= scenario.epsilon {
        return Err(Error::InfeasibleScenario(format!(
            "BS inside uncertainty region: |q_b - q_e| = {d_be} <= epsilon = {}",
            scenario.epsilon
        )));
    }
    let d_je = q_j.distance(scenario.q_e);
    Ok(EveGainBounds {
        bs_eve: path_loss(d_be - scenario.epsilon, scenario.alpha_be, scenario.frequency)?,
        jammer_eve: path_loss(d_je + scenario.epsilon, scenario.alpha_je, scenario.frequency)?,
    })
}

/// How the eavesdropper rate bound treats array gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundMode {
    /// Worst-case path gains times the beam gains toward the nominal eve
    /// position.
    #[default]
    Nominal,
    /// Worst-case path gains with unit gain factors on both links.
    PathOnly,
    /// Provable upper bound: `N_B‖w_B‖²` on the BS link and the smallest
    /// jamming beam gain over the uncertainty grid.
    Rigorous,
}

impl BoundMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundMode::Nominal => "nominal",
            BoundMode::PathOnly => "path-only",
            BoundMode::Rigorous => "rigorous",
        }
    }
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nominal" => Ok(BoundMode::Nominal),
            "path-only" | "path_only" => Ok(BoundMode::PathOnly),
            "rigorous" => Ok(BoundMode::Rigorous),
            other => Err(Error::schema(
                "bound_mode",
                format!("expected nominal, path-only or rigorous, got `{other}`"),
            )),
        }
    }
}

/// Grid resolution used by the rigorous bound's minimum beam gain.
pub const RIGOROUS_GRID: usize = 64;

/// Polar grid over the ground disc of radius `epsilon` around the nominal
/// eve: the centre plus `resolution` rings of `resolution` points each.
///
/// Grids nest: every point at resolution `r` also appears at `2r`.
pub fn uncertainty_grid(scenario: &Scenario, resolution: usize) -> Vec<Vec3> {
    let centre = scenario.q_e;
    let mut pts = vec![centre];
    if scenario.epsilon == 0.0 {
        return pts;
    }
    for ring in 1..=resolution {
        let r = scenario.epsilon * ring as f64 / resolution as f64;
        for j in 0..resolution {
            let theta = 2.0 * PI * j as f64 / resolution as f64;
            let (s, c) = theta.sin_cos();
            pts.push(Vec3::new(centre.x + r * c, centre.y + r * s, centre.z));
        }
    }
    pts
}

/// Brute-force maximum eavesdropper rate over the uncertainty grid using
/// exact channels.
pub fn eve_rate_oracle(
    q_j: Vec3,
    o: Orientation,
    w_j: &ComplexVec,
    w_b: &ComplexVec,
    scenario: &Scenario,
    grid_resolution: usize,
) -> Result<f64> {
    if grid_resolution < 8 {
        return Err(Error::Validation(format!(
            "grid resolution must be >= 8, got {grid_resolution}"
        )));
    }
    let geom = scenario.ma_geometry();
    let frame = frame_matrix(o);
    let mut best = f64::NEG_INFINITY;
    for q in uncertainty_grid(scenario, grid_resolution) {
        let h_be = bs_channel(scenario, q, scenario.alpha_be)?;
        let h_je = channel_in_frame(q_j, q, &frame, &geom, scenario.alpha_je, scenario.frequency)?;
        let signal = scenario.p_b * h_be.gain.inner(w_b).norm_sqr();
        let jam = scenario.p_j * h_je.gain.inner(w_j).norm_sqr();
        let rate = (1.0 + signal / (jam + scenario.sigma2_e)).log2();
        best = best.max(rate);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::mrt_beam;

    #[test]
    fn reference_path_loss() {
        let b = path_loss(1.0, 2.0, 2.8e10).unwrap();
        assert!((b - 7.269_536_453_9e-7).abs() < 1e-16);
        let b2 = path_loss(2.0, 2.0, 2.8e10).unwrap();
        assert!((b2 / b - 0.25).abs() < 1e-15);
        assert_eq!(path_loss(17.0, 0.0, 2.8e10).unwrap(), b);
        assert!(matches!(path_loss(0.0, 2.0, 2.8e10), Err(Error::Domain(_))));
    }

    #[test]
    fn path_loss_scaling() {
        for (d, s, alpha) in [(3.0, 2.0, 2.8), (10.0, 0.5, 3.5), (100.0, 7.0, 2.0)] {
            let ratio = path_loss(d * s, alpha, 1e9).unwrap() / path_loss(d, alpha, 1e9).unwrap();
            assert!((ratio - s.powf(-alpha)).abs() < 1e-12 * ratio);
        }
    }

    #[test]
    fn nadir_channel_is_scaled_ones() {
        let s = Scenario::table1();
        let h = channel(
            Vec3::new(0.0, 0.0, 50.0),
            Vec3::ZERO,
            Orientation::ZERO,
            &s.ma_geometry(),
            2.8,
            s.frequency,
        )
        .unwrap();
        let amp = h.path_loss.sqrt();
        assert!(h.gain.iter().all(|z| (z.re - amp).abs() < 1e-12 * amp && z.im.abs() < 1e-12 * amp));
        assert!((h.gain.norm_sqr() / (h.path_loss * 16.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn table1_user_channel_distance() {
        let s = Scenario::table1();
        let h = channel(s.q_i, s.q_u, Orientation::ZERO, &s.ma_geometry(), s.alpha_ju, s.frequency).unwrap();
        let d = (200f64.powi(2) + 150f64.powi(2) + 50f64.powi(2)).sqrt();
        assert!((h.distance - d).abs() < 1e-12);
        assert_eq!(h.path_loss, path_loss(d, s.alpha_ju, s.frequency).unwrap());
        assert!((h.gain.norm_sqr() / (h.path_loss * 16.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eve_bounds_at_zero_uncertainty_are_true_gains() {
        let mut s = Scenario::table1();
        s.epsilon = 0.0;
        let q = Vec3::new(20.0, 30.0, 50.0);
        let b = worst_case_eve_gains(q, &s).unwrap();
        assert_eq!(b.bs_eve, path_loss(s.q_b.distance(s.q_e), s.alpha_be, s.frequency).unwrap());
        assert_eq!(b.jammer_eve, path_loss(q.distance(s.q_e), s.alpha_je, s.frequency).unwrap());
    }

    #[test]
    fn eve_bounds_monotone_in_uncertainty() {
        let mut s = Scenario::table1();
        let q = Vec3::new(20.0, 30.0, 50.0);
        let mut prev = worst_case_eve_gains(q, &s).unwrap();
        for eps in [60.0, 80.0, 120.0] {
            s.epsilon = eps;
            let b = worst_case_eve_gains(q, &s).unwrap();
            assert!(b.bs_eve > prev.bs_eve && b.jammer_eve < prev.jammer_eve);
            prev = b;
        }
    }

    #[test]
    fn table1_bs_eve_bound() {
        let s = Scenario::table1();
        let d = (150f64.powi(2) + 100f64.powi(2) + 12.5f64.powi(2)).sqrt();
        assert!((d - 180.7104).abs() < 1e-4);
        let b = worst_case_eve_gains(s.q_i, &s).unwrap();
        let expected = s.beta0() * (d - 50.0).powf(-3.5);
        assert!((b.bs_eve / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bs_inside_region_is_infeasible() {
        let mut s = Scenario::table1();
        s.epsilon = 181.0;
        assert!(matches!(
            worst_case_eve_gains(s.q_i, &s),
            Err(Error::InfeasibleScenario(_))
        ));
    }

    fn oracle_inputs(s: &Scenario) -> (Vec3, Orientation, ComplexVec, ComplexVec) {
        let q = Vec3::new(60.0, 40.0, 50.0);
        let o = Orientation::new(0.3, -0.2).unwrap();
        let w_j = mrt_beam(&channel(q, s.q_e, o, &s.ma_geometry(), s.alpha_je, s.frequency).unwrap().gain).unwrap();
        let w_b = mrt_beam(&bs_channel(s, s.q_u, s.alpha_bu).unwrap().gain).unwrap();
        (q, o, w_j, w_b)
    }

    #[test]
    fn oracle_without_uncertainty_is_nominal_rate() {
        let mut s = Scenario::table1();
        s.epsilon = 0.0;
        let (q, o, w_j, w_b) = oracle_inputs(&s);
        let h_be = bs_channel(&s, s.q_e, s.alpha_be).unwrap();
        let h_je = channel(q, s.q_e, o, &s.ma_geometry(), s.alpha_je, s.frequency).unwrap();
        let gamma = s.p_b * h_be.gain.inner(&w_b).norm_sqr()
            / (s.p_j * h_je.gain.inner(&w_j).norm_sqr() + s.sigma2_e);
        let oracle = eve_rate_oracle(q, o, &w_j, &w_b, &s, 8).unwrap();
        assert_eq!(oracle, (1.0 + gamma).log2());
    }

    #[test]
    fn finer_grid_never_decreases_oracle() {
        let s = Scenario::table1();
        let (q, o, w_j, w_b) = oracle_inputs(&s);
        let coarse = eve_rate_oracle(q, o, &w_j, &w_b, &s, 8).unwrap();
        let fine = eve_rate_oracle(q, o, &w_j, &w_b, &s, 16).unwrap();
        assert!(fine >= coarse);
        assert!(eve_rate_oracle(q, o, &w_j, &w_b, &s, 4).is_err());
    }

    #[test]
    fn bound_mode_parsing() {
        assert_eq!("nominal".parse::<BoundMode>().unwrap(), BoundMode::Nominal);
        assert_eq!("rigorous".parse::<BoundMode>().unwrap(), BoundMode::Rigorous);
        assert_eq!("path-only".parse::<BoundMode>().unwrap(), BoundMode::PathOnly);
        assert!("loose".parse::<BoundMode>().is_err());
    }
}
