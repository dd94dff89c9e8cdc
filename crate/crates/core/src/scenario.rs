//! The immutable problem instance.

use crate::energy::{MAPowerParams, RotorcraftPowerParams};
use crate::geometry::{ArrayGeometry, Vec3, SPEED_OF_LIGHT};

/// Node placement, radio parameters, flight limits and power models.
///
/// Ground nodes sit at `z = 0`; the BS at `h_b`; the jammer flies at `h_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub q_b: Vec3,
    pub q_u: Vec3,
    /// Estimated eavesdropper position (centre of the uncertainty disc).
    pub q_e: Vec3,
    pub q_i: Vec3,
    pub q_f: Vec3,
    pub h_b: f64,
    pub h_j: f64,
    pub p_b: f64,
    pub p_j: f64,
    pub sigma2_u: f64,
    pub sigma2_e: f64,
    pub alpha_bu: f64,
    pub alpha_be: f64,
    pub alpha_ju: f64,
    pub alpha_je: f64,
    pub frequency: f64,
    /// Radius of the eavesdropper uncertainty disc (m).
    pub epsilon: f64,
    pub t_flight: f64,
    pub n_step: usize,
    pub v_max: f64,
    pub n_b: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub propulsion: RotorcraftPowerParams,
    pub ma: MAPowerParams,
}

/// One named problem found by [`Scenario::check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub key: String,
    pub message: String,
}

impl Finding {
    fn new(key: &str, message: impl Into<String>) -> Self {
        Finding {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl Scenario {
    /// The reference simulation settings (16-element 4×4 array, 40 slots).
    pub fn table1() -> Scenario {
        let h_b = 12.5;
        let h_j = 50.0;
        Scenario {
            q_b: Vec3::new(0.0, 0.0, h_b),
            q_u: Vec3::new(100.0, 150.0, 0.0),
            q_e: Vec3::new(150.0, 100.0, 0.0),
            q_i: Vec3::new(-100.0, 0.0, h_j),
            q_f: Vec3::new(300.0, 0.0, h_j),
            h_b,
            h_j,
            p_b: 100.0,
            p_j: 10.0,
            sigma2_u: dbm_to_watts(-114.0),
            sigma2_e: dbm_to_watts(-114.0),
            alpha_bu: 3.5,
            alpha_be: 3.5,
            alpha_ju: 2.8,
            alpha_je: 2.8,
            frequency: 28e9,
            epsilon: 50.0,
            t_flight: 40.0,
            n_step: 40,
            v_max: 15.0,
            n_b: 4,
            n_x: 4,
            n_y: 4,
            propulsion: RotorcraftPowerParams::TABLE1,
            ma: MAPowerParams::TABLE1,
        }
    }

    /// Slot length Δt.
    pub fn dt(&self) -> f64 {
        self.t_flight / self.n_step as f64
    }

    pub fn n_ma(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }

    /// Path gain at the 1 m reference distance, `(c / 4πf)²`.
    pub fn beta0(&self) -> f64 {
        (SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * self.frequency)).powi(2)
    }

    /// Largest waypoint displacement per slot.
    pub fn max_step(&self) -> f64 {
        self.v_max * self.dt()
    }

    pub fn ma_geometry(&self) -> ArrayGeometry {
        ArrayGeometry::planar(self.n_x, self.n_y, self.wavelength())
    }

    /// BS array: `n_b` elements along the global x-axis.
    pub fn bs_geometry(&self) -> ArrayGeometry {
        ArrayGeometry::linear(self.n_b, self.wavelength())
    }

    /// Every schema-level and feasibility problem, each tagged with the key
    /// that causes it. Empty means the scenario is usable.
    pub fn check(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        let positive = [
            ("p_b", self.p_b),
            ("p_j", self.p_j),
            ("sigma2_u", self.sigma2_u),
            ("sigma2_e", self.sigma2_e),
            ("f", self.frequency),
            ("t_flight", self.t_flight),
            ("v_max", self.v_max),
            ("h_j", self.h_j),
            ("p0", self.propulsion.p0),
            ("p1", self.propulsion.p1),
            ("u_tip_sq", self.propulsion.u_tip_sq),
            ("v0", self.propulsion.v0),
            ("r_drag", self.propulsion.r_drag),
            ("rho", self.propulsion.rho),
            ("s", self.propulsion.s),
            ("a", self.propulsion.a),
            ("p_base", self.ma.p_base),
            ("zeta", self.ma.zeta),
            ("xi", self.ma.xi),
            ("omega_el_max", self.ma.omega_el_max),
            ("omega_az_max", self.ma.omega_az_max),
        ];
        for (key, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                out.push(Finding::new(key, format!("must be finite and > 0, got {value}")));
            }
        }
        let non_negative = [
            ("h_b", self.h_b),
            ("epsilon", self.epsilon),
            ("alpha_bu", self.alpha_bu),
            ("alpha_be", self.alpha_be),
            ("alpha_ju", self.alpha_ju),
            ("alpha_je", self.alpha_je),
        ];
        for (key, value) in non_negative {
            if !value.is_finite() || value < 0.0 {
                out.push(Finding::new(key, format!("must be finite and >= 0, got {value}")));
            }
        }
        for (key, p) in [
            ("q_b", self.q_b),
            ("q_u", self.q_u),
            ("q_e", self.q_e),
            ("q_i", self.q_i),
            ("q_f", self.q_f),
        ] {
            if !p.is_finite() {
                out.push(Finding::new(key, "position must be finite"));
            }
        }
        if self.n_step == 0 {
            out.push(Finding::new("n_step", "must be >= 1"));
        }
        if self.n_b == 0 {
            out.push(Finding::new("n_b", "must be >= 1"));
        }
        if self.n_x == 0 || self.n_y == 0 {
            out.push(Finding::new("n_ma", "array needs at least one element per axis"));
        } else if self.n_ma() > crate::numerics::MAX_EIG_DIM {
            out.push(Finding::new(
                "n_ma",
                format!("at most {} elements supported", crate::numerics::MAX_EIG_DIM),
            ));
        }
        if !out.is_empty() {
            return out;
        }

        let reach = self.v_max * self.t_flight;
        let needed = self.q_f.distance(self.q_i);
        if reach < needed {
            out.push(Finding::new(
                "v_max",
                format!(
                    "endpoints unreachable: v_max * t_flight = {reach} m < |q_f - q_i| = {needed} m"
                ),
            ));
        }
        let bs_to_eve = self.q_b.distance(self.q_e);
        if bs_to_eve <= self.epsilon {
            out.push(Finding::new(
                "epsilon",
                format!(
                    "BS lies inside the eavesdropper uncertainty region (|q_b - q_e| = {bs_to_eve} m <= {} m)",
                    self.epsilon
                ),
            ));
        }
        if self.h_j <= 0.0 || self.q_i.z != self.h_j || self.q_f.z != self.h_j {
            out.push(Finding::new("h_j", "flight endpoints must sit at the jammer altitude"));
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_is_valid() {
        assert!(Scenario::table1().check().is_empty());
    }

    #[test]
    fn noise_conversion() {
        let w = dbm_to_watts(-114.0);
        assert!((w - 3.981_071_705_5e-15).abs() < 1e-24);
    }

    #[test]
    fn reference_gain_at_28ghz() {
        let b0 = Scenario::table1().beta0();
        assert!((b0 - 7.269_536_453_9e-7).abs() < 1e-16);
        assert!((10.0 * b0.log10() + 61.385).abs() < 1e-3);
    }

    #[test]
    fn slow_uav_flagged() {
        let mut s = Scenario::table1();
        s.v_max = 5.0;
        let f = s.check();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].key, "v_max");
    }

    #[test]
    fn bs_inside_uncertainty_flagged() {
        let mut s = Scenario::table1();
        s.epsilon = 200.0;
        assert!(s.check().iter().any(|f| f.key == "epsilon"));
    }
}
