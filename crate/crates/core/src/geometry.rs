//! Rotations, array layouts, and array response vectors.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::numerics::{ComplexVec, C64};

/// Propagation speed used for wavelengths and path loss (m/s).
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
/// Mechanical limit on each MA rotation angle.
pub const ANGLE_LIMIT: f64 = FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3×3 real matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    /// Flip that mounts the array under the airframe: local Z′ down, Y′ inverted.
    pub const MOUNT_FLIP: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]);

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = m[j][i];
            }
        }
        Mat3(t)
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Largest entrywise deviation of `MᵀM` from the identity.
    pub fn orthogonality_error(&self) -> f64 {
        let p = self.transpose() * *self;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.0[i][j] - target).abs());
            }
        }
        worst
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Right-handed active rotation about a coordinate axis.
pub fn rotation_matrix(axis: Axis, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    match axis {
        Axis::X => Mat3([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]),
        Axis::Y => Mat3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]),
        Axis::Z => Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]),
    }
}

/// MA array orientation. Rotation about Y′ is fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Orientation {
    pub phi_x: f64,
    pub phi_z: f64,
}

impl Orientation {
    pub const ZERO: Orientation = Orientation {
        phi_x: 0.0,
        phi_z: 0.0,
    };

    pub fn new(phi_x: f64, phi_z: f64) -> Result<Self> {
        let o = Orientation { phi_x, phi_z };
        if o.is_valid() {
            Ok(o)
        } else {
            Err(Error::Validation(format!(
                "orientation ({phi_x}, {phi_z}) outside [-pi/2, pi/2]"
            )))
        }
    }

    pub fn is_valid(&self) -> bool {
        self.phi_x.abs() <= ANGLE_LIMIT && self.phi_z.abs() <= ANGLE_LIMIT
    }

    /// Componentwise clamp into the mechanical box.
    pub fn clamped(self) -> Orientation {
        Orientation {
            phi_x: self.phi_x.clamp(-ANGLE_LIMIT, ANGLE_LIMIT),
            phi_z: self.phi_z.clamp(-ANGLE_LIMIT, ANGLE_LIMIT),
        }
    }
}

/// `U = R_Z(φ_z) · R_Y(0) · R_X(φ_x) · F`, mapping global directions into the
/// array's local frame.
pub fn frame_matrix(o: Orientation) -> Mat3 {
    rotation_matrix(Axis::Z, o.phi_z) * rotation_matrix(Axis::X, o.phi_x) * Mat3::MOUNT_FLIP
}

/// Element layout of a uniform planar (or linear, `n_y = 1`) array in its
/// local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub n_x: usize,
    pub n_y: usize,
    pub spacing: f64,
    pub element_positions: Vec<Vec3>,
}

impl ArrayGeometry {
    /// Half-wavelength grid; element `(a, b)` (zero-based) sits at
    /// `[a·d, b·d, 0]` and is stored at index `a·n_y + b`.
    pub fn planar(n_x: usize, n_y: usize, wavelength: f64) -> Self {
        assert!(n_x > 0 && n_y > 0, "array must have elements");
        let spacing = wavelength / 2.0;
        let element_positions = (0..n_x)
            .flat_map(|a| {
                (0..n_y).map(move |b| Vec3::new(a as f64 * spacing, b as f64 * spacing, 0.0))
            })
            .collect();
        ArrayGeometry {
            n_x,
            n_y,
            spacing,
            element_positions,
        }
    }

    /// Uniform linear array along the local x-axis.
    pub fn linear(n: usize, wavelength: f64) -> Self {
        Self::planar(n, 1, wavelength)
    }

    pub fn len(&self) -> usize {
        self.element_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.element_positions.is_empty()
    }

    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.n_y + b
    }
}

/// Unit direction from `tx` to `rx` expressed in `frame`.
pub fn local_direction_in_frame(frame: &Mat3, tx_pos: Vec3, rx_pos: Vec3) -> Result<Vec3> {
    let diff = rx_pos - tx_pos;
    let d = diff.norm();
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::DegenerateGeometry(format!(
            "coincident or non-finite positions {tx_pos:?} / {rx_pos:?}"
        )));
    }
    Ok(frame.apply(diff * (1.0 / d)))
}

/// `u = U · (rx − tx)/‖rx − tx‖`.
pub fn local_direction(tx_pos: Vec3, rx_pos: Vec3, o: Orientation) -> Result<Vec3> {
    local_direction_in_frame(&frame_matrix(o), tx_pos, rx_pos)
}

/// Array response: entry `i` is `exp(j·2πf/c·uᵀpᵢ)`.
pub fn steering_vector(geom: &ArrayGeometry, u_local: Vec3, frequency: f64) -> ComplexVec {
    let k = 2.0 * PI * frequency / SPEED_OF_LIGHT;
    ComplexVec::from_fn(geom.len(), |i| {
        let phase = k * u_local.dot(geom.element_positions[i]);
        let (s, c) = phase.sin_cos();
        C64::new(c, s)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoresightSolution {
    pub orientation: Orientation,
    /// Angle (rad) between the local target direction and boresight (+Z′).
    pub residual: f64,
}

/// Orientation whose boresight comes closest to `target`.
///
/// `R_Z` is applied last, so it cannot move the local z-component; the
/// boresight alignment `u_z = −(g_y sin φ_x + g_z cos φ_x)` depends on `φ_x`
/// alone and is maximized at `φ_x = atan2(−g_y, −g_z)`. Being a shifted
/// cosine, clamping that maximizer gives the box-constrained optimum. `φ_z`
/// stays at zero since it does not affect the residual.
pub fn boresight_angles_toward(tx_pos: Vec3, target: Vec3) -> Result<BoresightSolution> {
    let g = local_direction_in_frame(&Mat3::IDENTITY, tx_pos, target)?;
    let phi_x = (-g.y).atan2(-g.z).clamp(-ANGLE_LIMIT, ANGLE_LIMIT);
    let orientation = Orientation { phi_x, phi_z: 0.0 };
    let u = frame_matrix(orientation).apply(g);
    let residual = u.z.clamp(-1.0, 1.0).acos();
    Ok(BoresightSolution {
        orientation,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn rotation_basics() {
        assert_eq!(rotation_matrix(Axis::X, 0.0), Mat3::IDENTITY);
        let v = rotation_matrix(Axis::Z, FRAC_PI_2).apply(Vec3::new(1.0, 0.0, 0.0));
        assert!(close(v, Vec3::new(0.0, 1.0, 0.0), 1e-15));
        let r = rotation_matrix(Axis::Y, 0.3);
        assert!(r.orthogonality_error() < 1e-12);
        assert!((r.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn frame_at_zero_is_mount_flip() {
        assert_eq!(frame_matrix(Orientation::ZERO), Mat3::MOUNT_FLIP);
    }

    #[test]
    fn frame_composition_matches_explicit_product() {
        let o = Orientation {
            phi_x: FRAC_PI_2,
            phi_z: 0.0,
        };
        let u = frame_matrix(o).apply(Vec3::new(0.0, 0.0, 1.0));
        let explicit = rotation_matrix(Axis::X, FRAC_PI_2).apply(Mat3::MOUNT_FLIP.apply(Vec3::new(0.0, 0.0, 1.0)));
        assert!(close(u, explicit, 1e-15));
        assert!(close(u, Vec3::new(0.0, 1.0, 0.0), 1e-15));
    }

    #[test]
    fn frame_is_rotation_for_random_angles() {
        let mut rng = crate::numerics::stream_rng(0, 0);
        for _ in 0..1000 {
            let o = Orientation {
                phi_x: rng.random_range(-ANGLE_LIMIT..ANGLE_LIMIT),
                phi_z: rng.random_range(-ANGLE_LIMIT..ANGLE_LIMIT),
            };
            let u = frame_matrix(o);
            assert!(u.orthogonality_error() < 1e-12);
            assert!((u.det() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boresight_direction_for_nadir_user() {
        let u = local_direction(Vec3::new(0.0, 0.0, 50.0), Vec3::ZERO, Orientation::ZERO).unwrap();
        assert!(close(u, Vec3::new(0.0, 0.0, 1.0), 1e-15));
    }

    #[test]
    fn oblique_direction_hand_computed() {
        let u = local_direction(
            Vec3::new(0.0, 0.0, 50.0),
            Vec3::new(50.0, 0.0, 0.0),
            Orientation::ZERO,
        )
        .unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(u, Vec3::new(h, 0.0, h), 1e-15));
    }

    #[test]
    fn coincident_positions_rejected() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert!(matches!(
            local_direction(p, p, Orientation::ZERO),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn local_direction_round_trip() {
        let tx = Vec3::new(-30.0, 12.0, 50.0);
        let rx = Vec3::new(100.0, 150.0, 0.0);
        let o = Orientation {
            phi_x: 0.4,
            phi_z: -1.1,
        };
        let u = local_direction(tx, rx, o).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-12);
        let back = frame_matrix(o).transpose().apply(u);
        let g = (rx - tx) * (1.0 / (rx - tx).norm());
        assert!(close(back, g, 1e-12));
    }

    #[test]
    fn steering_at_boresight_is_all_ones() {
        let geom = ArrayGeometry::planar(4, 4, 0.01);
        let g = steering_vector(&geom, Vec3::new(0.0, 0.0, 1.0), SPEED_OF_LIGHT / 0.01);
        assert!(g.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn steering_endfire_alternates_along_a() {
        let f = 28e9;
        let geom = ArrayGeometry::planar(4, 4, SPEED_OF_LIGHT / f);
        let g = steering_vector(&geom, Vec3::new(1.0, 0.0, 0.0), f);
        for a in 0..4 {
            for b in 0..4 {
                let expected = if a % 2 == 0 { 1.0 } else { -1.0 };
                let z = g[geom.index(a, b)];
                assert!((z - C64::new(expected, 0.0)).norm() < 1e-12, "({a},{b}) -> {z}");
            }
        }
        assert!((g.norm_sqr() - 16.0).abs() < 1e-9);
    }

    #[test]
    fn steering_conjugate_symmetry() {
        let f = 28e9;
        let geom = ArrayGeometry::planar(4, 4, SPEED_OF_LIGHT / f);
        let u = Vec3::new(0.3, -0.5, 0.0);
        let u = u * (1.0 / u.norm());
        let a = steering_vector(&geom, u, f);
        let b = steering_vector(&geom, -u, f);
        for i in 0..16 {
            assert!((a[i] - b[i].conj()).norm() < 1e-12);
            assert!((a[i].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boresight_toward_nadir() {
        let s = boresight_angles_toward(Vec3::new(5.0, 5.0, 50.0), Vec3::new(5.0, 5.0, 0.0)).unwrap();
        assert_eq!(s.orientation, Orientation::ZERO);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn boresight_toward_y_offset_target() {
        let s = boresight_angles_toward(Vec3::new(0.0, 0.0, 50.0), Vec3::new(0.0, -50.0, 0.0)).unwrap();
        assert!(s.residual < 1e-9);
        let u = local_direction(Vec3::new(0.0, 0.0, 50.0), Vec3::new(0.0, -50.0, 0.0), s.orientation).unwrap();
        assert!(close(u, Vec3::new(0.0, 0.0, 1.0), 1e-9));
    }

    #[test]
    fn boresight_clamps_for_target_behind_array() {
        let s = boresight_angles_toward(Vec3::new(0.0, 0.0, 50.0), Vec3::new(0.0, 100.0, 60.0)).unwrap();
        assert!(s.orientation.is_valid());
        assert_eq!(s.orientation.phi_x.abs(), ANGLE_LIMIT);
        assert!(s.residual > 0.0);
    }

    #[test]
    fn boresight_is_optimal_over_grid() {
        let tx = Vec3::new(-100.0, 0.0, 50.0);
        let target = Vec3::new(150.0, 100.0, 0.0);
        let s = boresight_angles_toward(tx, target).unwrap();
        let steps = 200;
        for i in 0..=steps {
            for j in 0..=steps {
                let o = Orientation {
                    phi_x: -ANGLE_LIMIT + PI * i as f64 / steps as f64,
                    phi_z: -ANGLE_LIMIT + PI * j as f64 / steps as f64,
                };
                let u = local_direction(tx, target, o).unwrap();
                assert!(u.z.clamp(-1.0, 1.0).acos() >= s.residual - 1e-12);
            }
        }
    }
}
