//! Coordinate geometry: rotations, RIS calibration mismatch, and the map
//! `η = g(r)` from UE location parameters to geometric channel parameters.
//!
//! Angles are radians everywhere except at the configuration boundary, where
//! Euler angles are given in degrees. Rotations compose as `Rz·Ry·Rx`.

use crate::error::{Error, Result};
use crate::numeric::wrap_angle;
use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type Vec3 = Vector3<f64>;

/// Cosine of the elevation below which the angle Jacobian is rejected.
const POLE_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A proper rotation matrix (`RᵀR = I`, `det R = +1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Expresses a global vector in the local frame (`Rᵀ v`).
    pub fn to_local(&self, v: &Vec3) -> Vec3 {
        self.0.tr_mul(v)
    }

    /// Wraps a matrix without checking orthogonality. Intended for test
    /// fixtures and round-tripping stored matrices.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Self(m)
    }
}

impl std::ops::Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

/// Right-handed rotation by `angle` radians about a coordinate axis.
pub fn rotation_about_axis(axis: Axis, angle: f64) -> Rotation {
    let (s, c) = angle.sin_cos();
    let m = match axis {
        Axis::X => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        Axis::Y => Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        Axis::Z => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
    };
    Rotation(m)
}

/// `Rz(v₃)·Ry(v₂)·Rx(v₁)` for Euler angles given in degrees.
///
/// Used both for the orientation perturbation and for the nominal RIS
/// orientation vector.
pub fn perturbation_rotation(v_deg: &Vec3) -> Rotation {
    rotation_about_axis(Axis::Z, v_deg.z.to_radians())
        * rotation_about_axis(Axis::Y, v_deg.y.to_radians())
        * rotation_about_axis(Axis::X, v_deg.x.to_radians())
}

/// UE location parameters `r = [pᵀ, Δ]ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeState {
    pub position: Vec3,
    /// Clock bias in seconds.
    pub clock_bias: f64,
}

impl Default for UeState {
    fn default() -> Self {
        Self {
            position: Vec3::new(-2.5, 2.5, 0.0),
            clock_bias: 0.0,
        }
    }
}

impl UeState {
    pub fn new(position: Vec3, clock_bias: f64) -> Self {
        Self { position, clock_bias }
    }

    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(self.position.x, self.position.y, self.position.z, self.clock_bias)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self {
            position: Vec3::new(v[0], v[1], v[2]),
            clock_bias: v[3],
        }
    }
}

/// Geometric channel parameters `η = [φ_az, φ_el, τ_b, τ_r]ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoChannelParams {
    pub azimuth: f64,
    pub elevation: f64,
    pub delay_los: f64,
    pub delay_ris: f64,
}

impl GeoChannelParams {
    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(self.azimuth, self.elevation, self.delay_los, self.delay_ris)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self {
            azimuth: v[0],
            elevation: v[1],
            delay_los: v[2],
            delay_ris: v[3],
        }
    }
}

/// Known anchors as seen by one model: the BS position and the RIS pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisGeometry {
    pub bs: Vec3,
    pub ris: Vec3,
    pub ris_rotation: Rotation,
}

/// Full simulation geometry: true anchors, true UE state, and the RIS
/// calibration errors `u` (metres) and `v` (degrees).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub bs: Vec3,
    pub ris: Vec3,
    /// ZYX Euler angles in degrees, composed like [`perturbation_rotation`].
    pub ris_orientation_deg: Vec3,
    pub ue: UeState,
    pub position_error: Vec3,
    pub orientation_error_deg: Vec3,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            bs: Vec3::new(5.0, 0.0, 3.0),
            ris: Vec3::new(0.0, -5.0, 2.5),
            ris_orientation_deg: Vec3::new(0.0, 0.0, 90.0),
            ue: UeState::default(),
            position_error: Vec3::zeros(),
            orientation_error_deg: Vec3::zeros(),
        }
    }
}

impl Scenario {
    pub fn ris_rotation(&self) -> Rotation {
        perturbation_rotation(&self.ris_orientation_deg)
    }

    pub fn true_geometry(&self) -> RisGeometry {
        RisGeometry {
            bs: self.bs,
            ris: self.ris,
            ris_rotation: self.ris_rotation(),
        }
    }

    /// Prior geometry available to the localization stage:
    /// `p̃_r = p_r + u`, `R̃_r = R_p(v)·R_r`.
    pub fn mismatched_geometry(&self) -> RisGeometry {
        RisGeometry {
            bs: self.bs,
            ris: self.ris + self.position_error,
            ris_rotation: perturbation_rotation(&self.orientation_error_deg) * self.ris_rotation(),
        }
    }

    pub fn with_mismatch(mut self, u: Vec3, v_deg: Vec3) -> Self {
        self.position_error = u;
        self.orientation_error_deg = v_deg;
        self
    }
}

/// Azimuth/elevation of `target` in the local frame anchored at `origin`.
fn local_angles(target: &Vec3, origin: &Vec3, rot: &Rotation) -> Result<(f64, f64)> {
    let local = rot.to_local(&(target - origin));
    let range = local.norm();
    if range == 0.0 || !range.is_finite() {
        return Err(Error::DegenerateDirection);
    }
    let elevation = (local.z / range).clamp(-1.0, 1.0).asin();
    // atan2(0, 0) is undefined at the poles; fix azimuth to zero there.
    let azimuth = if local.x == 0.0 && local.y == 0.0 {
        0.0
    } else {
        local.y.atan2(local.x)
    };
    Ok((azimuth, elevation))
}

/// AoD from the RIS towards the UE at `p`, in the RIS local frame.
pub fn aod_to_ue(p: &Vec3, ris: &Vec3, rot: &Rotation) -> Result<(f64, f64)> {
    local_angles(p, ris, rot)
}

/// AoA at the RIS of the wave coming from the BS, in the RIS local frame.
pub fn aoa_from_bs(bs: &Vec3, ris: &Vec3, rot: &Rotation) -> Result<(f64, f64)> {
    local_angles(bs, ris, rot)
}

/// LOS and RIS-path delays in seconds, both including the clock bias.
pub fn path_delays(p: &Vec3, clock_bias: f64, bs: &Vec3, ris: &Vec3) -> Result<(f64, f64)> {
    let d_bu = (bs - p).norm();
    let d_ru = (ris - p).norm();
    if d_bu == 0.0 {
        return Err(Error::DegenerateGeometry("UE coincides with BS"));
    }
    if d_ru == 0.0 {
        return Err(Error::DegenerateGeometry("UE coincides with RIS"));
    }
    let d_br = (bs - ris).norm();
    Ok((
        d_bu / SPEED_OF_LIGHT + clock_bias,
        (d_br + d_ru) / SPEED_OF_LIGHT + clock_bias,
    ))
}

/// `η = g(r | p_b, p_r, R_r)`.
pub fn g_map(r: &UeState, geom: &RisGeometry) -> Result<GeoChannelParams> {
    let (azimuth, elevation) = aod_to_ue(&r.position, &geom.ris, &geom.ris_rotation)?;
    let (delay_los, delay_ris) = path_delays(&r.position, r.clock_bias, &geom.bs, &geom.ris)?;
    Ok(GeoChannelParams {
        azimuth,
        elevation,
        delay_los,
        delay_ris,
    })
}

/// `g(target) − g(r)` with the azimuth difference wrapped to `(−π, π]`.
pub fn wrapped_difference(target: &Vector4<f64>, eta: &Vector4<f64>) -> Vector4<f64> {
    let mut d = target - eta;
    d[0] = wrap_angle(d[0]);
    d
}

/// Analytic `∂g/∂r` (rows: φ_az, φ_el, τ_b, τ_r; columns: p_x, p_y, p_z, Δ).
pub fn g_jacobian(r: &UeState, geom: &RisGeometry) -> Result<Matrix4<f64>> {
    let rel = r.position - geom.ris;
    let local = geom.ris_rotation.to_local(&rel);
    let range = local.norm();
    if range == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let horiz2 = local.x * local.x + local.y * local.y;
    let horiz = horiz2.sqrt();
    if horiz / range < POLE_GUARD {
        return Err(Error::JacobianIllConditioned {
            elevation_rad: (local.z / range).clamp(-1.0, 1.0).asin(),
        });
    }

    // Gradients in the local frame, then rotated back: ∇_p = R ∇_l.
    let d_az_local = Vec3::new(-local.y / horiz2, local.x / horiz2, 0.0);
    let d_el_local = (Vec3::z() * (range * range) - local * local.z) / (range * range * horiz);
    let d_az = geom.ris_rotation.apply(&d_az_local);
    let d_el = geom.ris_rotation.apply(&d_el_local);

    let los = r.position - geom.bs;
    let d_bu = los.norm();
    if d_bu == 0.0 {
        return Err(Error::DegenerateGeometry("UE coincides with BS"));
    }
    let d_tau_b = los / (d_bu * SPEED_OF_LIGHT);
    let d_tau_r = rel / (range * SPEED_OF_LIGHT);

    let mut jac = Matrix4::zeros();
    for (row, grad) in [d_az, d_el, d_tau_b, d_tau_r].iter().enumerate() {
        for col in 0..3 {
            jac[(row, col)] = grad[col];
        }
    }
    jac[(2, 3)] = 1.0;
    jac[(3, 3)] = 1.0;
    Ok(jac)
}

/// Finite-difference steps used by [`g_hessian`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianSteps {
    pub position_m: f64,
    pub clock_bias_s: f64,
}

impl Default for HessianSteps {
    fn default() -> Self {
        Self {
            position_m: 1e-6,
            clock_bias_s: 1e-12,
        }
    }
}

/// Per-output Hessians `∂²g_k/∂r_i∂r_j`, `k = 0..4`, by central differences
/// of the analytic Jacobian.
pub fn g_hessian(r: &UeState, geom: &RisGeometry, steps: HessianSteps) -> Result<[Matrix4<f64>; 4]> {
    let base = r.to_vector();
    let mut out = [Matrix4::zeros(); 4];
    for j in 0..4 {
        let h = if j < 3 { steps.position_m } else { steps.clock_bias_s };
        let mut plus = base;
        let mut minus = base;
        plus[j] += h;
        minus[j] -= h;
        let jp = g_jacobian(&UeState::from_vector(&plus), geom)?;
        let jm = g_jacobian(&UeState::from_vector(&minus), geom)?;
        let diff = (jp - jm) / (2.0 * h);
        for (k, slice) in out.iter_mut().enumerate() {
            for i in 0..4 {
                slice[(i, j)] = diff[(k, i)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn assert_vec_close(a: &Vec3, b: &Vec3, tol: f64) {
        assert!((a - b).norm() < tol, "{a:?} vs {b:?}");
    }

    // Truncated exponential series of a skew generator.
    fn expm_series(gen: &Matrix3<f64>, terms: usize) -> Matrix3<f64> {
        let mut acc = Matrix3::identity();
        let mut term = Matrix3::identity();
        for n in 1..terms {
            term = term * gen / n as f64;
            acc += term;
        }
        acc
    }

    #[test]
    fn zero_angle_is_identity() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            assert_eq!(*rotation_about_axis(axis, 0.0).matrix(), Matrix3::identity());
        }
    }

    #[test]
    fn z_quarter_turn_is_right_handed() {
        let r = rotation_about_axis(Axis::Z, FRAC_PI_2);
        assert_vec_close(&r.apply(&Vec3::x()), &Vec3::y(), 1e-15);
    }

    #[test]
    fn y_rotation_matches_exponential_series() {
        let gen = Matrix3::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0) * 0.3;
        let oracle = expm_series(&gen, 30);
        let r = rotation_about_axis(Axis::Y, 0.3);
        assert!((r.matrix() - oracle).abs().max() < 1e-12);
    }

    #[test]
    fn perturbation_rotation_cases() {
        assert!((perturbation_rotation(&Vec3::zeros()).matrix() - Matrix3::identity()).abs().max() == 0.0);
        let rx = perturbation_rotation(&Vec3::new(90.0, 0.0, 0.0));
        assert_vec_close(&rx.apply(&Vec3::y()), &Vec3::z(), 1e-15);

        let v = Vec3::new(3.0, 3.0, 3.0);
        let composed = rotation_about_axis(Axis::Z, 3f64.to_radians())
            * rotation_about_axis(Axis::Y, 3f64.to_radians())
            * rotation_about_axis(Axis::X, 3f64.to_radians());
        assert!((perturbation_rotation(&v).matrix() - composed.matrix()).abs().max() < 1e-15);
    }

    #[test]
    fn aod_boresight_and_pole() {
        let (az, el) = aod_to_ue(&Vec3::x(), &Vec3::zeros(), &Rotation::identity()).unwrap();
        assert_eq!((az, el), (0.0, 0.0));
        let (az, el) = aod_to_ue(&Vec3::z(), &Vec3::zeros(), &Rotation::identity()).unwrap();
        assert_eq!(az, 0.0);
        assert!((el - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn coincident_points_are_rejected() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(aod_to_ue(&p, &p, &Rotation::identity()), Err(Error::DegenerateDirection));
        assert!(matches!(path_delays(&p, 0.0, &p, &Vec3::zeros()), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn default_scenario_aod_matches_hand_formula() {
        // R_r = Rz(90°) written out by hand; Rᵀ(p − p_r) with p − p_r = [-2.5, 7.5, -2.5].
        let s = Scenario::default();
        let local = Vec3::new(7.5, 2.5, -2.5);
        let (az, el) = aod_to_ue(&s.ue.position, &s.ris, &s.ris_rotation()).unwrap();
        assert!((az - (2.5f64).atan2(7.5)).abs() < 1e-12);
        assert!((el - (-2.5 / local.norm()).asin()).abs() < 1e-12);
    }

    #[test]
    fn default_scenario_aoa() {
        let s = Scenario::default();
        let (az, el) = aoa_from_bs(&s.bs, &s.ris, &s.ris_rotation()).unwrap();
        // local = Rz(90)ᵀ [5, 5, 0.5] = [5, -5, 0.5]
        let local = Vec3::new(5.0, -5.0, 0.5);
        assert!((az - (-5f64).atan2(5.0)).abs() < 1e-12);
        assert!((el - (0.5 / local.norm()).asin()).abs() < 1e-12);
    }

    #[test]
    fn default_scenario_los_delay() {
        let s = Scenario::default();
        let (tb, tr) = path_delays(&s.ue.position, 0.0, &s.bs, &s.ris).unwrap();
        assert!((tb - 71.5f64.sqrt() / SPEED_OF_LIGHT).abs() < 1e-20);
        assert!((tb - 28.206e-9).abs() < 1e-12);
        assert!(tr > tb);
        let (tb2, tr2) = path_delays(&s.ue.position, 10e-9, &s.bs, &s.ris).unwrap();
        assert!((tb2 - tb - 10e-9).abs() < 1e-22);
        assert!((tr2 - tr - 10e-9).abs() < 1e-22);
    }

    #[test]
    fn los_delay_vanishes_near_bs() {
        let s = Scenario::default();
        let p = s.bs + Vec3::new(1e-9, 0.0, 0.0);
        let (tb, _) = path_delays(&p, 0.0, &s.bs, &s.ris).unwrap();
        assert!(tb < 1e-17);
    }

    #[test]
    fn zero_mismatch_round_trip() {
        let s = Scenario::default();
        let a = g_map(&s.ue, &s.true_geometry()).unwrap();
        let b = g_map(&s.ue, &s.mismatched_geometry()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn jacobian_structure() {
        let s = Scenario::default();
        let j = g_jacobian(&s.ue, &s.true_geometry()).unwrap();
        assert_eq!(j.column(3).into_owned(), Vector4::new(0.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn collinear_delay_gradient() {
        // UE on the far side of the RIS from the BS along one line: both
        // unit vectors point the same way and the τ_r gradient has norm 1/c.
        let geom = RisGeometry {
            bs: Vec3::new(-10.0, 0.0, 0.0),
            ris: Vec3::zeros(),
            ris_rotation: Rotation::identity(),
        };
        let r = UeState::new(Vec3::new(3.0, 0.0, 0.0), 0.0);
        let j = g_jacobian(&r, &geom).unwrap();
        let tb = j.fixed_view::<1, 3>(2, 0).transpose();
        let tr = j.fixed_view::<1, 3>(3, 0).transpose();
        assert!(((tb + tr).norm() - 2.0 / SPEED_OF_LIGHT).abs() < 1e-22);
    }

    #[test]
    fn near_pole_jacobian_rejected() {
        let geom = RisGeometry {
            bs: Vec3::new(5.0, 0.0, 0.0),
            ris: Vec3::zeros(),
            ris_rotation: Rotation::identity(),
        };
        let r = UeState::new(Vec3::new(0.0, 0.0, 4.0), 0.0);
        assert!(matches!(g_jacobian(&r, &geom), Err(Error::JacobianIllConditioned { .. })));
    }

    #[test]
    fn hessian_clock_bias_rows_vanish() {
        let s = Scenario::default();
        let h = g_hessian(&s.ue, &s.true_geometry(), HessianSteps::default()).unwrap();
        for slice in &h {
            for i in 0..4 {
                assert_eq!(slice[(3, i)], 0.0);
                assert_eq!(slice[(i, 3)], 0.0);
            }
        }
    }
}
