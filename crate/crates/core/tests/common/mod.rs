//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use ris_mcrb::channel::{SignalConfig, SignalModel};
use ris_mcrb::geometry::{perturbation_rotation, RisGeometry, Scenario, UeState, Vec3};

pub const C: f64 = 299_792_458.0;

/// `g(r)` straight from the definitions, with an explicit Euler rotation.
pub fn oracle_g(ue: &UeState, bs: &Vec3, ris: &Vec3, rot: &Matrix3<f64>) -> Vector4<f64> {
    let l = rot.transpose() * (ue.position - ris);
    let az = l[1].atan2(l[0]);
    let el = (l[2] / l.norm()).asin();
    let tau_b = (bs - ue.position).norm() / C + ue.clock_bias;
    let tau_r = ((bs - ris).norm() + (ris - ue.position).norm()) / C + ue.clock_bias;
    Vector4::new(az, el, tau_b, tau_r)
}

/// `Rz(γ)Ry(β)Rx(α)` from degrees, written out element by element.
pub fn oracle_rotation(deg: &Vec3) -> Matrix3<f64> {
    let (a, b, g) = (deg.x.to_radians(), deg.y.to_radians(), deg.z.to_radians());
    let (sa, ca, sb, cb, sg, cg) = (a.sin(), a.cos(), b.sin(), b.cos(), g.sin(), g.cos());
    Matrix3::new(
        cg * cb,
        cg * sb * sa - sg * ca,
        cg * sb * ca + sg * sa,
        sg * cb,
        sg * sb * sa + cg * ca,
        sg * sb * ca - cg * sa,
        -sb,
        cb * sa,
        cb * ca,
    )
}

/// Central-difference Jacobian of `g` with per-coordinate steps.
pub fn fd_jacobian(ue: &UeState, geom: &RisGeometry, steps: [f64; 4]) -> Matrix4<f64> {
    let base = ue.to_vector();
    let mut out = Matrix4::zeros();
    for j in 0..4 {
        let mut p = base;
        let mut m = base;
        p[j] += steps[j];
        m[j] -= steps[j];
        let gp = ris_mcrb::geometry::g_map(&UeState::from_vector(&p), geom).unwrap().to_vector();
        let gm = ris_mcrb::geometry::g_map(&UeState::from_vector(&m), geom).unwrap().to_vector();
        let mut d = gp - gm;
        d[0] = ris_mcrb::numeric::wrap_angle(d[0]);
        out.set_column(j, &(d / (2.0 * steps[j])));
    }
    out
}

/// Row-wise relative error `‖a_i − b_i‖ / ‖b_i‖`, maximised over rows.
pub fn max_row_relative_error(a: &Matrix4<f64>, b: &Matrix4<f64>) -> f64 {
    (0..4)
        .map(|i| (a.row(i) - b.row(i)).norm() / b.row(i).norm())
        .fold(0.0, f64::max)
}

/// `D⁻¹ M D⁻¹` with `D = sqrt(|diag reference|)`.
pub fn equilibrate<const N: usize>(
    m: &nalgebra::SMatrix<f64, N, N>,
    reference: &nalgebra::SMatrix<f64, N, N>,
) -> nalgebra::SMatrix<f64, N, N> {
    let d = reference.diagonal().map(|v| v.abs().sqrt());
    nalgebra::SMatrix::from_fn(|i, j| m[(i, j)] / (d[i] * d[j]))
}

/// Tiny instance: K = 8, L = 2, 2×2 RIS.
pub fn tiny_model(scenario: &Scenario, seed: u64) -> SignalModel {
    let cfg = SignalConfig {
        subcarriers: 8,
        blocks: 2,
        ..SignalConfig::default()
    };
    SignalModel::for_geometry(cfg, 2, 2, seed, &scenario.true_geometry()).unwrap()
}

pub fn rotation_of(deg: [f64; 3]) -> Matrix3<f64> {
    *perturbation_rotation(&Vector3::from(deg)).matrix()
}

/// `F(η') = σ⁻² Σ_ℓ ‖μ_ℓ(η) − μ_ℓ(η')‖²` is the expected negative
/// log-likelihood up to a constant; its Hessian at `η' = η` is the FIM.
/// Second derivatives by four-point central differences.
pub fn brute_force_fim(model: &SignalModel, params: &ris_mcrb::channel::FullChannelParams, noise_var: f64, steps: [f64; 8]) -> nalgebra::SMatrix<f64, 8, 8> {
    use ris_mcrb::channel::FullChannelParams;
    let base = params.to_array();
    let mu0 = model.noise_free_signal(params);
    let f = |delta: &[f64; 8]| -> f64 {
        let mut x = base;
        for i in 0..8 {
            x[i] += delta[i];
        }
        let mu = model.noise_free_signal(&FullChannelParams::from_array(&x));
        mu.iter().zip(&mu0).map(|(a, b)| (a - b).norm_squared()).sum::<f64>() / noise_var
    };
    let mut out = nalgebra::SMatrix::<f64, 8, 8>::zeros();
    for i in 0..8 {
        for j in i..8 {
            let mut pp = [0.0; 8];
            let mut pm = [0.0; 8];
            let mut mp = [0.0; 8];
            let mut mm = [0.0; 8];
            pp[i] += steps[i];
            pp[j] += steps[j];
            pm[i] += steps[i];
            pm[j] -= steps[j];
            mp[i] -= steps[i];
            mp[j] += steps[j];
            mm[i] -= steps[i];
            mm[j] -= steps[j];
            let v = (f(&pp) - f(&pm) - f(&mp) + f(&mm)) / (4.0 * steps[i] * steps[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Steps for [`brute_force_fim`] scaled to the parameter magnitudes.
pub fn fim_steps(params: &ris_mcrb::channel::FullChannelParams) -> [f64; 8] {
    let gb = params.gain_los.norm();
    let gr = params.gain_ris.norm();
    [1e-4, 1e-4, 1e-13, 1e-13, 1e-4 * gb, 1e-4 * gb, 1e-4 * gr, 1e-4 * gr]
}
