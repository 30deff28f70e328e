//! Fisher information of the channel parameters, nuisance elimination and
//! the mismatch-free position error bound.

use crate::channel::SignalModel;
use crate::error::{Error, Result};
use crate::geometry::{g_jacobian, RisGeometry, UeState};
use crate::numeric::{condition_number4, scaled_inverse, spd_inverse, symmetrize};
use nalgebra::{DMatrix, Matrix3, Matrix4, SMatrix};
use num_complex::Complex64;

pub type Matrix8 = SMatrix<f64, 8, 8>;

/// Largest condition number of the gain block accepted by [`schur_reduce`].
pub const MAX_NUISANCE_CONDITION: f64 = 1e12;

/// 8×8 Fisher information of `η_ch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FimChannel(pub Matrix8);

impl FimChannel {
    pub fn matrix(&self) -> &Matrix8 {
        &self.0
    }
}

/// Channel-estimate covariance `Σ = J(η)⁻¹` together with its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaCovariance {
    covariance: Matrix4<f64>,
    precision: Matrix4<f64>,
}

impl EtaCovariance {
    /// From a covariance matrix; fails unless it is positive definite.
    pub fn from_covariance(covariance: Matrix4<f64>) -> Result<Self> {
        let precision = spd_inverse(&covariance).ok_or(Error::EtaUnidentifiable)?;
        Ok(Self {
            covariance: symmetrize(&covariance),
            precision,
        })
    }

    pub fn covariance(&self) -> &Matrix4<f64> {
        &self.covariance
    }

    /// `Σ⁻¹`.
    pub fn precision(&self) -> &Matrix4<f64> {
        &self.precision
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            covariance: self.covariance * factor,
            precision: self.precision / factor,
        }
    }
}

/// Slepian-Bangs: `J = (2/σ²) Σ_ℓ ℜ((∂μ_ℓ/∂η)ᴴ ∂μ_ℓ/∂η)`, summed in block order.
pub fn fim_channel(jacobians: &[DMatrix<Complex64>], noise_variance: f64) -> Result<FimChannel> {
    if !(noise_variance > 0.0) {
        return Err(Error::InvalidArgument("noise variance must be positive".into()));
    }
    let mut acc = Matrix8::zeros();
    for jac in jacobians {
        if jac.ncols() != 8 {
            return Err(Error::DimensionMismatch(format!("Jacobian has {} columns, expected 8", jac.ncols())));
        }
        let gram = jac.ad_mul(jac);
        acc += Matrix8::from_fn(|i, j| gram[(i, j)].re);
    }
    Ok(FimChannel(symmetrize(&(acc * (2.0 / noise_variance)))))
}

/// `J(η) = X − Y Z⁻¹ Yᵀ` for the partition `J(η_ch) = [X Y; Yᵀ Z]`.
pub fn schur_reduce(fim: &FimChannel) -> Result<Matrix4<f64>> {
    let j = fim.matrix();
    let x: Matrix4<f64> = j.fixed_view::<4, 4>(0, 0).into_owned();
    let y: Matrix4<f64> = j.fixed_view::<4, 4>(0, 4).into_owned();
    let z: Matrix4<f64> = j.fixed_view::<4, 4>(4, 4).into_owned();
    let condition = condition_number4(&z);
    if !(condition < MAX_NUISANCE_CONDITION) {
        return Err(Error::NuisanceBlockSingular { condition });
    }
    let z_inv = spd_inverse(&z).ok_or(Error::NuisanceBlockSingular { condition })?;
    Ok(symmetrize(&(x - y * z_inv * y.transpose())))
}

pub fn eta_covariance(j_eta: &Matrix4<f64>) -> Result<EtaCovariance> {
    let covariance = spd_inverse(j_eta).ok_or(Error::EtaUnidentifiable)?;
    Ok(EtaCovariance {
        covariance,
        precision: symmetrize(j_eta),
    })
}

/// Channel FIM at the true UE state of `geom` with the model's Friis gains.
pub fn channel_fim_at(model: &SignalModel, ue: &UeState, geom: &RisGeometry) -> Result<FimChannel> {
    let params = model.true_params(ue, geom)?;
    let jacobians = model.signal_jacobian(&params);
    fim_channel(&jacobians, crate::channel::noise_variance(&model.config))
}

/// FIM → Schur complement → `Σ` in one step.
pub fn eta_covariance_at(model: &SignalModel, ue: &UeState, geom: &RisGeometry) -> Result<EtaCovariance> {
    let j = channel_fim_at(model, ue, geom)?;
    eta_covariance(&schur_reduce(&j)?)
}

/// Location-domain CRB `(GᵀΣ⁻¹G)⁻¹` with `G = ∂g/∂r` under `geom`.
pub fn location_crb(ue: &UeState, geom: &RisGeometry, cov: &EtaCovariance) -> Result<Matrix4<f64>> {
    let g = g_jacobian(ue, geom)?;
    let info = symmetrize(&(g.transpose() * cov.precision() * g));
    spd_inverse(&info)
        .or_else(|| scaled_inverse(&info))
        .ok_or(Error::PositionUnobservable)
}

/// `sqrt(tr(M₁:₃,₁:₃))`.
pub fn position_rms(m: &Matrix4<f64>) -> f64 {
    let block: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into_owned();
    block.trace().max(0.0).sqrt()
}

/// Mismatch-free position error bound at the true UE state.
pub fn classical_peb(ue: &UeState, true_geom: &RisGeometry, cov: &EtaCovariance) -> Result<f64> {
    Ok(position_rms(&location_crb(ue, true_geom, cov)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SignalConfig;
    use crate::geometry::Scenario;

    fn tiny() -> (SignalModel, Scenario) {
        let cfg = SignalConfig {
            subcarriers: 8,
            blocks: 2,
            ..SignalConfig::default()
        };
        let s = Scenario::default();
        let model = SignalModel::for_geometry(cfg, 2, 2, 3, &s.true_geometry()).unwrap();
        (model, s)
    }

    #[test]
    fn fim_scales_inversely_with_noise() {
        let (model, s) = tiny();
        let params = model.true_params(&s.ue, &s.true_geometry()).unwrap();
        let jac = model.signal_jacobian(&params);
        let a = fim_channel(&jac, 1.0).unwrap();
        let b = fim_channel(&jac, 4.0).unwrap();
        assert!((a.0 / 4.0 - b.0).abs().max() <= 1e-15 * a.0.abs().max());
    }

    #[test]
    fn fim_symmetric_psd() {
        let (model, s) = tiny();
        let j = channel_fim_at(&model, &s.ue, &s.true_geometry()).unwrap();
        assert_eq!(j.0, j.0.transpose());
        // Equilibrate before the eigen-check: raw entries span ~40 decades.
        let d = j.0.diagonal().map(f64::sqrt);
        let c = Matrix8::from_fn(|i, k| j.0[(i, k)] / (d[i] * d[k]));
        assert!(c.symmetric_eigenvalues().min() > -1e-9);
    }

    #[test]
    fn rejects_bad_noise() {
        assert!(fim_channel(&[], 0.0).is_err());
    }

    #[test]
    fn block_diagonal_schur_is_leading_block() {
        let mut m = Matrix8::identity() * 2.0;
        m[(0, 1)] = 0.5;
        m[(1, 0)] = 0.5;
        let reduced = schur_reduce(&FimChannel(m)).unwrap();
        assert_eq!(reduced, m.fixed_view::<4, 4>(0, 0).into_owned());
    }

    #[test]
    fn zero_pilots_make_gains_unidentifiable() {
        let (mut model, s) = tiny();
        model.set_pilots(nalgebra::DVector::zeros(8)).unwrap();
        let j = channel_fim_at(&model, &s.ue, &s.true_geometry()).unwrap();
        assert!(matches!(schur_reduce(&j), Err(Error::NuisanceBlockSingular { .. })));
    }

    #[test]
    fn indefinite_reduced_fim_rejected() {
        let m = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, 1.0, 1.0));
        assert_eq!(eta_covariance(&m).unwrap_err(), Error::EtaUnidentifiable);
    }

    #[test]
    fn covariance_inverts_information() {
        let (model, s) = tiny();
        let cov = eta_covariance_at(&model, &s.ue, &s.true_geometry()).unwrap();
        // Σ·J(η) = I, checked as (DΣD)(D⁻¹JD⁻¹) to keep entries O(1).
        let d = cov.precision().diagonal().map(f64::sqrt);
        let sig = Matrix4::from_fn(|i, k| cov.covariance()[(i, k)] * d[i] * d[k]);
        let info = Matrix4::from_fn(|i, k| cov.precision()[(i, k)] / (d[i] * d[k]));
        let prod = sig * info;
        assert!((prod - Matrix4::identity()).abs().max() < 1e-8);
        assert!(cov.covariance().diagonal().iter().all(|v| *v > 0.0));
    }
}
