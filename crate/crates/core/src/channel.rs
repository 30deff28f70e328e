//! OFDM signal model of the BS → UE link with one RIS-reflected path.
//!
//! For block `ℓ` the noise-free received vector is
//! `μ_ℓ = g_b d(τ_b)⊙x + g_r (b(φ)ᵀγ_ℓ) d(τ_r)⊙x`, where `b = a(θ)⊙a(φ)` and
//! the RIS elements lie on the local Y–Z plane with boresight along +X.

use crate::error::{Error, Result};
use crate::geometry::{aoa_from_bs, path_delays, GeoChannelParams, RisGeometry, UeState, Vec3, SPEED_OF_LIGHT};
use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Radio and OFDM constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub subcarriers: usize,
    pub blocks: usize,
    pub power_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 28e9,
            bandwidth_hz: 400e6,
            subcarriers: 3000,
            blocks: 32,
            power_dbm: 10.0,
            noise_psd_dbm_hz: -173.855,
            noise_figure_db: 10.0,
        }
    }
}

impl SignalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.subcarriers < 2 {
            return Err(Error::InvalidArgument("at least 2 subcarriers required".into()));
        }
        if self.blocks < 1 {
            return Err(Error::InvalidArgument("at least 1 OFDM block required".into()));
        }
        if !(self.bandwidth_hz > 0.0) || !(self.carrier_hz > 0.0) {
            return Err(Error::InvalidArgument("carrier and bandwidth must be positive".into()));
        }
        Ok(())
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        self.bandwidth_hz / self.subcarriers as f64
    }

    /// `f_k = f_c + (2k − 1 − K)Δ_f/2`, `k = 1..K`.
    pub fn subcarrier_frequencies(&self) -> Vec<f64> {
        let k_total = self.subcarriers as f64;
        let df = self.subcarrier_spacing();
        (1..=self.subcarriers)
            .map(|k| self.carrier_hz + (2.0 * k as f64 - 1.0 - k_total) * df / 2.0)
            .collect()
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI * self.carrier_hz / SPEED_OF_LIGHT
    }

    /// Transmit power per subcarrier in watts, `P_lin / K`.
    pub fn pilot_power(&self) -> f64 {
        10f64.powf(self.power_dbm / 10.0 - 3.0) / self.subcarriers as f64
    }

    /// Constant-modulus pilots `x_k = sqrt(P_lin / K)`.
    pub fn pilots(&self) -> DVector<Complex64> {
        DVector::from_element(self.subcarriers, Complex64::new(self.pilot_power().sqrt(), 0.0))
    }

    pub fn with_power(mut self, power_dbm: f64) -> Self {
        self.power_dbm = power_dbm;
        self
    }
}

/// Per-subcarrier noise variance in watts: `N₀·N_f·Δ_f`.
pub fn noise_variance(cfg: &SignalConfig) -> f64 {
    10f64.powf((cfg.noise_psd_dbm_hz + cfg.noise_figure_db) / 10.0 - 3.0) * cfg.subcarrier_spacing()
}

/// RIS element positions in the RIS local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RisArray {
    elements: Vec<Vec3>,
}

impl RisArray {
    /// `rows × cols` grid on the local Y–Z plane, centred at the origin.
    pub fn uniform_planar(rows: usize, cols: usize, spacing: f64) -> Self {
        let y0 = (cols as f64 - 1.0) / 2.0;
        let z0 = (rows as f64 - 1.0) / 2.0;
        let elements = (0..rows)
            .flat_map(|r| {
                (0..cols).map(move |c| Vec3::new(0.0, (c as f64 - y0) * spacing, (r as f64 - z0) * spacing))
            })
            .collect();
        Self { elements }
    }

    /// Half-wavelength grid at the configured carrier.
    pub fn half_wavelength(rows: usize, cols: usize, cfg: &SignalConfig) -> Self {
        Self::uniform_planar(rows, cols, cfg.wavelength() / 2.0)
    }

    pub fn from_elements(elements: Vec<Vec3>) -> Self {
        Self { elements }
    }

    pub fn elements(&self) -> &[Vec3] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// `[d(τ)]_k = exp(−j2π(k−1)Δ_f τ)`.
pub fn delay_steering(tau: f64, cfg: &SignalConfig) -> DVector<Complex64> {
    let w = -2.0 * PI * cfg.subcarrier_spacing() * tau;
    DVector::from_fn(cfg.subcarriers, |k, _| Complex64::from_polar(1.0, w * k as f64))
}

/// Unit direction `t(α)` for azimuth/elevation in radians.
pub fn direction_vector(az: f64, el: f64) -> Vec3 {
    let (sa, ca) = az.sin_cos();
    let (se, ce) = el.sin_cos();
    Vector3::new(ca * ce, sa * ce, se)
}

fn direction_derivatives(az: f64, el: f64) -> (Vec3, Vec3) {
    let (sa, ca) = az.sin_cos();
    let (se, ce) = el.sin_cos();
    (Vector3::new(-sa * ce, ca * ce, 0.0), Vector3::new(-ca * se, -sa * se, ce))
}

/// Far-field array response and its derivatives with respect to the two angles.
#[derive(Debug, Clone)]
pub struct ArrayResponse {
    pub value: DVector<Complex64>,
    pub d_azimuth: DVector<Complex64>,
    pub d_elevation: DVector<Complex64>,
}

pub fn array_response(az: f64, el: f64, arr: &RisArray, cfg: &SignalConfig) -> ArrayResponse {
    let kw = cfg.wavenumber();
    let t = direction_vector(az, el);
    let (t_az, t_el) = direction_derivatives(az, el);
    let m = arr.len();
    let mut value = DVector::zeros(m);
    let mut d_azimuth = DVector::zeros(m);
    let mut d_elevation = DVector::zeros(m);
    for (i, p) in arr.elements().iter().enumerate() {
        let a = Complex64::from_polar(1.0, kw * t.dot(p));
        value[i] = a;
        d_azimuth[i] = Complex64::new(0.0, kw * t_az.dot(p)) * a;
        d_elevation[i] = Complex64::new(0.0, kw * t_el.dot(p)) * a;
    }
    ArrayResponse {
        value,
        d_azimuth,
        d_elevation,
    }
}

/// `b = a(θ) ⊙ a(φ)`.
pub fn combined_response(theta: (f64, f64), phi: (f64, f64), arr: &RisArray, cfg: &SignalConfig) -> DVector<Complex64> {
    let a_in = array_response(theta.0, theta.1, arr, cfg).value;
    let a_out = array_response(phi.0, phi.1, arr, cfg).value;
    a_in.component_mul(&a_out)
}

/// RIS phase profiles `γ_ℓ`, one unit-modulus vector per OFDM block.
#[derive(Debug, Clone, PartialEq)]
pub struct RisProfiles {
    blocks: Vec<DVector<Complex64>>,
}

impl RisProfiles {
    pub fn from_blocks(blocks: Vec<DVector<Complex64>>) -> Self {
        Self { blocks }
    }

    pub fn blocks(&self) -> &[DVector<Complex64>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// I.i.d. uniform phases on `[0, 2π)`, deterministic per seed.
pub fn generate_profiles(blocks: usize, elements: usize, seed: u64) -> RisProfiles {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = (0..blocks)
        .map(|_| DVector::from_fn(elements, |_, _| Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))))
        .collect();
    RisProfiles { blocks }
}

/// Free-space path gains for the LOS and RIS paths with carrier phases set by
/// the propagation delay (no clock bias).
pub fn friis_gains(ue: &Vec3, geom: &RisGeometry, cfg: &SignalConfig) -> Result<(Complex64, Complex64)> {
    let d_bu = (geom.bs - ue).norm();
    let d_br = (geom.bs - geom.ris).norm();
    let d_ru = (geom.ris - ue).norm();
    if d_bu == 0.0 || d_br == 0.0 || d_ru == 0.0 {
        return Err(Error::DegenerateGeometry("zero propagation distance"));
    }
    let lambda = cfg.wavelength();
    let (tau_b, tau_r) = path_delays(ue, 0.0, &geom.bs, &geom.ris)?;
    let g_b = Complex64::from_polar(lambda / (4.0 * PI * d_bu), -2.0 * PI * cfg.carrier_hz * tau_b);
    let g_r = Complex64::from_polar(
        lambda * lambda / ((4.0 * PI).powi(2) * d_br * d_ru),
        -2.0 * PI * cfg.carrier_hz * tau_r,
    );
    Ok((g_b, g_r))
}

/// `η_ch = [φ_az, φ_el, τ_b, τ_r, ℜg_b, ℑg_b, ℜg_r, ℑg_r]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullChannelParams {
    pub geo: GeoChannelParams,
    pub gain_los: Complex64,
    pub gain_ris: Complex64,
}

impl FullChannelParams {
    pub fn to_array(&self) -> [f64; 8] {
        [
            self.geo.azimuth,
            self.geo.elevation,
            self.geo.delay_los,
            self.geo.delay_ris,
            self.gain_los.re,
            self.gain_los.im,
            self.gain_ris.re,
            self.gain_ris.im,
        ]
    }

    pub fn from_array(v: &[f64; 8]) -> Self {
        Self {
            geo: GeoChannelParams {
                azimuth: v[0],
                elevation: v[1],
                delay_los: v[2],
                delay_ris: v[3],
            },
            gain_los: Complex64::new(v[4], v[5]),
            gain_ris: Complex64::new(v[6], v[7]),
        }
    }
}

/// Everything needed to evaluate `μ_ℓ` and its Jacobian apart from `η_ch`:
/// config, RIS layout, profiles, pilots and the (known) AoA at the RIS.
#[derive(Debug, Clone)]
pub struct SignalModel {
    pub config: SignalConfig,
    pub array: RisArray,
    pub profiles: RisProfiles,
    pub pilots: DVector<Complex64>,
    /// AoA `(θ_az, θ_el)` in radians.
    pub aoa: (f64, f64),
}

impl SignalModel {
    pub fn new(config: SignalConfig, array: RisArray, profiles: RisProfiles, aoa: (f64, f64)) -> Result<Self> {
        config.validate()?;
        if profiles.is_empty() {
            return Err(Error::DimensionMismatch("no RIS profiles".into()));
        }
        if let Some(bad) = profiles.blocks().iter().find(|g| g.len() != array.len()) {
            return Err(Error::DimensionMismatch(format!(
                "profile length {} vs {} RIS elements",
                bad.len(),
                array.len()
            )));
        }
        let pilots = config.pilots();
        Ok(Self {
            config,
            array,
            profiles,
            pilots,
            aoa,
        })
    }

    /// Builds the model for a true geometry: half-wavelength `rows × cols`
    /// RIS, seeded random profiles for `cfg.blocks` blocks, AoA from the BS.
    pub fn for_geometry(config: SignalConfig, rows: usize, cols: usize, seed: u64, geom: &RisGeometry) -> Result<Self> {
        config.validate()?;
        let array = RisArray::half_wavelength(rows, cols, &config);
        let profiles = generate_profiles(config.blocks, array.len(), seed);
        let aoa = aoa_from_bs(&geom.bs, &geom.ris, &geom.ris_rotation)?;
        Self::new(config, array, profiles, aoa)
    }

    /// Same model at a different transmit power.
    pub fn with_power(&self, power_dbm: f64) -> Self {
        let config = self.config.with_power(power_dbm);
        Self {
            config,
            pilots: config.pilots(),
            array: self.array.clone(),
            profiles: self.profiles.clone(),
            aoa: self.aoa,
        }
    }

    pub fn set_pilots(&mut self, pilots: DVector<Complex64>) -> Result<()> {
        if pilots.len() != self.config.subcarriers {
            return Err(Error::DimensionMismatch(format!(
                "{} pilots for {} subcarriers",
                pilots.len(),
                self.config.subcarriers
            )));
        }
        self.pilots = pilots;
        Ok(())
    }

    /// True channel parameters for a UE state under the given geometry
    /// with Friis gains.
    pub fn true_params(&self, ue: &UeState, geom: &RisGeometry) -> Result<FullChannelParams> {
        let geo = crate::geometry::g_map(ue, geom)?;
        let (gain_los, gain_ris) = friis_gains(&ue.position, geom, &self.config)?;
        Ok(FullChannelParams { geo, gain_los, gain_ris })
    }

    /// `b(φ)ᵀγ_ℓ` and its angle derivatives for every block.
    fn ris_scalars(&self, phi: (f64, f64)) -> Vec<[Complex64; 3]> {
        let a_in = array_response(self.aoa.0, self.aoa.1, &self.array, &self.config).value;
        let out = array_response(phi.0, phi.1, &self.array, &self.config);
        let b = a_in.component_mul(&out.value);
        let b_az = a_in.component_mul(&out.d_azimuth);
        let b_el = a_in.component_mul(&out.d_elevation);
        self.profiles
            .blocks()
            .iter()
            .map(|g| [b.dot(g), b_az.dot(g), b_el.dot(g)])
            .collect()
    }

    /// `{μ_ℓ}` for `ℓ = 1..L`.
    pub fn noise_free_signal(&self, params: &FullChannelParams) -> Vec<DVector<Complex64>> {
        let geo = &params.geo;
        let los = delay_steering(geo.delay_los, &self.config).component_mul(&self.pilots);
        let ris = delay_steering(geo.delay_ris, &self.config).component_mul(&self.pilots);
        self.ris_scalars((geo.azimuth, geo.elevation))
            .into_iter()
            .map(|[s, _, _]| &los * params.gain_los + &ris * (params.gain_ris * s))
            .collect()
    }

    /// `∂μ_ℓ/∂η_ch` as a `K × 8` matrix per block, columns in `η_ch` order.
    pub fn signal_jacobian(&self, params: &FullChannelParams) -> Vec<DMatrix<Complex64>> {
        let geo = &params.geo;
        let k_total = self.config.subcarriers;
        let ramp = DVector::from_fn(k_total, |k, _| {
            Complex64::new(0.0, -2.0 * PI * k as f64 * self.config.subcarrier_spacing())
        });
        let los = delay_steering(geo.delay_los, &self.config).component_mul(&self.pilots);
        let ris = delay_steering(geo.delay_ris, &self.config).component_mul(&self.pilots);
        let los_d = los.component_mul(&ramp);
        let ris_d = ris.component_mul(&ramp);
        let j = Complex64::i();
        let (g_b, g_r) = (params.gain_los, params.gain_ris);

        self.ris_scalars((geo.azimuth, geo.elevation))
            .into_iter()
            .map(|[s, s_az, s_el]| {
                let mut jac = DMatrix::zeros(k_total, 8);
                jac.set_column(0, &(&ris * (g_r * s_az)));
                jac.set_column(1, &(&ris * (g_r * s_el)));
                jac.set_column(2, &(&los_d * g_b));
                jac.set_column(3, &(&ris_d * (g_r * s)));
                jac.set_column(4, &los);
                jac.set_column(5, &(&los * j));
                jac.set_column(6, &(&ris * s));
                jac.set_column(7, &(&ris * (j * s)));
                jac
            })
            .collect()
    }
}
