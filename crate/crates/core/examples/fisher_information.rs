//! Channel Fisher information, nuisance elimination and the PEB.
//!
//! `cargo run --release --example fisher_information`

use ris_mcrb::channel::{noise_variance, SignalConfig, SignalModel};
use ris_mcrb::fim::{classical_peb, eta_covariance, fim_channel, schur_reduce};
use ris_mcrb::geometry::Scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::default();
    let geom = scenario.true_geometry();
    let cfg = SignalConfig::default();
    let model = SignalModel::for_geometry(cfg, 64, 64, 0, &geom)?;

    let params = model.true_params(&scenario.ue, &geom)?;
    println!("AOD az/el   {:.6} / {:.6} rad", params.geo.azimuth, params.geo.elevation);
    println!("delays      {:.6e} / {:.6e} s", params.geo.delay_los, params.geo.delay_ris);
    println!("|g_b|, |g_r| {:.3e}, {:.3e}", params.gain_los.norm(), params.gain_ris.norm());
    println!("noise var   {:.3e} W", noise_variance(&model.config));

    let jacobians = model.signal_jacobian(&params);
    let j_full = fim_channel(&jacobians, noise_variance(&model.config))?;
    let j_eta = schur_reduce(&j_full)?;
    let cov = eta_covariance(&j_eta)?;
    let sd = cov.covariance().diagonal().map(f64::sqrt);
    println!("std(az, el) {:.3e}, {:.3e} rad", sd[0], sd[1]);
    println!("std(τ_b, τ_r) {:.3e}, {:.3e} s", sd[2], sd[3]);

    for power in [-10.0, 0.0, 10.0, 20.0, 30.0, 40.0] {
        let m = model.with_power(power);
        let cov = ris_mcrb::fim::eta_covariance_at(&m, &scenario.ue, &geom)?;
        println!("PEB @ {power:>5.1} dBm = {:.6} m", classical_peb(&scenario.ue, &geom, &cov)?);
    }
    Ok(())
}
