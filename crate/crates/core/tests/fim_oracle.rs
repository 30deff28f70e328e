mod common;

use common::*;
use nalgebra::{DMatrix, Matrix4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_mcrb::channel::{noise_variance, RisProfiles, SignalModel};
use ris_mcrb::fim::{eta_covariance_at, fim_channel, schur_reduce, FimChannel, Matrix8};
use ris_mcrb::geometry::Scenario;

#[test]
fn slepian_bangs_matches_likelihood_curvature() {
    let s = Scenario::default();
    for seed in 0..3 {
        let model = tiny_model(&s, seed);
        let params = model.true_params(&s.ue, &s.true_geometry()).unwrap();
        let sigma2 = noise_variance(&model.config);
        let analytic = fim_channel(&model.signal_jacobian(&params), sigma2).unwrap().0;
        let brute = brute_force_fim(&model, &params, sigma2, fim_steps(&params));
        let a = equilibrate(&analytic, &analytic);
        let b = equilibrate(&brute, &analytic);
        let rel = (a - b).norm() / a.norm();
        assert!(rel < 1e-4, "seed {seed}: relative error {rel:e}");
    }
}

fn random_spd(rng: &mut ChaCha8Rng) -> Matrix8 {
    let a = Matrix8::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let scales: Vec<f64> = (0..8).map(|_| 10f64.powf(rng.random_range(-3.0..3.0))).collect();
    let m = a * a.transpose() + Matrix8::identity() * 0.5;
    Matrix8::from_fn(|i, j| m[(i, j)] * scales[i] * scales[j])
}

/// `[J⁻¹]₁:₄,₁:₄ = (X − YZ⁻¹Yᵀ)⁻¹`.
#[test]
fn schur_complement_inverts_leading_block_of_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..50 {
        let j = random_spd(&mut rng);
        let reduced = schur_reduce(&FimChannel(j)).unwrap();
        let full_inv = DMatrix::from_column_slice(8, 8, j.as_slice()).lu().try_inverse().unwrap();
        let lead = Matrix4::from_fn(|r, c| full_inv[(r, c)]);
        let prod = lead * reduced;
        let err = (prod - Matrix4::identity()).abs().max();
        assert!(err < 1e-8, "trial {trial}: {err:e}");
    }
}

#[test]
fn repeating_profiles_halves_covariance() {
    let s = Scenario::default();
    let geom = s.true_geometry();
    let model = tiny_model(&s, 9);
    let mut doubled_blocks = model.profiles.blocks().to_vec();
    doubled_blocks.extend(model.profiles.blocks().iter().cloned());
    let mut cfg = model.config;
    cfg.blocks *= 2;
    let doubled = SignalModel::new(cfg, model.array.clone(), RisProfiles::from_blocks(doubled_blocks), model.aoa).unwrap();
    let one = eta_covariance_at(&model, &s.ue, &geom).unwrap();
    let two = eta_covariance_at(&doubled, &s.ue, &geom).unwrap();
    let ratio = equilibrate(two.covariance(), one.covariance());
    let expect = equilibrate(&(one.covariance() * 0.5), one.covariance());
    assert!((ratio - expect).abs().max() < 1e-9);
}

#[test]
fn covariance_scales_with_power() {
    let s = Scenario::default();
    let geom = s.true_geometry();
    let model = tiny_model(&s, 1);
    let low = eta_covariance_at(&model.with_power(0.0), &s.ue, &geom).unwrap();
    let high = eta_covariance_at(&model.with_power(10.0), &s.ue, &geom).unwrap();
    let a = equilibrate(&(low.covariance() * 0.1), low.covariance());
    let b = equilibrate(high.covariance(), low.covariance());
    assert!((a - b).abs().max() < 1e-9);
}
