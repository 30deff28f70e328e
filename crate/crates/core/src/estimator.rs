//! Misspecified maximum-likelihood positioning from simulated channel
//! estimates, and Monte Carlo RMSE bookkeeping.

use crate::error::{Error, Result};
use crate::fim::EtaCovariance;
use crate::geometry::{g_map, RisGeometry, UeState};
use crate::lsq::{fit_location, LmOptions, LmOutcome};
use crate::numeric::spd_cholesky_factor;
use nalgebra::Vector4;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Per-trial RNG: stream `index` of the ChaCha generator seeded with `master`.
pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// One draw of `η̂ ~ N(mean, Σ)`.
pub fn sample_gaussian(mean: &Vector4<f64>, cov: &EtaCovariance, rng: &mut ChaCha8Rng) -> Vector4<f64> {
    let l = spd_cholesky_factor(cov.covariance()).expect("EtaCovariance is positive definite");
    let z = Vector4::from_fn(|_, _| StandardNormal.sample(rng));
    mean + l * z
}

/// `η̂ ~ N(g(r̄ | true), Σ)` from an explicit seed.
pub fn sample_eta_hat(r_true: &UeState, true_geom: &RisGeometry, cov: &EtaCovariance, seed: u64) -> Result<Vector4<f64>> {
    let mean = g_map(r_true, true_geom)?.to_vector();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_gaussian(&mean, cov, &mut rng))
}

/// Estimator options: the solver settings plus the tolerance in metres.
pub fn mml_options() -> LmOptions {
    LmOptions {
        step_tolerance_m: 1e-10,
        ..LmOptions::default()
    }
}

/// `argmax_r ln f_M(η̂ | r)` under the mismatched geometry.
pub fn mml_estimate(eta_hat: &Vector4<f64>, mismatched: &RisGeometry, cov: &EtaCovariance, init: &UeState) -> Result<LmOutcome> {
    fit_location(eta_hat, mismatched, cov.precision(), init, &mml_options())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub index: usize,
    pub eta_hat: Vector4<f64>,
    pub estimate: UeState,
    pub converged: bool,
    /// `‖p̂ − p̄‖` against the true UE position.
    pub position_error: f64,
}

/// Runs `trials` independent MML estimates, initialised at `r̄`. Trials are
/// evaluated in parallel; the result is ordered by trial index.
pub fn run_trials(
    r_true: &UeState,
    true_geom: &RisGeometry,
    mismatched: &RisGeometry,
    cov: &EtaCovariance,
    trials: usize,
    master_seed: u64,
) -> Result<Vec<TrialResult>> {
    let mean = g_map(r_true, true_geom)?.to_vector();
    (0..trials)
        .into_par_iter()
        .map(|index| {
            let mut rng = trial_rng(master_seed, index as u64);
            let eta_hat = sample_gaussian(&mean, cov, &mut rng);
            let (estimate, converged) = match mml_estimate(&eta_hat, mismatched, cov, r_true) {
                Ok(out) => (out.ue, out.converged),
                // A solver that wandered onto a degenerate geometry did not converge.
                Err(_) => (*r_true, false),
            };
            Ok(TrialResult {
                index,
                eta_hat,
                estimate,
                converged,
                position_error: (estimate.position - r_true.position).norm(),
            })
        })
        .collect()
}

/// RMSE over converged trials, accumulated in the given order.
pub fn rmse(trials: &[TrialResult]) -> Result<f64> {
    let (sum, n) = trials
        .iter()
        .filter(|t| t.converged)
        .fold((0.0, 0usize), |(s, n), t| (s + t.position_error * t.position_error, n + 1));
    if n == 0 {
        return Err(Error::NoConvergedTrials);
    }
    Ok((sum / n as f64).sqrt())
}

/// Aggregate Monte Carlo statistics for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloSummary {
    pub rmse_converged: f64,
    pub rmse_all: f64,
    pub converged: usize,
    pub total: usize,
    /// Delta-method standard error of `rmse_converged`.
    pub standard_error: f64,
}

/// Summary of a trial batch. When no trial converged the converged-only
/// statistics are NaN; an empty batch is an error.
pub fn summarize(trials: &[TrialResult]) -> Result<MonteCarloSummary> {
    if trials.is_empty() {
        return Err(Error::InvalidArgument("no trials to summarize".into()));
    }
    let rmse_converged = match rmse(trials) {
        Err(Error::NoConvergedTrials) => f64::NAN,
        other => other?,
    };
    let sq: Vec<f64> = trials
        .iter()
        .filter(|t| t.converged)
        .map(|t| t.position_error * t.position_error)
        .collect();
    let n = sq.len() as f64;
    let mean = sq.iter().sum::<f64>() / n;
    let var = if sq.len() > 1 {
        sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let se_mse = (var / n).sqrt();
    let standard_error = if rmse_converged.is_nan() {
        f64::NAN
    } else if rmse_converged > 0.0 {
        se_mse / (2.0 * rmse_converged)
    } else {
        0.0
    };
    let rmse_all =
        (trials.iter().map(|t| t.position_error * t.position_error).sum::<f64>() / trials.len() as f64).sqrt();
    Ok(MonteCarloSummary {
        rmse_converged,
        rmse_all,
        converged: sq.len(),
        total: trials.len(),
        standard_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Scenario, Vec3};
    use nalgebra::Matrix4;

    fn cov() -> EtaCovariance {
        EtaCovariance::from_covariance(Matrix4::from_diagonal(&Vector4::new(1e-6, 4e-6, 1e-22, 2e-22))).unwrap()
    }

    fn trial(index: usize, err: f64, converged: bool) -> TrialResult {
        TrialResult {
            index,
            eta_hat: Vector4::zeros(),
            estimate: UeState::default(),
            converged,
            position_error: err,
        }
    }

    #[test]
    fn rmse_basics() {
        assert_eq!(rmse(&[trial(0, 0.3, true)]).unwrap(), 0.3);
        assert_eq!(rmse(&[trial(0, 0.0, true), trial(1, 0.0, true)]).unwrap(), 0.0);
        assert_eq!(rmse(&[trial(0, 1.0, false)]), Err(Error::NoConvergedTrials));
        let s = summarize(&[trial(0, 1.0, false)]).unwrap();
        assert!(s.rmse_converged.is_nan() && s.converged == 0 && s.rmse_all == 1.0);
        assert!(summarize(&[]).is_err());
        assert_eq!(rmse(&[trial(0, 2.0, true), trial(1, 9.0, false)]).unwrap(), 2.0);
    }

    #[test]
    fn rmse_permutation_stable() {
        let mut trials: Vec<_> = (0..50).map(|i| trial(i, 0.01 * (i as f64 + 1.0).sqrt(), true)).collect();
        let a = rmse(&trials).unwrap();
        trials.reverse();
        let b = rmse(&trials).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn vanishing_covariance_returns_mean() {
        let s = Scenario::default();
        let geom = s.true_geometry();
        let tiny = cov().scaled(1e-20);
        let draw = sample_eta_hat(&s.ue, &geom, &tiny, 1).unwrap();
        let mean = g_map(&s.ue, &geom).unwrap().to_vector();
        assert!((draw - mean).abs().max() < 1e-9);
    }

    #[test]
    fn same_seed_same_draw() {
        let s = Scenario::default();
        let geom = s.true_geometry();
        assert_eq!(
            sample_eta_hat(&s.ue, &geom, &cov(), 42).unwrap(),
            sample_eta_hat(&s.ue, &geom, &cov(), 42).unwrap()
        );
    }

    #[test]
    fn noiseless_without_mismatch_is_exact() {
        let s = Scenario::default();
        let geom = s.true_geometry();
        let eta = g_map(&s.ue, &geom).unwrap().to_vector();
        let init = UeState::new(s.ue.position + Vec3::new(0.05, 0.05, -0.05), 0.0);
        let out = mml_estimate(&eta, &geom, &cov(), &init).unwrap();
        assert!(out.converged);
        assert!((out.ue.position - s.ue.position).norm() < 1e-9);
    }

    #[test]
    fn trials_are_deterministic_and_ordered() {
        let s = Scenario::default().with_mismatch(Vec3::repeat(0.01), Vec3::zeros());
        let a = run_trials(&s.ue, &s.true_geometry(), &s.mismatched_geometry(), &cov(), 16, 9).unwrap();
        let b = run_trials(&s.ue, &s.true_geometry(), &s.mismatched_geometry(), &cov(), 16, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, t)| t.index == i));
    }
}
