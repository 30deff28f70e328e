//! Damped Gauss-Newton (Levenberg-Marquardt) fit of a UE state to a
//! geometric channel-parameter vector:
//!
//! `min_r ½ (η − g(r))ᵀ W (η − g(r))`, azimuth residual wrapped.
//!
//! Both the numerical pseudo-true search and the MML estimator reduce to this
//! problem with different targets.

use crate::error::Result;
use crate::geometry::{g_jacobian, g_map, wrapped_difference, RisGeometry, UeState, SPEED_OF_LIGHT};
use crate::numeric::spd_inverse;
use nalgebra::{Matrix4, Vector4};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    /// Stop once the proposed step, with the clock-bias part expressed in
    /// metres (`c·δΔ`), is shorter than this.
    pub step_tolerance_m: f64,
    pub max_iterations: usize,
    pub initial_damping: f64,
    pub damping_factor: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            step_tolerance_m: 1e-12,
            max_iterations: 200,
            initial_damping: 1e-6,
            damping_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOutcome {
    /// Best iterate seen.
    pub ue: UeState,
    /// `½ rᵀ W r` at [`LmOutcome::ue`].
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `‖Gᵀ W r‖` at the returned iterate, with the Δ component scaled by `1/c`.
    pub gradient_norm: f64,
}

fn step_length_m(step: &Vector4<f64>) -> f64 {
    Vector4::new(step[0], step[1], step[2], step[3] * SPEED_OF_LIGHT).norm()
}

fn evaluate(target: &Vector4<f64>, ue: &UeState, geom: &RisGeometry, weight: &Matrix4<f64>) -> Result<(Vector4<f64>, f64)> {
    let eta = g_map(ue, geom)?.to_vector();
    let r = wrapped_difference(target, &eta);
    Ok((r, 0.5 * (r.transpose() * weight * r)[(0, 0)]))
}

/// Fits `r` so that `g(r | geom)` matches `target` in the `weight` metric.
pub fn fit_location(
    target: &Vector4<f64>,
    geom: &RisGeometry,
    weight: &Matrix4<f64>,
    init: &UeState,
    opts: &LmOptions,
) -> Result<LmOutcome> {
    let mut ue = *init;
    let (mut resid, mut cost) = evaluate(target, &ue, geom, weight)?;
    let mut damping = opts.initial_damping;
    let mut converged = false;
    let mut iterations = 0;
    let mut gradient = Vector4::zeros();

    while iterations < opts.max_iterations {
        iterations += 1;
        let jac = g_jacobian(&ue, geom)?;
        let normal = jac.transpose() * weight * jac;
        gradient = jac.transpose() * weight * resid;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let mut damped = normal;
        for i in 0..4 {
            damped[(i, i)] += damping * normal[(i, i)];
        }
        let Some(inv) = spd_inverse(&damped) else {
            damping *= opts.damping_factor;
            continue;
        };
        let step = inv * gradient;
        let candidate = UeState::from_vector(&(ue.to_vector() + step));
        let trial = evaluate(target, &candidate, geom, weight);
        match trial {
            Ok((r_new, c_new)) if c_new <= cost => {
                ue = candidate;
                resid = r_new;
                cost = c_new;
                damping = (damping / opts.damping_factor).max(1e-15);
                if step_length_m(&step) < opts.step_tolerance_m {
                    converged = true;
                    break;
                }
            }
            _ => {
                // A tiny undamped step that still fails is round-off at the optimum.
                if damping < 1.0 && step_length_m(&step) < opts.step_tolerance_m {
                    converged = true;
                    break;
                }
                damping *= opts.damping_factor;
            }
        }
    }

    if converged {
        let jac = g_jacobian(&ue, geom)?;
        gradient = jac.transpose() * weight * resid;
    }
    let scaled = Vector4::new(gradient[0], gradient[1], gradient[2], gradient[3] / SPEED_OF_LIGHT);
    Ok(LmOutcome {
        ue,
        cost,
        iterations,
        converged,
        gradient_norm: scaled.norm(),
    })
}
