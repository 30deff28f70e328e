//! Misspecified Cramér-Rao analysis for RIS geometry mismatch.
//!
//! The localization stage observes `η̂ ~ N(g(r̄ | true), Σ)` but models it
//! as `N(g(r | mismatched), Σ)`. The KL divergence between the two is the
//! quadratic form `½ h(r)ᵀ Σ⁻¹ h(r)` with `h(r) = g(r̄ | true) − g(r | mismatched)`,
//! so any `r₀` with `h(r₀) = 0` is the global minimiser. Such a point exists
//! in closed form: the UE position must lie on the ray from the assumed RIS
//! position along the rotated true direction,
//!
//! `s_l: p = x·a + p̃_r`, `a = R̃_r R_rᵀ (p̄ − p_r)`, `x > 0`,
//!
//! and on the hyperboloid sheet `‖p − p̃_r‖ − ‖p − p_b‖ = β` that preserves
//! the LOS/RIS delay difference. Substituting the line into the hyperboloid
//! gives a linear equation in `x`.

use crate::error::{Error, Result};
use crate::fim::{classical_peb, position_rms, EtaCovariance};
use crate::geometry::{
    g_hessian, g_jacobian, g_map, wrapped_difference, HessianSteps, RisGeometry, UeState, Vec3, SPEED_OF_LIGHT,
};
use crate::lsq::{fit_location, LmOptions, LmOutcome};
use crate::numeric::{sandwich_inverse, symmetrize};
use nalgebra::{Matrix4, Vector4};

/// Smallest `|2[aᵀ(p̃_r − p_b) + β‖a‖]|` (m²) accepted by the closed form.
pub const MIN_DENOMINATOR: f64 = 1e-12;
/// Largest tolerated disagreement of the LOS- and RIS-path clock-bias solutions.
pub const DELAY_CONSISTENCY_S: f64 = 1e-12;

/// `h(r) = g(r̄ | true) − g(r | mismatched)`, azimuth wrapped.
pub fn residual(r: &UeState, r_true: &UeState, true_geom: &RisGeometry, mismatched: &RisGeometry) -> Result<Vector4<f64>> {
    let eta_true = g_map(r_true, true_geom)?.to_vector();
    let eta = g_map(r, mismatched)?.to_vector();
    Ok(wrapped_difference(&eta_true, &eta))
}

/// `D(f_T ‖ f_M) = ½ h(r)ᵀ Σ⁻¹ h(r)`.
pub fn kld(
    r: &UeState,
    r_true: &UeState,
    true_geom: &RisGeometry,
    mismatched: &RisGeometry,
    cov: &EtaCovariance,
) -> Result<f64> {
    let h = residual(r, r_true, true_geom, mismatched)?;
    Ok(0.5 * (h.transpose() * cov.precision() * h)[(0, 0)])
}

/// Closed-form pseudo-true parameters and the intermediate quantities of
/// the line/hyperboloid construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoTrue {
    pub ue: UeState,
    /// `‖p_b − p̃_r‖ + ‖p_b − p̄‖ − ‖p_b − p_r‖`, metres.
    pub alpha: f64,
    /// Hyperboloid offset `‖p̄ − p_r‖ − α`, metres.
    pub beta: f64,
    /// Line direction `a = R̃_r R_rᵀ (p̄ − p_r)`.
    pub direction: Vec3,
    /// Line parameter at the intersection.
    pub x0: f64,
    /// `h(r₀)` in (rad, rad, s, s).
    pub residual: Vector4<f64>,
}

impl PseudoTrue {
    pub fn bias_norm(&self, r_true: &UeState) -> f64 {
        (self.ue.position - r_true.position).norm()
    }

    /// Distance from `p₀` to the line `s_l` (non-zero only through round-off).
    pub fn line_distance(&self, mismatched: &RisGeometry) -> f64 {
        let rel = self.ue.position - mismatched.ris;
        let unit = self.direction.normalize();
        (rel - unit * rel.dot(&unit)).norm()
    }

    /// `‖p₀ − p̃_r‖ − ‖p₀ − p_b‖ − β`.
    pub fn hyperboloid_residual(&self, mismatched: &RisGeometry) -> f64 {
        let p = self.ue.position;
        (p - mismatched.ris).norm() - (p - mismatched.bs).norm() - self.beta
    }
}

/// Pseudo-true `r₀` as the intersection of `s_l` and `s_h`.
pub fn pseudo_true_closed_form(r_true: &UeState, true_geom: &RisGeometry, mismatched: &RisGeometry) -> Result<PseudoTrue> {
    if mismatched == true_geom {
        // The line passes through p̄ at x = 1 and the hyperboloid offset is
        // exactly ‖p̄ − p_r‖ − ‖p̄ − p_b‖; return r̄ without round-off.
        let rel = r_true.position - true_geom.ris;
        return Ok(PseudoTrue {
            ue: *r_true,
            alpha: (true_geom.bs - r_true.position).norm(),
            beta: rel.norm() - (true_geom.bs - r_true.position).norm(),
            direction: rel,
            x0: 1.0,
            residual: Vector4::zeros(),
        });
    }
    let pb = true_geom.bs;
    let pr = true_geom.ris;
    let pr_assumed = mismatched.ris;
    let p_bar = r_true.position;

    let rel = p_bar - pr;
    let direction = mismatched.ris_rotation.apply(&true_geom.ris_rotation.to_local(&rel));
    let alpha = (pb - pr_assumed).norm() + (pb - p_bar).norm() - (pb - pr).norm();
    let beta = rel.norm() - alpha;

    let offset = pr_assumed - pb;
    let denominator = 2.0 * (direction.dot(&offset) + beta * direction.norm());
    if !(denominator.abs() > MIN_DENOMINATOR) {
        return Err(Error::DegenerateIntersection { denominator });
    }
    let x0 = (beta * beta - offset.norm_squared()) / denominator;
    if !(x0 > 0.0) {
        return Err(Error::IntersectionBehindRis { x0 });
    }
    // Squaring the hyperboloid equation admits the other sheet: ‖p₀ − p_b‖
    // must equal x₀‖a‖ − β ≥ 0.
    if x0 * direction.norm() - beta < 0.0 {
        return Err(Error::SpuriousIntersection);
    }
    let p0 = pr_assumed + direction * x0;

    let clock_bias = r_true.clock_bias + ((pb - p_bar).norm() - (pb - p0).norm()) / SPEED_OF_LIGHT;
    let nlos_bias = r_true.clock_bias
        + ((pb - pr).norm() + (pr - p_bar).norm() - (pb - pr_assumed).norm() - (pr_assumed - p0).norm())
            / SPEED_OF_LIGHT;
    let mismatch_s = (clock_bias - nlos_bias).abs();
    if mismatch_s > DELAY_CONSISTENCY_S {
        return Err(Error::InconsistentDelays { mismatch_s });
    }

    let ue = UeState::new(p0, clock_bias);
    let residual = residual(&ue, r_true, true_geom, mismatched)?;
    Ok(PseudoTrue {
        ue,
        alpha,
        beta,
        direction,
        x0,
        residual,
    })
}

/// Result of the iterative KLD minimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericalPseudoTrue {
    pub ue: UeState,
    pub kld: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

impl From<LmOutcome> for NumericalPseudoTrue {
    fn from(o: LmOutcome) -> Self {
        Self {
            ue: o.ue,
            kld: o.cost,
            iterations: o.iterations,
            converged: o.converged,
            gradient_norm: o.gradient_norm,
        }
    }
}

/// Minimises the KLD by damped Gauss-Newton on `h(r)` weighted by `Σ⁻¹`.
pub fn pseudo_true_numerical(
    r_true: &UeState,
    true_geom: &RisGeometry,
    mismatched: &RisGeometry,
    cov: &EtaCovariance,
    init: &UeState,
) -> Result<NumericalPseudoTrue> {
    let target = g_map(r_true, true_geom)?.to_vector();
    let out = fit_location(&target, mismatched, cov.precision(), init, &LmOptions::default())?;
    Ok(out.into())
}

/// The two terms of `A`: the model-curvature term weighted by the
/// residual `η̄ − g(r₀)`, and `−GᵀΣ⁻¹G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixATerms {
    pub curvature: Matrix4<f64>,
    pub gauss: Matrix4<f64>,
}

impl MatrixATerms {
    pub fn total(&self) -> Matrix4<f64> {
        self.curvature + self.gauss
    }
}

pub fn matrix_a_terms(
    r0: &UeState,
    mismatched: &RisGeometry,
    cov: &EtaCovariance,
    eta_true: &Vector4<f64>,
) -> Result<MatrixATerms> {
    let g = g_jacobian(r0, mismatched)?;
    let hess = g_hessian(r0, mismatched, HessianSteps::default())?;
    let resid = wrapped_difference(eta_true, &g_map(r0, mismatched)?.to_vector());
    let weighted = cov.precision() * resid;
    let curvature = hess
        .iter()
        .zip(weighted.iter())
        .fold(Matrix4::zeros(), |acc, (h, w)| acc + h * *w);
    Ok(MatrixATerms {
        curvature: symmetrize(&curvature),
        gauss: -symmetrize(&(g.transpose() * cov.precision() * g)),
    })
}

/// `A_{r₀} = E_fT{∂² ln f_M / ∂r∂rᵀ}` at `r₀`.
pub fn matrix_a(r0: &UeState, mismatched: &RisGeometry, cov: &EtaCovariance, eta_true: &Vector4<f64>) -> Result<Matrix4<f64>> {
    Ok(matrix_a_terms(r0, mismatched, cov, eta_true)?.total())
}

/// `B_{r₀} = GᵀΣ⁻¹ (Σ + e eᵀ) Σ⁻¹G` with `e = η̄ − g(r₀)`.
pub fn matrix_b(r0: &UeState, mismatched: &RisGeometry, cov: &EtaCovariance, eta_true: &Vector4<f64>) -> Result<Matrix4<f64>> {
    let g = g_jacobian(r0, mismatched)?;
    let resid = wrapped_difference(eta_true, &g_map(r0, mismatched)?.to_vector());
    let score_shift = g.transpose() * cov.precision() * resid;
    let fisher = g.transpose() * cov.precision() * g;
    Ok(symmetrize(&(fisher + score_shift * score_shift.transpose())))
}

/// Bound matrices and scalar summaries at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub mcrb: Matrix4<f64>,
    pub bias: Matrix4<f64>,
    pub lbm: Matrix4<f64>,
    /// `sqrt(tr(LBM₁:₃,₁:₃))`, metres.
    pub lb: f64,
    /// Mismatch-free PEB at the true state, metres.
    pub peb: f64,
    /// `‖p̄ − p₀‖`, metres.
    pub bias_norm_pos: f64,
}

impl BoundReport {
    /// `tr(MCRB₁:₃,₁:₃)`, m².
    pub fn mcrb_position_trace(&self) -> f64 {
        position_rms(&self.mcrb).powi(2)
    }
}

/// `LBM = A⁻¹BA⁻¹ + (r̄ − r₀)(r̄ − r₀)ᵀ` and its position RMSE bound.
pub fn bound_report(
    r_true: &UeState,
    r0: &UeState,
    a: &Matrix4<f64>,
    b: &Matrix4<f64>,
    cov: &EtaCovariance,
    true_geom: &RisGeometry,
) -> Result<BoundReport> {
    let mcrb = sandwich_inverse(a, b).ok_or(Error::McrbUndefined)?;
    let offset = r_true.to_vector() - r0.to_vector();
    let bias = offset * offset.transpose();
    let lbm = mcrb + bias;
    Ok(BoundReport {
        mcrb,
        bias,
        lbm,
        lb: position_rms(&lbm),
        peb: classical_peb(r_true, true_geom, cov)?,
        bias_norm_pos: (r_true.position - r0.position).norm(),
    })
}

/// Closed-form `r₀`, then `A`, `B` and the bound report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchAnalysis {
    pub pseudo_true: PseudoTrue,
    pub a: Matrix4<f64>,
    pub b: Matrix4<f64>,
    pub report: BoundReport,
}

pub fn analyze_mismatch(
    r_true: &UeState,
    true_geom: &RisGeometry,
    mismatched: &RisGeometry,
    cov: &EtaCovariance,
) -> Result<MismatchAnalysis> {
    let pseudo_true = pseudo_true_closed_form(r_true, true_geom, mismatched)?;
    let eta_true = g_map(r_true, true_geom)?.to_vector();
    let a = matrix_a(&pseudo_true.ue, mismatched, cov, &eta_true)?;
    let b = matrix_b(&pseudo_true.ue, mismatched, cov, &eta_true)?;
    let report = bound_report(r_true, &pseudo_true.ue, &a, &b, cov, true_geom)?;
    Ok(MismatchAnalysis {
        pseudo_true,
        a,
        b,
        report,
    })
}
