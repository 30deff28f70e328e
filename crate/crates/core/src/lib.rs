//! Localization error bounds for a single-antenna BS/UE link assisted by a
//! reconfigurable intelligent surface (RIS) whose position and orientation
//! are only known up to a calibration error.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: rotations, the location-to-channel map `η = g(r)` and its
//!   derivatives.
//! - [`channel`]: the OFDM RIS signal model and its analytic Jacobian.
//! - [`fim`]: Slepian-Bangs Fisher information, nuisance elimination and the
//!   mismatch-free position error bound.
//! - [`mcrb`]: pseudo-true parameters (closed form and numerical), the
//!   misspecified bound and the scalar lower bound.
//! - [`estimator`]: misspecified maximum-likelihood positioning and Monte
//!   Carlo RMSE.
//! - [`harness`]: configuration, experiment drivers and CSV output.
//!
//! ```
//! use ris_mcrb::geometry::Scenario;
//! use ris_mcrb::mcrb::pseudo_true_closed_form;
//! use nalgebra::Vector3;
//!
//! let mut scenario = Scenario::default();
//! scenario.position_error = Vector3::repeat(0.01);
//! let truth = scenario.true_geometry();
//! let assumed = scenario.mismatched_geometry();
//! let sol = pseudo_true_closed_form(&scenario.ue, &truth, &assumed).unwrap();
//! let bias = (sol.ue.position - scenario.ue.position).norm();
//! assert!((bias - 0.02483).abs() < 1e-4);
//! ```

// `!(x > t)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod estimator;
pub mod fim;
pub mod geometry;
pub mod harness;
pub mod lsq;
pub mod mcrb;
pub mod numeric;

pub use error::{Error, Result};
