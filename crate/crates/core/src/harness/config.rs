//! TOML experiment configuration.
//!
//! Every key is optional; omitted keys take the reference-scenario defaults.
//! Unknown keys are rejected.
//!
//! ```toml
//! [scenario]
//! bs_position_m = [5.0, 0.0, 3.0]
//! ris_position_m = [0.0, -5.0, 2.5]
//! ris_orientation_deg = [0.0, 0.0, 90.0]
//! ue_position_m = [-2.5, 2.5, 0.0]
//! clock_bias_ns = 0.0
//!
//! [signal]
//! fc_hz = 28e9
//! bandwidth_hz = 400e6
//! num_subcarriers = 3000
//! num_symbols = 32
//! power_dbm = 10.0
//! noise_psd_dbm_hz = -173.855
//! noise_figure_db = 10.0
//! ris_rows = 64
//! ris_cols = 64
//!
//! [mismatch]
//! u_m = [0.0, 0.0, 0.0]
//! v_deg = [0.0, 0.0, 0.0]
//! sigma_p_m = [0.01, 0.02, 0.03, 0.04, 0.05, 0.06]
//! sigma_o_deg = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]
//! realizations = 100
//!
//! [run]
//! mode = "position"
//! seed = 0
//! trials = 0
//! power_sweep_dbm = { start = -10.0, stop = 40.0, step = 5.0 }
//! output_path = "results.csv"
//! ```

use crate::channel::SignalConfig;
use crate::geometry::{Scenario, UeState, Vec3};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub bs_position_m: [f64; 3],
    pub ris_position_m: [f64; 3],
    pub ris_orientation_deg: [f64; 3],
    pub ue_position_m: [f64; 3],
    pub clock_bias_ns: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            bs_position_m: [5.0, 0.0, 3.0],
            ris_position_m: [0.0, -5.0, 2.5],
            ris_orientation_deg: [0.0, 0.0, 90.0],
            ue_position_m: [-2.5, 2.5, 0.0],
            clock_bias_ns: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalSection {
    pub fc_hz: f64,
    pub bandwidth_hz: f64,
    pub num_subcarriers: usize,
    pub num_symbols: usize,
    pub power_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub ris_rows: usize,
    pub ris_cols: usize,
}

impl Default for SignalSection {
    fn default() -> Self {
        Self {
            fc_hz: 28e9,
            bandwidth_hz: 400e6,
            num_subcarriers: 3000,
            num_symbols: 32,
            power_dbm: 10.0,
            noise_psd_dbm_hz: -173.855,
            noise_figure_db: 10.0,
            ris_rows: 64,
            ris_cols: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MismatchSection {
    pub u_m: [f64; 3],
    pub v_deg: [f64; 3],
    pub sigma_p_m: Vec<f64>,
    pub sigma_o_deg: Vec<f64>,
    pub realizations: usize,
}

impl Default for MismatchSection {
    fn default() -> Self {
        Self {
            u_m: [0.0; 3],
            v_deg: [0.0; 3],
            sigma_p_m: vec![0.01, 0.02, 0.03, 0.04, 0.05, 0.06],
            sigma_o_deg: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
            realizations: 100,
        }
    }
}

/// Which calibration error the sigma sweep randomises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    #[default]
    Position,
    Orientation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for PowerGrid {
    fn default() -> Self {
        Self {
            start: -10.0,
            stop: 40.0,
            step: 5.0,
        }
    }
}

impl PowerGrid {
    /// Inclusive grid `start, start + step, …, ≤ stop`.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub mode: SweepKind,
    pub seed: u64,
    pub trials: usize,
    pub power_sweep_dbm: PowerGrid,
    pub output_path: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            mode: SweepKind::Position,
            seed: 0,
            trials: 0,
            power_sweep_dbm: PowerGrid::default(),
            output_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSection,
    pub signal: SignalSection,
    pub mismatch: MismatchSection,
    pub run: RunSection,
}

fn check_finite(key: &'static str, values: &[f64]) -> Result<(), ConfigError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ConfigError::Invalid {
            key,
            reason: "must be finite".into(),
        })
    }
}

fn invalid(key: &'static str, reason: &str) -> ConfigError {
    ConfigError::Invalid {
        key,
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let sc = &self.scenario;
        check_finite("scenario.bs_position_m", &sc.bs_position_m)?;
        check_finite("scenario.ris_position_m", &sc.ris_position_m)?;
        check_finite("scenario.ris_orientation_deg", &sc.ris_orientation_deg)?;
        check_finite("scenario.ue_position_m", &sc.ue_position_m)?;
        check_finite("scenario.clock_bias_ns", &[sc.clock_bias_ns])?;

        let sg = &self.signal;
        check_finite("signal.fc_hz", &[sg.fc_hz])?;
        check_finite("signal.bandwidth_hz", &[sg.bandwidth_hz])?;
        check_finite("signal.power_dbm", &[sg.power_dbm])?;
        check_finite("signal.noise_psd_dbm_hz", &[sg.noise_psd_dbm_hz])?;
        check_finite("signal.noise_figure_db", &[sg.noise_figure_db])?;
        if sg.fc_hz <= 0.0 {
            return Err(invalid("signal.fc_hz", "must be positive"));
        }
        if sg.bandwidth_hz <= 0.0 {
            return Err(invalid("signal.bandwidth_hz", "must be positive"));
        }
        if sg.num_subcarriers < 2 {
            return Err(invalid("signal.num_subcarriers", "must be at least 2"));
        }
        if sg.num_symbols < 1 {
            return Err(invalid("signal.num_symbols", "must be at least 1"));
        }
        if sg.ris_rows < 1 {
            return Err(invalid("signal.ris_rows", "must be at least 1"));
        }
        if sg.ris_cols < 1 {
            return Err(invalid("signal.ris_cols", "must be at least 1"));
        }

        let mm = &self.mismatch;
        check_finite("mismatch.u_m", &mm.u_m)?;
        check_finite("mismatch.v_deg", &mm.v_deg)?;
        check_finite("mismatch.sigma_p_m", &mm.sigma_p_m)?;
        check_finite("mismatch.sigma_o_deg", &mm.sigma_o_deg)?;
        if mm.sigma_p_m.iter().chain(&mm.sigma_o_deg).any(|s| *s < 0.0) {
            return Err(invalid("mismatch.sigma_p_m", "standard deviations must be non-negative"));
        }
        if mm.realizations < 1 {
            return Err(invalid("mismatch.realizations", "must be at least 1"));
        }

        let grid = &self.run.power_sweep_dbm;
        check_finite("run.power_sweep_dbm", &[grid.start, grid.stop, grid.step])?;
        if grid.step <= 0.0 || grid.stop < grid.start {
            return Err(invalid("run.power_sweep_dbm", "need step > 0 and stop >= start"));
        }
        Ok(())
    }

    pub fn scenario(&self) -> Scenario {
        let sc = &self.scenario;
        Scenario {
            bs: Vec3::from(sc.bs_position_m),
            ris: Vec3::from(sc.ris_position_m),
            ris_orientation_deg: Vec3::from(sc.ris_orientation_deg),
            ue: UeState::new(Vec3::from(sc.ue_position_m), sc.clock_bias_ns * 1e-9),
            position_error: Vec3::from(self.mismatch.u_m),
            orientation_error_deg: Vec3::from(self.mismatch.v_deg),
        }
    }

    pub fn signal_config(&self) -> SignalConfig {
        let sg = &self.signal;
        SignalConfig {
            carrier_hz: sg.fc_hz,
            bandwidth_hz: sg.bandwidth_hz,
            subcarriers: sg.num_subcarriers,
            blocks: sg.num_symbols,
            power_dbm: sg.power_dbm,
            noise_psd_dbm_hz: sg.noise_psd_dbm_hz,
            noise_figure_db: sg.noise_figure_db,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

/// Parses and validates a configuration from TOML text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
