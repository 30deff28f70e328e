//! CSV emission for sweep results.

use super::experiments::{PowerSweepRow, SigmaSweepRow};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

/// A record type with a fixed, documented column layout.
pub trait CsvRow {
    /// Header for a batch of rows (optional columns appear only when some
    /// row carries them).
    fn header(rows: &[Self]) -> Vec<&'static str>
    where
        Self: Sized;
    fn fields(&self, header_len: usize) -> Vec<String>;
}

/// Formats with at least 16 significant digits; integers in `f64` form
/// keep a decimal point so every numeric column parses as a float.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (16 - exp).max(1) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

impl CsvRow for PowerSweepRow {
    fn header(rows: &[Self]) -> Vec<&'static str> {
        let mut h = vec!["power_dbm", "lb_m", "bias_m", "peb_m", "mcrb_trace_m2"];
        if rows.iter().any(|r| r.monte_carlo.is_some()) {
            h.extend(["rmse_m", "trials_converged"]);
        }
        h
    }

    fn fields(&self, header_len: usize) -> Vec<String> {
        let mut f: Vec<String> = [self.power_dbm, self.lb_m, self.bias_m, self.peb_m, self.mcrb_trace_m2]
            .into_iter()
            .map(format_value)
            .collect();
        if header_len > 5 {
            match &self.monte_carlo {
                Some(mc) => {
                    f.push(format_value(mc.rmse_converged));
                    f.push(mc.converged.to_string());
                }
                None => f.extend([String::new(), String::new()]),
            }
        }
        f
    }
}

impl CsvRow for SigmaSweepRow {
    fn header(_: &[Self]) -> Vec<&'static str> {
        vec!["sigma", "lb_min_m", "lb_mean_m", "lb_max_m", "failures"]
    }

    fn fields(&self, _: usize) -> Vec<String> {
        vec![
            format_value(self.sigma),
            format_value(self.lb_min_m),
            format_value(self.lb_mean_m),
            format_value(self.lb_max_m),
            self.failures.to_string(),
        ]
    }
}

pub fn to_csv_string<R: CsvRow>(rows: &[R]) -> String {
    let header = R::header(rows);
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.fields(header.len()).join(","));
    }
    out
}

/// Header plus one line per row, newline-terminated.
pub fn write_csv<R: CsvRow>(rows: &[R], path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(to_csv_string(rows).as_bytes())?;
    file.flush()
}
