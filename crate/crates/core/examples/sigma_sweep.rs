//! LB statistics over random RIS position and orientation errors.
//!
//! `cargo run --release --example sigma_sweep -- [CONFIG]`

use ris_mcrb::harness::{load_config, run_sigma_sweep, SweepKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/sigma_sweep.toml").into());
    let cfg = load_config(&path)?;

    for (kind, unit) in [(SweepKind::Position, "m"), (SweepKind::Orientation, "deg")] {
        println!("{kind:?} error");
        println!("{:>8} {:>10} {:>10} {:>10} {:>4}", format!("σ {unit}"), "min LB", "mean LB", "max LB", "fail");
        for r in run_sigma_sweep(&cfg, kind)? {
            println!(
                "{:>8.3} {:>10.5} {:>10.5} {:>10.5} {:>4}",
                r.sigma, r.lb_min_m, r.lb_mean_m, r.lb_max_m, r.failures
            );
        }
    }
    Ok(())
}
