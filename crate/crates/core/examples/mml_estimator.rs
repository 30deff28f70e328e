//! Monte Carlo MML estimates under mismatch compared with the LB. RMSE is
//! reported over converged trials and over all trials.
//!
//! `cargo run --release --example mml_estimator -- [CONFIG]`

use ris_mcrb::harness::{load_config, run_power_sweep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/estimator.toml").into());
    let cfg = load_config(&path)?;
    println!("{} trials per point, seed {}", cfg.run.trials, cfg.run.seed);
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>8} {:>9}", "P dBm", "LB m", "RMSE m", "all m", "SE m", "RMSE/LB", "converged");
    for row in run_power_sweep(&cfg)? {
        let Some(mc) = row.monte_carlo else {
            println!("{:>6.1} {:>10.5}  (no trials configured)", row.power_dbm, row.lb_m);
            continue;
        };
        println!(
            "{:>6.1} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>8.4} {:>5}/{}",
            row.power_dbm,
            row.lb_m,
            mc.rmse_converged,
            mc.rmse_all,
            mc.standard_error,
            mc.rmse_converged / row.lb_m,
            mc.converged,
            mc.total
        );
    }
    Ok(())
}
