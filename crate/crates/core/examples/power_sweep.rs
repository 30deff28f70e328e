//! LB, bias and PEB against transmit power for a fixed RIS mismatch.
//!
//! `cargo run --release --example power_sweep -- [CONFIG] [OUT.csv]`

use ris_mcrb::harness::{load_config, run_power_sweep, write_csv};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/position_mismatch.toml").into());
    let cfg = load_config(&path)?;
    let rows = run_power_sweep(&cfg)?;

    println!("{:>6} {:>12} {:>12} {:>12} {:>8}", "P dBm", "LB m", "bias m", "PEB m", "LB/bias");
    for r in &rows {
        println!(
            "{:>6.1} {:>12.6} {:>12.6} {:>12.6} {:>8.4}",
            r.power_dbm,
            r.lb_m,
            r.bias_m,
            r.peb_m,
            r.lb_m / r.bias_m
        );
    }
    if let Some(out) = args.next() {
        write_csv(&rows, &out)?;
        println!("wrote {out}");
    }
    Ok(())
}
