//! Closed-form pseudo-true UE state against the numerical KLD minimizer.
//!
//! `cargo run --example pseudo_true -- [CONFIG]` (defaults to the large
//! mismatch config so the geometry is visible).

use ris_mcrb::harness::{load_config, run_pseudo_true};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/large_mismatch.toml").into());
    let cfg = load_config(&path)?;
    let r = run_pseudo_true(&cfg)?;
    let truth = cfg.scenario().ue.position;

    println!("true position        {:?}", truth.as_slice());
    println!("closed-form p0       {:?}", r.closed_form.ue.position.as_slice());
    println!("numerical p0         {:?}", r.numerical.ue.position.as_slice());
    println!("closed-form bias     {:.3e} s", r.closed_form.ue.clock_bias);
    println!("|p0 - p|             {:.6} m", r.bias_norm_m);
    println!("solver gap           {:.3e} m", r.solver_gap_m);
    println!("KLD at numerical p0  {:.3e}", r.numerical.kld);
    println!("alpha, beta, x0      {:.6}, {:.6}, {:.6}", r.closed_form.alpha, r.closed_form.beta, r.closed_form.x0);
    println!("line distance        {:.3e} m", r.line_distance_m);
    println!("hyperboloid residual {:.3e} m", r.hyperboloid_residual_m);
    Ok(())
}
