use clap::{Args, Parser, Subcommand, ValueEnum};
use ris_mcrb::harness::{self, CsvRow, ExperimentConfig, SweepKind};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

#[derive(Parser)]
#[command(name = "ris-mcrb", version, about = "Misspecified bounds for RIS-aided localization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `run.trials`.
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides `run.output_path`; stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Position,
    Orientation,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form and numerical pseudo-true UE state.
    PseudoTrue(Common),
    /// LB, bias, PEB and optional MML RMSE against transmit power.
    PowerSweep(Common),
    /// LB statistics against mismatch standard deviation.
    SigmaSweep {
        #[command(flatten)]
        common: Common,
        /// Overrides `run.mode`.
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
}

enum Failure {
    Config(String),
    Numerical(String),
}

fn resolve(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => harness::load_config(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.run.trials = trials;
    }
    if let Some(out) = &common.out {
        cfg.run.output_path = Some(out.clone());
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
    for line in cfg.to_toml().lines() {
        eprintln!("# {line}");
    }
    Ok(cfg)
}

fn emit<R: CsvRow>(rows: &[R], cfg: &ExperimentConfig) -> Result<(), Failure> {
    match &cfg.run.output_path {
        Some(path) => harness::write_csv(rows, path).map_err(|e| Failure::Config(format!("{}: {e}", path.display()))),
        None => {
            print!("{}", harness::output::to_csv_string(rows));
            Ok(())
        }
    }
}

fn numerical(e: ris_mcrb::Error) -> Failure {
    Failure::Numerical(e.to_string())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::PseudoTrue(common) => {
            let cfg = resolve(&common)?;
            let r = harness::run_pseudo_true(&cfg).map_err(numerical)?;
            let p = r.closed_form.ue.position;
            let q = r.numerical.ue.position;
            let text = format!(
                "closed_form_m = [{:.12}, {:.12}, {:.12}]\n\
                 closed_form_clock_bias_s = {:.6e}\n\
                 numerical_m = [{:.12}, {:.12}, {:.12}]\n\
                 numerical_kld = {:.6e}\n\
                 solver_gap_m = {:.6e}\n\
                 bias_m = {:.12}\n\
                 alpha_m = {:.12}\n\
                 beta_m = {:.12}\n\
                 x0 = {:.12}\n\
                 line_distance_m = {:.6e}\n\
                 hyperboloid_residual_m = {:.6e}\n",
                p.x,
                p.y,
                p.z,
                r.closed_form.ue.clock_bias,
                q.x,
                q.y,
                q.z,
                r.numerical.kld,
                r.solver_gap_m,
                r.bias_norm_m,
                r.closed_form.alpha,
                r.closed_form.beta,
                r.closed_form.x0,
                r.line_distance_m,
                r.hyperboloid_residual_m,
            );
            match &cfg.run.output_path {
                Some(path) => std::fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display()))),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::PowerSweep(common) => {
            let cfg = resolve(&common)?;
            let rows = harness::run_power_sweep(&cfg).map_err(numerical)?;
            emit(&rows, &cfg)
        }
        Command::SigmaSweep { common, kind } => {
            let cfg = resolve(&common)?;
            let kind = match kind {
                Some(Kind::Position) => SweepKind::Position,
                Some(Kind::Orientation) => SweepKind::Orientation,
                None => cfg.run.mode,
            };
            let rows = harness::run_sigma_sweep(&cfg, kind).map_err(numerical)?;
            emit(&rows, &cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
