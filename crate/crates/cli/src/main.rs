use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kdspin::config::RunConfig;
use kdspin::{run, CliError, Overrides};

/// Spin-dependent Kapitza-Dirac runs from a JSON config.
///
/// Modes: simulate, perturbation, compton-check, tune, experiment, sweep.
/// Physics inputs are in electron-mass units; the `experiment` block is SI.
///
/// Physics defaults: k_l 0.0254, xi = xi_prime = 4.74e-3, p_z "tuned",
/// q2 0, truncation 12, steps_per_cycle 8192, ramp_cycles 5,
/// duration {"fs": 20}, initial_spin "se", method "floquet", samples 100,
/// outputs {"csv": "timeseries.csv", "summary": "summary.json"}. Unknown
/// fields are rejected.
///
/// Exit codes: 0 ok, 2 config error, 3 physics error.
#[derive(Parser, Debug)]
#[command(version, verbatim_doc_comment)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps [default: one per core].
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides physics.steps_per_cycle.
    #[arg(long)]
    steps_per_cycle: Option<usize>,
    /// Overrides physics.truncation (rungs -N..N).
    #[arg(long)]
    truncation: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides { steps_per_cycle: args.steps_per_cycle, truncation: args.truncation, jobs: args.jobs };
    let result = RunConfig::load(&args.config).and_then(|mut cfg| {
        overrides.apply(&mut cfg)?;
        run(&cfg, &args.out, overrides.jobs)
    });
    match result {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("kdspin: {e}");
            ExitCode::from(CliError::exit_code(&e))
        }
    }
}
