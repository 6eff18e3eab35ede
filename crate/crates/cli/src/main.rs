//! `qcbc`: closed-form predictions, Monte Carlo checks and the
//! combining-versus-amplifier comparison.
//!
//! Exit status: 0 when every check passes, 1 when a Monte Carlo estimate
//! falls outside its tolerance band, 2 on usage or input errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use qcbc_core::Experiment;

use commands::{GridFlags, PredictRequest, SimulateRequest};
use output::Format;

#[derive(Parser)]
#[command(name = "qcbc", version, about = "Quantum noise limits of coherent beam combining")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form predictions: combining output, amplifier at G = N, ξ threshold.
    Predict(PredictArgs),
    /// Monte Carlo experiment checked against its closed-form prediction.
    Simulate(Box<SimulateArgs>),
    /// Combining versus quantum-limited amplification over a range of N.
    Compare(CompareArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Also write the records to this file (format from --format or the extension).
    #[arg(long)]
    out: Option<PathBuf>,
    /// table, csv or json.
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct PredictArgs {
    /// Combining-port variances.
    #[arg(long)]
    cbc: bool,
    /// Quantum-limited amplifier output variance.
    #[arg(long)]
    amp: bool,
    /// Accuracy factor at which combining and amplification break even.
    #[arg(long)]
    threshold: bool,
    /// Number of beams.
    #[arg(short = 'N')]
    beams: Option<usize>,
    /// Mean photon number per beam.
    #[arg(short = 'n')]
    photons: Option<f64>,
    /// Phase-lock accuracy factor ξ = Var(ψ)/Var_SQL (default 1).
    #[arg(long, conflicts_with = "phase_var")]
    xi: Option<f64>,
    /// Per-beam phase variance in rad².
    #[arg(long)]
    phase_var: Option<f64>,
    /// Intensity gain; defaults to N.
    #[arg(short = 'G')]
    gain: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// cbc, amp, cascade, lock or gamma.
    #[arg(value_parser = parse_experiment)]
    experiment: Option<Experiment>,
    /// Plan file with the experiment and its parameter grid.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// Number of beams (comma list for a sweep).
    #[arg(short = 'N')]
    beams: Option<String>,
    /// Photons per beam.
    #[arg(short = 'n')]
    photons: Option<String>,
    #[arg(long)]
    xi: Option<String>,
    /// Phase variance in rad².
    #[arg(long)]
    phase_var: Option<String>,
    /// Intensity gain.
    #[arg(short = 'G')]
    gain: Option<String>,
    #[arg(long)]
    stages: Option<String>,
    /// Amplifier kind: quantum_limited, measure_prepare or phase_sensitive.
    #[arg(long)]
    kind: Option<String>,
    /// Classical noise added at the amplifier output, in photons.
    #[arg(long)]
    n_cl: Option<String>,
    /// Input variance per quadrature (absolute); above 1/4 adds classical noise.
    #[arg(long)]
    input_var: Option<String>,
    /// Coherent input amplitude.
    #[arg(long)]
    alpha: Option<String>,
    /// Two-beam phase difference in rad.
    #[arg(long)]
    dpsi: Option<String>,
    /// Phase diffusion per interval for the locking loop, rad².
    #[arg(long)]
    drift_var: Option<String>,
    /// Locking-loop controller gain.
    #[arg(long)]
    loop_gain: Option<String>,
    #[arg(long)]
    intervals: Option<String>,
    /// Monte Carlo trials per grid point (default 1e6).
    #[arg(long, value_parser = commands::parse_count)]
    trials: Option<u64>,
    /// Master seed; a time-derived seed is used (and printed) when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Pass band in standard errors (default 5).
    #[arg(long)]
    tolerance_k: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Beam counts: `2..64` or a comma list.
    #[arg(short = 'N', default_value = "2..64")]
    beams: String,
    /// Photons per beam.
    #[arg(short = 'n', default_value_t = 1000.0)]
    photons: f64,
    /// Accuracy factors, comma separated; `threshold` uses ξ*(N) per row.
    #[arg(long, default_value = "1")]
    xi: String,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: qcbc_core::Error| e.to_string())
}

fn time_seed() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos() as u64)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Predict(a) => {
            let table = commands::predict(&PredictRequest {
                cbc: a.cbc,
                amp: a.amp,
                threshold: a.threshold,
                beams: a.beams,
                photons: a.photons,
                xi: a.xi,
                phase_var: a.phase_var,
                gain: a.gain,
            })?;
            output::emit(&table, a.output.format, a.output.out.as_deref())?;
            Ok(true)
        }
        Command::Simulate(a) => {
            let mut grid = GridFlags::default();
            grid.add("N", "-N", a.beams.as_ref());
            grid.add("n", "-n", a.photons.as_ref());
            grid.add("xi", "--xi", a.xi.as_ref());
            grid.add("phase_var", "--phase-var", a.phase_var.as_ref());
            grid.add("G", "-G", a.gain.as_ref());
            grid.add("stages", "--stages", a.stages.as_ref());
            grid.add("kind", "--kind", a.kind.as_ref());
            grid.add("n_cl", "--n-cl", a.n_cl.as_ref());
            grid.add("input_var", "--input-var", a.input_var.as_ref());
            grid.add("alpha", "--alpha", a.alpha.as_ref());
            grid.add("dpsi", "--dpsi", a.dpsi.as_ref());
            grid.add("drift_var", "--drift-var", a.drift_var.as_ref());
            grid.add("gain", "--loop-gain", a.loop_gain.as_ref());
            grid.add("intervals", "--intervals", a.intervals.as_ref());
            let (table, pass) = commands::simulate(&SimulateRequest {
                experiment: a.experiment,
                plan: a.plan,
                grid,
                trials: a.trials,
                seed: a.seed,
                fallback_seed: time_seed(),
                workers: a.workers,
                tolerance_k: a.tolerance_k,
            })?;
            output::emit(&table, a.output.format, a.output.out.as_deref())?;
            Ok(pass)
        }
        Command::Compare(a) => {
            let beams = commands::parse_beam_range(&a.beams)?;
            let xis = commands::parse_xi_list(&a.xi)?;
            let table = commands::compare(&beams, a.photons, &xis)?;
            output::emit(&table, a.output.format, a.output.out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("qcbc: at least one check is outside its tolerance band");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("qcbc: error: {e:#}");
            ExitCode::from(2)
        }
    }
}
