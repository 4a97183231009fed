use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dynmask::masking::Placement;
use dynmask::scenario::{
    describe_zeros, load_config, run_identification, run_scenario, sweep, ExperimentReport, ScenarioConfig,
    ScenarioError,
};

/// Masked networked control loop experiments.
#[derive(Parser)]
#[command(name = "dynmask", version)]
struct Cli {
    /// Override the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Override the detector placement (d1 or d2).
    #[arg(long, global = true)]
    placement: Option<Placement>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn, attack, detect and write every artifact.
    Run { config: PathBuf },
    /// Repeat the scenario over values of one parameter.
    Sweep {
        config: PathBuf,
        /// delta, n_id, lambda, amplitude or threshold
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
    },
    /// Print the invariant zeros of the plant and the cipher plant.
    Zeros { config: PathBuf },
    /// Run the identification phase only.
    Identify { config: PathBuf },
}

fn load(cli: &Cli, path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let mut config = load_config(path)?;
    if let Some(seed) = cli.seed {
        if seed > i64::MAX as u64 {
            return Err(ScenarioError::Config(vec![format!("--seed: must not exceed {}", i64::MAX)]));
        }
        config.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        config.out_dir = dir.clone();
    }
    if let Some(p) = cli.placement {
        config.placement = p;
    }
    Ok(config)
}

fn print_report(r: &ExperimentReport) {
    let id = &r.identification;
    let roots: Vec<String> = id.numerator_roots.iter().map(|z| format!("{:.6}{:+.6}i", z[0], z[1])).collect();
    println!("scenario {} (seed {})", r.id, r.seed);
    println!("  identified numerator roots: {}", roots.join(", "));
    if let (Some(ep), Some(es)) = (id.zero_error_vs_plant, id.zero_error_vs_cipher) {
        println!("  zero error vs plant {ep:.6}, vs cipher {es:.6}");
    }
    println!("  attack zero {:.6}{:+.6}i, amplitude {:e}", r.attack.zero[0], r.attack.zero[1], r.attack.amplitude);
    for d in &r.detectors {
        let first = d.first_alarm.map(|k| format!(" at step {k}")).unwrap_or_default();
        println!(
            "  detector {}: energy {:.6e}, threshold {}, alarm {}{first}",
            d.placement, d.final_energy, d.threshold, d.alarm
        );
    }
    println!(
        "  performance energy: benign {:.6e}, attacked {:.6e}, diverging {}",
        r.attack.benign_energy, r.attack.attacked_energy, r.attack.diverging
    );
    if let Some(p) = &r.privacy {
        println!(
            "  {} mse {:.6e} over {} replicates, {}-private: {}",
            p.property, p.mse, p.replicates, p.delta, p.private
        );
    }
    println!("  {} files written", r.manifest.len());
}

fn execute(cli: &Cli) -> Result<(), ScenarioError> {
    match &cli.command {
        Command::Run { config } => {
            let config = load(cli, config)?;
            print_report(&run_scenario(&config)?);
        }
        Command::Sweep { config, param, values } => {
            let config = load(cli, config)?;
            let points = sweep(&config, param, values)?;
            for p in &points {
                match &p.report {
                    Ok(r) => println!(
                        "{param} = {}: zero error vs plant {}, alarm {}",
                        p.value,
                        r.identification.zero_error_vs_plant.map(|e| format!("{e:.6}")).unwrap_or("-".into()),
                        r.detector().alarm
                    ),
                    Err(e) => println!("{param} = {}: failed: {}", p.value, e.replace('\n', " ")),
                }
            }
            println!("summary written to {}", config.out_dir.join(format!("sweep_{param}.csv")).display());
        }
        Command::Zeros { config } => {
            print!("{}", describe_zeros(&load(cli, config)?)?);
        }
        Command::Identify { config } => {
            let config = load(cli, config)?;
            let s = run_identification(&config)?;
            let fmt = |v: &[[f64; 2]]| v.iter().map(|z| format!("{:.6}{:+.6}i", z[0], z[1])).collect::<Vec<_>>().join(", ");
            println!("estimator {} converged {} cost {:.6e}", s.estimator, s.converged, s.cost);
            println!("  numerator roots: {}", fmt(&s.numerator_roots));
            println!("  denominator roots: {}", fmt(&s.denominator_roots));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
