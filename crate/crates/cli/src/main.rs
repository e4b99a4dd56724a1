use std::path::PathBuf;
use std::process::ExitCode;

use cartan_orbits::{list_scenarios, run_scenario, verify_stabilizer, CliError, ScenarioConfig, StabilizerRequest};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cartan-orbits", version, about = "Curved orbit decomposition scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its JSON report and CSV tables.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cap on worker threads.
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the builtin scenarios.
    List,
    /// Compute a stabilizer from an {algebra, representation, datum} descriptor.
    VerifyStabilizer { descriptor: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run { config, out, threads, seed } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Config(e.to_string()))?;
            }
            let mut cfg = ScenarioConfig::from_json(&read(&config)?)?;
            cfg.resolve_seed(seed)?;
            let report = run_scenario(&cfg, out.as_deref())?;
            for c in &report.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                println!("{mark} {}: measured {:.6e} (expected {:.6e}, tolerance {:.1e})", c.name, c.measured, c.expected, c.tolerance);
            }
            for a in &report.artifacts {
                log::info!("wrote {}", a.display());
            }
            println!("{} {} in {:.2}s", report.scenario, if report.passed { "passed" } else { "failed" }, report.wall_clock_seconds);
            Ok(report.passed)
        }
        Command::List => {
            for line in list_scenarios() {
                println!("{line}");
            }
            Ok(true)
        }
        Command::VerifyStabilizer { descriptor } => {
            let req: StabilizerRequest =
                serde_json::from_str(&read(&descriptor)?).map_err(|e| CliError::Config(e.to_string()))?;
            let dump = verify_stabilizer(&req)?;
            println!("{}", serde_json::to_string_pretty(&dump).map_err(cartan_orbits_core::Error::from)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CARTAN_ORBITS_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
