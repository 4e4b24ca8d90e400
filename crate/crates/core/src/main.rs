use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cavity_decay::scenario::{run_scenario, sweep, RunError, ScenarioConfig, SweepParam};
use cavity_decay::validation::{validate, Level};

#[derive(Parser)]
#[command(
    name = "cavity-decay",
    version,
    about = "Exact decoherence of a bosonic mode in a zero-temperature bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write CSV series.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write SVG plots.
        #[arg(long)]
        svg: bool,
    },
    /// Run a scenario once per parameter value.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// eta, omega_c, n or beta0.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance criteria.
    Validate {
        #[arg(long, value_enum, default_value = "quick")]
        level: LevelArg,
        /// Where to write the JSON report.
        #[arg(long, default_value = "validation-report.json")]
        report: PathBuf,
    },
    /// Run a built-in regime (fig1, fig2 or fig3).
    Preset {
        #[arg(long, value_parser = ["fig1", "fig2", "fig3"])]
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

fn fail(e: &RunError) -> ExitCode {
    eprintln!("error: {e}");
    if let RunError::Solver(cavity_decay::SolverError::Unstable { .. }) = e {
        eprintln!("hint: set a smaller dt in the config");
    }
    ExitCode::from(e.exit_code() as u8)
}

fn simulate(config: &ScenarioConfig, out: &Path, svg: bool) -> ExitCode {
    match run_scenario(config, out, svg) {
        Ok((_, files)) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::Simulate { config, out, svg } => match ScenarioConfig::load(&config) {
            Ok(c) => simulate(&c, &out, svg),
            Err(e) => fail(&e),
        },
        Command::Preset { name, out, svg } => match ScenarioConfig::preset(&name) {
            Ok(c) => simulate(&c, &out, svg),
            Err(e) => fail(&e.into()),
        },
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => {
            let param: SweepParam = match param.parse() {
                Ok(p) => p,
                Err(e) => return fail(&RunError::Usage(e)),
            };
            let config = match ScenarioConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            match sweep(&config, param, &values, &out) {
                Ok(rows) => {
                    let mut code = 0;
                    for row in &rows {
                        match &row.outcome {
                            Ok(_) => println!("{} = {}: ok", param.name(), row.value),
                            Err(e) => {
                                eprintln!("{} = {}: {e}", param.name(), row.value);
                                code = code.max(e.exit_code());
                            }
                        }
                    }
                    println!("{}", out.join("summary.csv").display());
                    ExitCode::from(code as u8)
                }
                Err(e) => fail(&e),
            }
        }
        Command::Validate { level, report } => {
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let result = validate(level, |r| {
                println!(
                    "[{}] {} {} ({:.1} s): {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.id,
                    r.name,
                    r.runtime_s,
                    r.detail
                );
            });
            if let Err(e) = fs::write(&report, result.to_json()) {
                eprintln!("error: cannot write {}: {e}", report.display());
                return ExitCode::from(2);
            }
            println!("report: {}", report.display());
            if result.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
    }
}
