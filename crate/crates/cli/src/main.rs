use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thinfb::profiles::eval_u;
use thinfb_cli::config::{Check, RunConfig};
use thinfb_cli::pipeline::{run_diagnose, run_solve};
use thinfb_cli::{exit, fieldfile, verify, CliError};

#[derive(Parser)]
#[command(name = "thinfb", version, about = "Vectorial thin one-phase free boundary solver and diagnostics")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a minimizer and write the field file, energy trace and manifest.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run diagnostics on a field file and write reports and verdict.json.
    Diagnose {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of weiss,scaling,blowup,density,regularity,flatness,harnack,iof,classify.
        #[arg(long)]
        checks: Option<String>,
    },
    /// Run the built-in oracle suite.
    Verify,
}

fn parse_checks(list: &str) -> Result<Vec<Check>, CliError> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(Check::parse).collect()
}

fn run(cli: Cli) -> Result<i32, CliError> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Solve { config, out } => {
            let config = RunConfig::load(&config)?;
            let out = out.unwrap_or_else(|| config.output.dir.clone());
            let outcome = run_solve(&config, &out)?;
            let s = &outcome.state;
            println!(
                "solve: {} outer iterations, {} positive plate nodes, J = {:.6}, {:.1}s -> {}",
                s.iters.outer,
                s.mask.count(),
                s.energy_trace.last().copied().unwrap_or(0.0),
                outcome.wall_time,
                out.display()
            );
            if s.budget_exhausted {
                eprintln!("solve: iteration budget exhausted, partial output written");
                return Ok(exit::BUDGET_EXHAUSTED);
            }
            Ok(exit::SUCCESS)
        }
        Command::Diagnose { field, config, out, checks } => {
            let (g, mask) = fieldfile::read(&field)?;
            let config = match config {
                Some(path) => {
                    let c = RunConfig::load(&path)?;
                    if c.grid != g.grid().spec() {
                        return Err(CliError::Config(format!("{} does not match the grid of {}", path.display(), field.display())));
                    }
                    c
                }
                None => RunConfig {
                    grid: g.grid().spec(),
                    boundary_data: Default::default(),
                    solver: Default::default(),
                    diagnostics: Default::default(),
                    output: Default::default(),
                },
            };
            let selected = match checks {
                Some(list) => parse_checks(&list)?,
                None => config.diagnostics.checks.clone(),
            };
            let out = out.unwrap_or_else(|| config.output.dir.clone());
            let outcome = run_diagnose(&g, &mask, &config, &selected, &out)?;
            let v = &outcome.verdict;
            for (name, c) in &v.criteria {
                println!("{:<4} {name} ({} evaluated)", if c.pass { "ok" } else { "FAIL" }, c.evaluated);
            }
            println!("diagnose: {} of {} free boundary points -> {}", v.diagnosed_points, v.free_boundary_points, out.display());
            Ok(exit::SUCCESS)
        }
        Command::Verify => {
            let outcomes = verify::run_oracles(eval_u, true);
            print!("{}", verify::table(&outcomes));
            let failed: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.name).collect();
            if failed.is_empty() {
                Ok(exit::SUCCESS)
            } else {
                eprintln!("verify: failed {}", failed.join(", "));
                Ok(exit::VERIFY_FAILED)
            }
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("thinfb: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
