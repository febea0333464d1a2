use std::io;
use std::process::ExitCode;

use clap::Parser;

use pdd_cli::args::{Cli, Command};
use pdd_cli::{bench, gen, solve, verify, EXIT_NOT_CONVERGED};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PDD_LOG_LEVEL", "warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Gen(a) => gen::run(&a).map(|_| ExitCode::SUCCESS),
        Command::Solve(a) => {
            let out = solve::run(&a)?;
            println!(
                "{}: objective {:.6e}, feasibility gap {:.3e}, {} outer iterations, {}",
                a.app.name(),
                out.objective,
                out.feasibility_gap,
                out.iterations,
                if out.converged { "converged" } else { "max_outer reached" }
            );
            Ok(if out.converged { ExitCode::SUCCESS } else { ExitCode::from(EXIT_NOT_CONVERGED) })
        }
        Command::Bench(a) => {
            let rows = bench::run(&a)?;
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            println!("{} seeds, {failed} failed; summary in {}", rows.len(), a.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(a) => {
            let report = verify::run(&a, &mut io::stdout().lock())?;
            if report.passed() {
                return Ok(ExitCode::SUCCESS);
            }
            let ids: Vec<&str> = report.failures().map(|o| o.id).collect();
            eprintln!("failing properties: {}", ids.join(", "));
            Ok(ExitCode::FAILURE)
        }
    }
}
