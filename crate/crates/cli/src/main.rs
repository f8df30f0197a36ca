mod cli;
mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use cli::{Cli, Command};
use commands::CliError;

fn fail(e: &CliError) -> ExitCode {
    let obj = json!({"error": {"kind": e.kind(), "code": e.code(), "message": e.message()}});
    eprintln!("{obj}");
    ExitCode::from(e.code() as u8)
}

fn run(mut cli: Cli) -> Result<ExitCode, CliError> {
    let name = cli.command.name();
    let params = cli.command.params_mut();
    if let Some(path) = params.config.clone() {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        let cfg = config::parse(&text).map_err(CliError::Validation)?;
        cfg.apply(name, params).map_err(CliError::Validation)?;
    }
    let params = params.clone();
    let mut status = ExitCode::SUCCESS;
    let outcome = match &cli.command {
        Command::Family(p) => commands::family(p)?,
        Command::Mt(p) => commands::mt(p)?,
        Command::Bm(p) => commands::bm(p)?,
        Command::Sweep(p) => commands::sweep_cmd(p)?,
        Command::Legendre(p) => commands::legendre_cmd(p)?,
        Command::Laplace(p) => commands::laplace(p)?,
        Command::Thermo(p) => commands::thermo(p)?,
        Command::Mfe { action } => commands::mfe_cmd(action)?,
        Command::Constants(p) => commands::constants_cmd(p)?,
        Command::Reproduce(p) => {
            let (o, all) = commands::reproduce(p)?;
            if !all {
                status = ExitCode::from(1);
            }
            o
        }
    };
    let format = params.format.unwrap_or(outcome.default_format);
    let config = serde_json::to_value(&params).expect("serializable params");
    let body = output::render(&outcome, format, name, &config);
    match &params.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(body.as_bytes());
        }
    }
    Ok(status)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.to_string().trim().to_string())),
    };
    let code = match run(cli) {
        Ok(c) => c,
        Err(e) => fail(&e),
    };
    eprintln!("# wall_time_s = {:.3}", start.elapsed().as_secs_f64());
    code
}
