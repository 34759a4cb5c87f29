mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command};
use commands::{CliResult, Outcome};

fn dispatch(cmd: &Command) -> CliResult<Outcome> {
    match cmd {
        Command::Validate(a) => commands::validate_cmd(a),
        Command::Hodge(a) => commands::hodge_cmd(a),
        Command::Kuranishi(a) => commands::kuranishi_cmd(a),
        Command::Equivariance(a) => commands::equivariance_cmd(a),
        Command::AverageMetric(a) => commands::average_cmd(a),
        Command::Gauge(a) => commands::gauge_cmd(a),
        Command::Build(b) => commands::build_cmd(b),
    }
}

fn run_report(argv: &[String], out: &Outcome, exit: i32, error: Option<String>, millis: u128) -> Value {
    json!({
        "command": argv,
        "inputs": out.inputs.iter().map(|(p, d)| json!({ "path": p, "sha256": d })).collect::<Vec<_>>(),
        "checks": out.checks.iter().map(|(n, ok)| json!({ "name": n, "passed": ok })).collect::<Vec<_>>(),
        "artifacts": out.artifacts,
        "exit_code": exit,
        "error": error,
        "duration_ms": millis,
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let start = Instant::now();
    let result = dispatch(&cli.command);
    let millis = start.elapsed().as_millis();

    let (out, code, error) = match result {
        Ok(out) => {
            let code = if out.passed() { 0 } else { 1 };
            (out, code, None)
        }
        Err(e) => (Outcome::default(), e.exit_code(), Some(e.to_string())),
    };
    // A closed stdout (e.g. piping into `head`) must not turn into a panic.
    let mut stdout = std::io::stdout().lock();
    for line in &out.lines {
        let _ = writeln!(stdout, "{line}");
    }
    if let Some(e) = &error {
        eprintln!("error: {e}");
    }
    let _ = writeln!(stdout, "finished in {millis} ms");
    drop(stdout);
    if let Some(path) = &cli.report {
        let report = run_report(&argv, &out, code, error, millis);
        if let Err(e) = std::fs::write(path, kforge_core::io::to_canonical_string(&report)) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code as u8)
}
