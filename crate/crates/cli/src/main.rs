mod cli;
mod commands;
mod config;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser as _;
use serde::Serialize;

use crate::cli::{Cli, Format};
use crate::config::{RunConfig, OUT_DIR_ENV};
use crate::output::Sink;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical { message: String, detail: serde_json::Value },
    Io(String),
    SuiteFailed(usize),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical { message, .. } => write!(f, "numerical abort: {message}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::SuiteFailed(n) => write!(f, "invariant suite: {n} criteria failed"),
        }
    }
}

impl From<alh::Error> for CliError {
    fn from(e: alh::Error) -> Self {
        if let alh::Error::Validation(m) = &e {
            return CliError::Validation(m.clone());
        }
        if !e.is_numerical() {
            return CliError::Validation(e.to_string());
        }
        let detail = match &e {
            alh::Error::Blowup { time, sup_norm, last_state } => serde_json::json!({
                "kind": "blowup",
                "time": time,
                "sup_norm": sup_norm,
                "last_state": &**last_state,
            }),
            alh::Error::SingularOperator(_) => serde_json::json!({ "kind": "singular_operator" }),
            _ => serde_json::json!({ "kind": "numerical" }),
        };
        CliError::Numerical {
            message: e.to_string(),
            detail,
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical { .. } => 2,
            CliError::SuiteFailed(_) => 3,
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: String,
    status: &'a str,
    config: &'a RunConfig,
    wall_time_s: f64,
    outputs: Vec<String>,
    warnings: &'a [String],
    error: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse_from(cli::attach_constant_values(std::env::args())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors are validation failures; exit code 2 means a numerical abort
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let started = Instant::now();
    let cfg = match config::resolve(&cli, std::env::var(OUT_DIR_ENV).ok()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("al: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let mut sink = match Sink::new(&cfg.output.dir, cfg.output.format) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("al: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let mut warnings = Vec::new();
    let result = commands::run(&cfg, &mut sink, &mut warnings);
    for w in &warnings {
        eprintln!("al: warning: {w}");
    }
    if let Err(CliError::Numerical { message, detail }) = &result {
        let body = serde_json::json!({ "message": message, "detail": detail });
        if let Err(e) = sink.json("error", &body) {
            eprintln!("al: {e}");
        }
    }
    let status = match &result {
        Ok(()) => "ok",
        Err(CliError::SuiteFailed(_)) => "suite_failed",
        Err(CliError::Numerical { .. }) => "numerical_abort",
        Err(_) => "error",
    };
    let manifest = Manifest {
        tool: "al",
        version: env!("CARGO_PKG_VERSION"),
        command: format!("{:?}", cli.command).to_lowercase(),
        status,
        config: &cfg,
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs: sink
            .written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        warnings: &warnings,
        error: result.as_ref().err().map(|e| e.to_string()),
    };
    // The manifest is always JSON, whatever the table format.
    let mut manifest_sink = Sink {
        dir: sink.dir.clone(),
        format: Format::Json,
        written: Vec::new(),
    };
    if let Err(e) = manifest_sink.json("manifest", &manifest) {
        eprintln!("al: {e}");
        return ExitCode::from(1);
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("al: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
