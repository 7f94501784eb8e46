//! Batch front door: `ymh <command> --config <path> [--seed S] [--out DIR]`.
//!
//! Exit status: 0 when every enabled check passes, 1 when a check fails,
//! 2 for an invalid configuration or command line, 3 when the evolution
//! produced a non-finite value, 4 for other runtime errors (I/O).

mod commands;
mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{initial_state, run_command, Report};
pub use config::{Command, DataConfig, DataKind, ProbeConfig, RunConfig};

use crate::error::YmhError;
use crate::system::Variant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NON_FINITE: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ymh", version, about = "Yang-Mills-Higgs Lorenz-gauge laboratory on the 3-torus")]
struct Args {
    /// simulate | verify-identities | probe-estimates | converge | data-check
    command: Command,
    /// flat `section.key = value` configuration file
    #[arg(long)]
    config: PathBuf,
    /// overrides `seed`
    #[arg(long)]
    seed: Option<u64>,
    /// overrides `output.dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// overrides `model.variant` (printed | consistent)
    #[arg(long)]
    variant: Option<String>,
}

fn exit_code(e: &YmhError) -> i32 {
    match e {
        YmhError::Config { .. } | YmhError::Exponent(_) | YmhError::Grid(_) | YmhError::Parameter(_) => EXIT_CONFIG,
        YmhError::NonFinite { .. } => EXIT_NON_FINITE,
        _ => EXIT_RUNTIME,
    }
}

/// Parses arguments, runs one command and returns the exit status.
/// Diagnostics go to `err`.
pub fn run<I, T>(args: I, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&args) {
        Ok(report) => {
            if report.passed {
                EXIT_OK
            } else {
                let _ = writeln!(err, "ymh: {}: a check failed; see manifest.txt", args.command.name());
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            let path = args.config.display();
            let _ = match &e {
                YmhError::Config { line: 0, msg } => writeln!(err, "ymh: {path}: {msg}"),
                YmhError::Config { line, msg } => writeln!(err, "ymh: {path}:{line}: {msg}"),
                other => writeln!(err, "ymh: {other}"),
            };
            exit_code(&e)
        }
    }
}

fn execute(args: &Args) -> crate::Result<Report> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(c) = cfg.command {
        if c != args.command {
            return Err(YmhError::Config {
                line: 0,
                msg: format!("config is for '{}', command line asks for '{}'", c.name(), args.command.name()),
            });
        }
    }
    cfg.command = Some(args.command);
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    if let Some(v) = &args.variant {
        cfg.variant = Variant::parse(v).map_err(|e| YmhError::Config { line: 0, msg: e.to_string() })?;
    }
    let hash = cfg.hash();
    std::fs::create_dir_all(&cfg.out)?;
    let result = run_command(args.command, &cfg, &hash, &cfg.out);
    let mut m = File::create(cfg.out.join("manifest.txt"))?;
    writeln!(m, "# config_hash={hash}")?;
    writeln!(m, "ymh {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(m, "command = {}", args.command.name())?;
    match &result {
        Ok(r) => {
            writeln!(m, "status = {}", if r.passed { "pass" } else { "fail" })?;
            for n in &r.notes {
                writeln!(m, "note: {n}")?;
            }
            for a in &r.artifacts {
                writeln!(m, "artifact: {a}")?;
            }
        }
        Err(e) => writeln!(m, "status = error: {e}")?,
    }
    writeln!(m, "[config]")?;
    write!(m, "{}", cfg.canonical())?;
    result
}
