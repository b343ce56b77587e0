//! Command-line front end for holdscan: generate, score, detect, report and
//! pipeline subcommands. [`run`] is the whole program minus process setup so
//! it can be driven from tests with in-memory streams.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::Path;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::config::FileConfig;
pub use crate::error::{CliError, ExitStatus};

/// Parses `args` (including the program name) and runs the subcommand.
///
/// Machine-readable output goes to `stdout` only when the command succeeds;
/// diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    ExitStatus::Success
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    ExitStatus::UsageError
                }
            };
        }
    };

    let mut input = Inputs {
        stdin,
        stdin_used: false,
    };
    match execute(cli.command, &mut input) {
        Ok(bytes) => match stdout.write_all(&bytes).and_then(|_| stdout.flush()) {
            Ok(()) => ExitStatus::Success,
            Err(e) => {
                let _ = writeln!(stderr, "error: writing output: {e}");
                ExitStatus::UsageError
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.status()
        }
    }
}

/// File or stdin reader; stdin (`-`) may be consumed once.
struct Inputs<'a> {
    stdin: &'a mut dyn Read,
    stdin_used: bool,
}

impl Inputs<'_> {
    fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        if path.as_os_str() == "-" {
            if std::mem::replace(&mut self.stdin_used, true) {
                return Err(CliError::Usage("stdin (`-`) can be used for one input only".into()));
            }
            let mut buf = Vec::new();
            self.stdin
                .read_to_end(&mut buf)
                .map_err(|e| CliError::io(Path::new("<stdin>"), e))?;
            Ok(buf)
        } else {
            std::fs::read(path).map_err(|e| CliError::io(path, e))
        }
    }
}

fn execute(command: Command, input: &mut Inputs<'_>) -> Result<Vec<u8>, CliError> {
    match command {
        Command::Generate(a) => {
            let file = FileConfig::load(a.config.config.as_deref())?;
            let mock = file.mock(&a.mock)?;
            let (csv, truth) = commands::generate(&mock)?;
            if let Some(path) = &a.truth {
                std::fs::write(path, truth).map_err(|e| CliError::io(path, e))?;
            }
            Ok(csv)
        }
        Command::Score(a) => {
            let file = FileConfig::load(a.config.config.as_deref())?;
            let params = file.model(&a.model)?;
            let waveform = input.read(&a.input)?;
            commands::score(&waveform, a.rate.rate_hz, &params, a.linear)
        }
        Command::Detect(a) => {
            let file = FileConfig::load(a.config.config.as_deref())?;
            let cfg = file.detection(&a.detection)?;
            let scores = input.read(&a.scores)?;
            let waveform = input.read(&a.waveform)?;
            commands::detect(&scores, &waveform, a.rate.rate_hz, &cfg)
        }
        Command::Report(a) => {
            let file = FileConfig::load(a.config.config.as_deref())?;
            let cfg = file.assess(&a.assess)?;
            let waveform = input.read(&a.waveform)?;
            let segments = input.read(&a.segments)?;
            commands::report(&waveform, &segments, a.rate.rate_hz, &cfg)
        }
        Command::Pipeline(a) => {
            let file = FileConfig::load(a.config.config.as_deref())?;
            let mock = file.mock(&a.mock)?;
            let params = file.model(&a.model)?;
            let detection = file.detection(&a.detection)?;
            let assess = file.assess(&a.assess)?;
            Ok(commands::pipeline(&mock, &params, &detection, &assess)?.report_ndjson)
        }
    }
}
