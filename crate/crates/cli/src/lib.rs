//! `cgf`: analytic CRI laws, hop-distance laws, and the Monte Carlo
//! cross-checks behind them.
//!
//! [`run`] is the whole command line; the binary only forwards its
//! arguments and exit status.

mod cli;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use cgf_core::CgfError;
use clap::error::ErrorKind;
use clap::Parser;

use crate::cli::{Cli, Failure};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_RESOURCE: u8 = 4;

/// Parses `args` (program name first), runs the command and writes its
/// output. Errors go to stderr as one `error[kind]: message` line.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            return report("usage", first, EXIT_USAGE);
        }
    };
    let output = cli.output.clone();
    match cli::run(cli) {
        Ok(out) => {
            if let Err(e) = emit(output.as_deref(), &out.text) {
                return report("io", &e.to_string(), EXIT_RESOURCE);
            }
            match out.failed {
                Some(why) => report("validation", &why, EXIT_VALIDATION),
                None => 0,
            }
        }
        Err(Failure::Core(e)) => {
            let (kind, code) = match &e {
                CgfError::Usage(_) | CgfError::Domain(_) | CgfError::Infeasible(_) => {
                    ("usage", EXIT_USAGE)
                }
                CgfError::Resource(_) | CgfError::InsufficientTruncation { .. } => {
                    ("resource", EXIT_RESOURCE)
                }
            };
            let text = e.to_string();
            report(kind, text.strip_prefix("usage: ").unwrap_or(&text), code)
        }
        Err(Failure::Io(e)) => report("io", &e.to_string(), EXIT_RESOURCE),
    }
}

fn emit(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn report(kind: &str, message: &str, code: u8) -> u8 {
    let flat = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error[{kind}]: {flat}");
    code
}
