//! Command-line pipeline: ingest → prune → fit → indicators → reports.

use std::ffi::OsString;

use clap::Parser;

pub mod args;
pub mod rank;
pub mod synth;

pub use args::{Cli, Command, RankArgs, SynthArgs};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit statuses of the `rank` and `synth` commands.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const EMPTY_AFTER_PRUNE: i32 = 2;
    pub const NUMERIC: i32 = 3;
}

/// An error tagged with the process exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn input(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: exit::INPUT,
            error: error.into(),
        }
    }

    /// Classifies a library error.
    pub fn from_core(error: coauthor_core::Error) -> Self {
        use coauthor_core::Error as E;
        let code = match &error {
            E::EmptyAfterPrune { .. } | E::EmptyDataset(_) => exit::EMPTY_AFTER_PRUNE,
            E::NonFinite(_) => exit::NUMERIC,
            _ => exit::INPUT,
        };
        Self {
            code,
            error: error.into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e)
    }
}

impl From<coauthor_core::Error> for Failure {
    fn from(e: coauthor_core::Error) -> Self {
        Failure::from_core(e)
    }
}

/// Parses `argv` and runs the selected command, returning the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::INPUT } else { exit::OK };
        }
    };
    let result = match cli.command {
        Command::Rank(args) => rank::cmd_rank(&args, &mut std::io::stdout().lock()).map(|_| ()),
        Command::Synth(args) => synth::cmd_synth(&args),
    };
    match result {
        Ok(()) => exit::OK,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}
