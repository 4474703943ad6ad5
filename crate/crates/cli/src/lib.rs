//! Command-line front end for `feynpath`.
//!
//! Exit codes: 0 success, 2 usage or input errors (unknown names, parse
//! failures), 3 impossible post-selection or undefined weak value, 4 numeric
//! failures including a failed `verify`.

pub mod commands;
pub mod emit;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use feynpath::oracle::WIDTH_RATIOS;
use feynpath::scenarios;
use feynpath::Error;

use emit::{emit, Format, Payload};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_POST_SELECTION: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "feynpath", version, about = "Feynman-path analysis of pre- and post-selected systems")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Virtual path amplitudes of the Hardy scenario.
    Table1,
    /// Hardy transition probabilities under each occupation measurement.
    Table2,
    /// Weak value of an observable for one post-selection.
    Weak {
        #[arg(long, default_value = "hardy")]
        scenario: String,
        /// Scenario parameter: beta for three-box, eps for hardy-epsilon.
        #[arg(long, visible_aliases = ["beta", "eps"], allow_negative_numbers = true)]
        param: Option<f64>,
        #[arg(long = "final")]
        final_name: String,
        #[arg(long)]
        obs: String,
    },
    /// Weak values over a log-spaced range of eps for hardy-epsilon.
    ScanEpsilon {
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        obs: String,
    },
    /// Mean meter reading as the meter width grows from strong to weak.
    SweepWidth {
        #[arg(long, default_value = "hardy")]
        scenario: String,
        #[arg(long, visible_aliases = ["beta", "eps"], allow_negative_numbers = true)]
        param: Option<f64>,
        #[arg(long = "final")]
        final_name: String,
        #[arg(long)]
        obs: String,
        /// Widths in units of the eigenvalue spread, ascending.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        ratios: Option<Vec<f64>>,
    },
    /// Run the oracle verification suite.
    Verify,
    /// Execute the queries of a scenario file.
    Run { file: PathBuf },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::PostSelectionImpossible | Error::WeakValueUndefined | Error::MeterStatisticsUndefined => {
            EXIT_POST_SELECTION
        }
        Error::NonFinite { .. } | Error::IdentityViolated { .. } | Error::InvalidGrid(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

enum Failure {
    Lib(Error),
    Read(PathBuf, std::io::Error),
    Verify(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn execute(cli: Cli, notes: &mut Vec<String>) -> Result<Vec<Payload>, (Vec<Payload>, Failure)> {
    let plain = |r: feynpath::Result<Payload>| r.map(|p| vec![p]).map_err(|e| (Vec::new(), Failure::Lib(e)));
    match cli.command {
        Command::Table1 => plain(commands::hardy_table1()),
        Command::Table2 => plain(commands::hardy_table2()),
        Command::Weak { scenario, param, final_name, obs } => plain(
            scenarios::builtin(&scenario, param).and_then(|s| commands::weak(&s, &final_name, &obs)),
        ),
        Command::ScanEpsilon { from, to, steps, obs } => plain(commands::scan(&obs, from, to, steps)),
        Command::SweepWidth { scenario, param, final_name, obs, ratios } => {
            let ratios = ratios.unwrap_or_else(|| WIDTH_RATIOS.to_vec());
            plain(
                scenarios::builtin(&scenario, param)
                    .and_then(|s| commands::sweep_width(&s, &final_name, &obs, &ratios)),
            )
        }
        Command::Verify => {
            let (payload, outcomes) = commands::verify();
            match outcomes.iter().filter(|o| !o.passed).count() {
                0 => Ok(vec![payload]),
                failed => Err((vec![payload], Failure::Verify(failed))),
            }
        }
        Command::Run { file } => {
            let text = std::fs::read_to_string(&file).map_err(|e| (Vec::new(), Failure::Read(file.clone(), e)))?;
            let (scenario, queries) = feynpath::scenario_io::load(&text).map_err(|e| (Vec::new(), e.into()))?;
            notes.extend(scenario.notes.iter().cloned());
            let mut out = Vec::new();
            for q in &queries {
                match commands::query(&scenario, q) {
                    Ok(p) => out.push(p),
                    Err(e) => return Err((out, e.into())),
                }
            }
            Ok(out)
        }
    }
}

/// Runs the tool on `args` (program name first). Data goes to `out`,
/// diagnostics to `err`; the return value is the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let format = cli.format;
    let mut notes = Vec::new();
    let result = execute(cli, &mut notes);
    for n in &notes {
        let _ = writeln!(err, "note: {n}");
    }
    let (payloads, failure) = match result {
        Ok(p) => (p, None),
        Err((p, f)) => (p, Some(f)),
    };
    if !payloads.is_empty() {
        let _ = out.write_all(emit(format, &payloads).as_bytes());
    }
    match failure {
        None => 0,
        Some(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
        Some(Failure::Read(path, e)) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            EXIT_USAGE
        }
        Some(Failure::Verify(n)) => {
            let _ = writeln!(err, "error: {n} verification check(s) failed");
            EXIT_NUMERIC
        }
    }
}
