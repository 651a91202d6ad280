use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::anyhow;
use serde::Serialize;

use crate::args::{Format, Output};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_USAGE, error: anyhow!("{message}") }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self { code: EXIT_IO, error: anyhow!("{}: {err}", path.display()) }
    }
}

impl From<lpn_core::Error> for Failure {
    fn from(e: lpn_core::Error) -> Self {
        use lpn_core::Error as E;
        let code = match e {
            E::Parse { .. } => EXIT_IO,
            E::StreamExhausted(_) | E::QueryBudgetExceeded(_) => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Self { code, error: e.into() }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

fn sink(path: Option<&Path>) -> CmdResult<Box<dyn Write>> {
    match path {
        Some(p) => Ok(Box::new(io::BufWriter::new(File::create(p).map_err(|e| Failure::io(p, e))?))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

/// Writes `records` in order, as CSV with a header row or as a JSON array.
pub fn write_records<T: Serialize>(records: &[T], output: &Output) -> CmdResult {
    let path = output.out.as_deref();
    let shown = path.unwrap_or(Path::new("<stdout>"));
    let mut w = sink(path)?;
    match output.format {
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            for r in records {
                csv.serialize(r).map_err(|e| Failure::io(shown, e))?;
            }
            csv.flush().map_err(|e| Failure::io(shown, e))?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, records).map_err(|e| Failure::io(shown, e))?;
            writeln!(w).map_err(|e| Failure::io(shown, e))?;
        }
    }
    w.flush().map_err(|e| Failure::io(shown, e))
}

pub fn write_text(path: Option<&Path>, text: &str) -> CmdResult {
    let shown = path.unwrap_or(Path::new("<stdout>"));
    let mut w = sink(path)?;
    w.write_all(text.as_bytes()).map_err(|e| Failure::io(shown, e))?;
    w.flush().map_err(|e| Failure::io(shown, e))
}
