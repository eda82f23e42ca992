use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::args::Format;

#[derive(Debug)]
pub enum CliError {
    Core(qwiener::Error),
    Validation(String),
    Io(io::Error),
    Json(serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qwiener::Error as E;
        match self {
            CliError::Validation(_) => 2,
            CliError::Core(E::Domain(_) | E::Saturated { .. } | E::Degenerate(_)) => 2,
            CliError::Core(E::NoConvergence { .. } | E::NoBracket { .. }) => 3,
            CliError::Core(E::Io(_) | E::Csv(_)) | CliError::Io(_) | CliError::Json(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Validation(msg) => write!(f, "invalid argument: {msg}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl From<qwiener::Error> for CliError {
    fn from(e: qwiener::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

type CsvWriter<'a> = Box<dyn Fn(&mut dyn Write) -> CliResult<()> + 'a>;

/// A result with a JSON form and a CSV form.
pub struct Emission<'a, T: Serialize> {
    pub json: &'a T,
    pub csv: CsvWriter<'a>,
    /// Write both forms when an output path is given.
    pub paired: bool,
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn companion_path(path: &Path, format: Format) -> PathBuf {
    path.with_extension(format.other().extension())
}

impl<'a, T: Serialize> Emission<'a, T> {
    pub fn write(self, output: Option<&Path>, format: Format) -> CliResult<()> {
        let Emission { json, csv, paired } = self;
        match output {
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                match format {
                    Format::Json => write_json(&mut lock, json),
                    Format::Csv => csv(&mut lock),
                }
            }
            Some(path) => {
                let mut primary = create(path)?;
                match format {
                    Format::Json => write_json(&mut primary, json)?,
                    Format::Csv => csv(&mut primary)?,
                }
                primary.flush()?;
                if paired {
                    let other = companion_path(path, format);
                    let mut second = create(&other)?;
                    match format {
                        Format::Json => csv(&mut second)?,
                        Format::Csv => write_json(&mut second, json)?,
                    }
                    second.flush()?;
                }
                Ok(())
            }
        }
    }
}

/// Writes a header and rows of displayable fields as LF-terminated CSV.
pub fn simple_csv(w: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
