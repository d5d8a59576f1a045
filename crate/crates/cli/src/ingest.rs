//! Reading one numeric column from CSV-like text.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Cursor, Read};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use maxspec::ModelConfig;
use serde::Serialize;

use crate::failure::{CliResult, Failure};

/// First line written by `simulate`; the JSON after it is the generator config.
pub const SIMULATE_HEADER: &str = "# maxspec-simulate:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeaderMode {
    /// Treat the first row as a header when its selected field is not numeric.
    Auto,
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    /// Fail on the first zero, negative or non-finite value.
    Error,
    /// Skip such rows and report how many were dropped.
    Drop,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// Input file; omit or use `-` for standard input.
    pub input: Option<PathBuf>,
    /// Column to read: 1-based index or header name.
    #[arg(short, long, default_value = "1")]
    pub column: String,
    /// Field delimiter (a single character, or `tab`).
    #[arg(short, long, default_value = ",", value_parser = parse_delimiter)]
    pub delimiter: u8,
    /// Records to skip before the header or data (comment lines do not count).
    #[arg(long, default_value_t = 0)]
    pub skip: usize,
    #[arg(long, value_enum, default_value_t = HeaderMode::Auto)]
    pub header: HeaderMode,
    /// What to do with values that are not strictly positive.
    #[arg(long = "nonpositive", value_enum, default_value_t = Policy::Error)]
    pub policy: Policy,
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!(
            "delimiter must be one ASCII character or `tab`, got `{s}`"
        )),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestSummary {
    pub source: String,
    pub values: u64,
    pub dropped: u64,
    /// Generator configuration recorded by `simulate`, if present.
    pub generator: Option<ModelConfig>,
}

enum Column {
    Index(usize),
    Name(String),
}

impl IngestArgs {
    fn source(&self) -> String {
        match &self.input {
            Some(p) if p.as_os_str() != "-" => p.display().to_string(),
            _ => "<stdin>".to_string(),
        }
    }

    fn open(&self) -> CliResult<Box<dyn BufRead>> {
        Ok(match &self.input {
            Some(p) if p.as_os_str() != "-" => Box::new(BufReader::new(
                File::open(p).map_err(|e| Failure::ingest(format!("{}: {e}", p.display())))?,
            )),
            _ => Box::new(BufReader::new(io::stdin())),
        })
    }

    fn column(&self) -> CliResult<Column> {
        match self.column.parse::<usize>() {
            Ok(0) => Err(Failure::config("column indexes start at 1")),
            Ok(i) => Ok(Column::Index(i - 1)),
            Err(_) => Ok(Column::Name(self.column.clone())),
        }
    }

    /// Feeds every accepted value to `sink` in file order.
    pub fn read(&self, mut sink: impl FnMut(f64) -> CliResult) -> CliResult<IngestSummary> {
        let mut reader = self.open()?;
        let mut first = String::new();
        reader
            .read_line(&mut first)
            .map_err(|e| Failure::ingest(format!("{}: {e}", self.source())))?;
        let generator =
            match first.strip_prefix(SIMULATE_HEADER) {
                Some(json) => Some(serde_json::from_str::<ModelConfig>(json.trim()).map_err(
                    |e| Failure::ingest(format!("line 1: malformed simulate header: {e}")),
                )?),
                None => None,
            };
        let text = Cursor::new(first.into_bytes()).chain(reader);

        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .delimiter(self.delimiter)
            .comment(Some(b'#'))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text);

        let mut column = self.column()?;
        let mut header_pending = self.header != HeaderMode::No;
        let mut skipped = 0;
        let (mut values, mut dropped) = (0u64, 0u64);
        let mut record = csv::StringRecord::new();
        loop {
            match rdr.read_record(&mut record) {
                Ok(true) => {}
                Ok(false) => break,
                Err(e) => return Err(Failure::ingest(e)),
            }
            let line = record.position().map_or(0, |p| p.line());
            if skipped < self.skip {
                skipped += 1;
                continue;
            }
            if header_pending {
                header_pending = false;
                let is_header = match (&column, self.header) {
                    (_, HeaderMode::Yes) | (Column::Name(_), _) => true,
                    (Column::Index(i), _) => {
                        record.get(*i).is_some_and(|f| f.parse::<f64>().is_err())
                    }
                };
                if is_header {
                    if let Column::Name(name) = &column {
                        let i = record.iter().position(|h| h == name).ok_or_else(|| {
                            Failure::ingest(format!(
                                "line {line}: no column named `{name}` in header"
                            ))
                        })?;
                        column = Column::Index(i);
                    }
                    continue;
                }
            }
            let idx = match &column {
                Column::Index(i) => *i,
                Column::Name(name) => {
                    return Err(Failure::config(format!(
                        "column `{name}` selected by name but the input has no header row"
                    )))
                }
            };
            let field = record.get(idx).ok_or_else(|| {
                Failure::ingest(format!("line {line}: row has no column {}", idx + 1))
            })?;
            let v: f64 = field.parse().map_err(|_| {
                Failure::ingest(format!(
                    "line {line}, column {}: `{field}` is not a number",
                    idx + 1
                ))
            })?;
            if !(v > 0.0 && v.is_finite()) {
                match self.policy {
                    Policy::Error => {
                        return Err(Failure::ingest(format!(
                            "line {line}, column {}: value {v} is not positive \
                             (use --nonpositive drop to skip such rows)",
                            idx + 1
                        )))
                    }
                    Policy::Drop => {
                        dropped += 1;
                        continue;
                    }
                }
            }
            sink(v)?;
            values += 1;
        }
        if values < 2 {
            return Err(Failure::ingest(format!(
                "{}: need at least 2 positive values, found {values}",
                self.source()
            )));
        }
        Ok(IngestSummary {
            source: self.source(),
            values,
            dropped,
            generator,
        })
    }

    pub fn read_all(&self) -> CliResult<(Vec<f64>, IngestSummary)> {
        let mut out = Vec::new();
        let summary = self.read(|v| {
            out.push(v);
            Ok(())
        })?;
        Ok((out, summary))
    }
}
