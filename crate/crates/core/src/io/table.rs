use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::models::{Group, Table};

/// On-disk table encodings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    /// `{"groups":[{"n":8,"ones":3},...]}`
    Json,
    /// Rows `group_id,n,ones`, with an optional header row.
    Csv,
}

impl TableFormat {
    /// Guesses the format from the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(e) if e == "json" => Ok(TableFormat::Json),
            Some(e) if e == "csv" => Ok(TableFormat::Csv),
            _ => Err(Error::Parse(format!(
                "cannot infer table format of {}; use .json or .csv",
                path.display()
            ))),
        }
    }
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(TableFormat::Json),
            "csv" => Ok(TableFormat::Csv),
            other => Err(Error::Parse(format!("unknown table format {other:?}"))),
        }
    }
}

/// Reads and validates a table file.
pub fn parse_table(path: &Path, format: TableFormat) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_table_str(&text, format)
}

pub fn parse_table_str(text: &str, format: TableFormat) -> Result<Table> {
    match format {
        TableFormat::Json => parse_json(text),
        TableFormat::Csv => parse_csv(text),
    }
}

fn parse_json(text: &str) -> Result<Table> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        groups: Vec<Group>,
    }
    let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Table::from_groups(raw.groups)
}

fn parse_csv(text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut groups = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.len() != 3 {
            return Err(Error::InvalidTableRow {
                row: groups.len(),
                reason: format!("expected 3 columns group_id,n,ones, got {}", record.len()),
            });
        }
        if i == 0 && &record[1] == "n" && &record[2] == "ones" {
            continue;
        }
        let field = |j: usize, name: &str| -> Result<usize> {
            record[j].parse().map_err(|_| Error::InvalidTableRow {
                row: groups.len(),
                reason: format!("{name} = {:?} is not a nonnegative integer", &record[j]),
            })
        };
        groups.push(Group {
            n: field(1, "n")?,
            ones: field(2, "ones")?,
        });
    }
    Table::from_groups(groups)
}

/// Canonical JSON encoding: compact, fields in the order `n`, `ones`.
pub fn table_to_json(t: &Table) -> String {
    serde_json::to_string(t).expect("tables serialize")
}
