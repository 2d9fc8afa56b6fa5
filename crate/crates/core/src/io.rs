//! Shared reader for the comma-separated text formats.

use std::path::Path;

use crate::{Error, Result};

pub(crate) struct Row {
    pub line: u64,
    pub fields: Vec<String>,
}

pub(crate) struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Row>,
}

/// Reads a comma-separated file. `#` starts a comment line. When
/// `has_header` is false every record is returned as a row and `header` is
/// empty.
pub(crate) fn read_table(path: &Path, has_header: bool) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(file);

    let mut header = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(path, io),
                kind => Error::parse(path, line, format!("{kind:?}")),
            }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let fields: Vec<String> = record.iter().map(str::to_owned).collect();
        if fields.iter().all(String::is_empty) {
            continue;
        }
        if has_header && header.is_empty() {
            header = fields;
            continue;
        }
        if has_header && fields.len() != header.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), fields.len()),
            ));
        }
        rows.push(Row { line, fields });
    }
    if has_header && header.is_empty() {
        return Err(Error::parse(path, 1, "missing header row"));
    }
    Ok(Table { header, rows })
}

/// Parses a finite float; NaN and infinities are rejected.
pub(crate) fn parse_f64(path: &Path, line: u64, field: &str) -> Result<f64> {
    let value: f64 = field
        .parse()
        .map_err(|_| Error::parse(path, line, format!("not a number: {field:?}")))?;
    if !value.is_finite() {
        return Err(Error::parse(
            path,
            line,
            format!("non-finite value: {field:?}"),
        ));
    }
    Ok(value)
}

pub(crate) fn parse_u64(path: &Path, line: u64, field: &str) -> Result<u64> {
    field
        .parse()
        .map_err(|_| Error::parse(path, line, format!("not a non-negative integer: {field:?}")))
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Deserializes a flat key-value config file, mapping syntax and
/// unknown-key errors to a line-numbered [`Error::Parse`].
pub(crate) fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_to_string(path)?;
    parse_config(path, &text)
}

pub(crate) fn parse_config<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|span| {
                text.as_bytes()[..span.start.min(text.len())]
                    .iter()
                    .filter(|&&b| b == b'\n')
                    .count() as u64
                    + 1
            })
            .unwrap_or(0);
        Error::parse(path, line, e.message().to_owned())
    })
}
