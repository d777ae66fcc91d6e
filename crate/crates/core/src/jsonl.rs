//! JSON-lines files: one serde value per line.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonlError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    /// `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Parses every non-blank line of `reader`.
pub fn read_from<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>, JsonlError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value =
            serde_json::from_str(&line).map_err(|e| JsonlError::Parse { line: i + 1, message: e.to_string() })?;
        out.push(value);
    }
    Ok(out)
}

pub fn read<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, JsonlError> {
    read_from(BufReader::new(File::open(path)?))
}

pub fn write_to<T: Serialize>(sink: &mut impl Write, items: &[T]) -> Result<usize, JsonlError> {
    for item in items {
        serde_json::to_writer(&mut *sink, item).map_err(std::io::Error::from)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(items.len())
}

/// Truncates `path` and writes `items`.
pub fn write<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<usize, JsonlError> {
    write_to(&mut BufWriter::new(File::create(path)?), items)
}

pub fn append<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<usize, JsonlError> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    write_to(&mut BufWriter::new(file), items)
}
