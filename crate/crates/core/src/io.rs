//! JSON-lines trace files: one sweep frame or magnetometer sample per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::electrical::SweepFrame;
use crate::error::{Error, Result};
use crate::magnetic::MagSample;

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Parses every non-blank line; failures carry the 1-based line number.
pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    read_jsonl_checked(path, |_: &T| Ok(()))
}

fn read_jsonl_checked<T: DeserializeOwned>(path: impl AsRef<Path>, check: impl Fn(&T) -> Result<()>) -> Result<Vec<T>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let no = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let item: T = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: no,
            message: e.to_string(),
        })?;
        check(&item).map_err(|e| Error::Parse {
            line: no,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

pub fn read_sweeps(path: impl AsRef<Path>) -> Result<Vec<SweepFrame>> {
    read_jsonl_checked(path, SweepFrame::validate)
}

pub fn read_trace(path: impl AsRef<Path>) -> Result<Vec<MagSample>> {
    read_jsonl_checked(path, |s: &MagSample| {
        if s.t.is_finite() && s.b_t.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::domain("magnetometer sample must be finite"))
        }
    })
}
