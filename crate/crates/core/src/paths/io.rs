//! Path CSV format: header `t,value`, one row per grid point. Values are
//! written with the shortest representation that parses back to the same
//! `f64`, so a write/read cycle is lossless.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SampledPath;
use crate::error::Result;

#[derive(Serialize, Deserialize)]
struct Row {
    t: f64,
    value: f64,
}

pub fn write_csv<W: Write>(path: &SampledPath, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (&t, &value) in path.times().iter().zip(path.values()) {
        w.serialize(Row { t, value })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R, label: &str) -> Result<SampledPath> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut times = Vec::new();
    let mut values = Vec::new();
    for row in r.deserialize() {
        let row: Row = row?;
        times.push(row.t);
        values.push(row.value);
    }
    SampledPath::new(times, values, label)
}

pub fn save(path: &SampledPath, file: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(file)?;
    write_csv(path, std::io::BufWriter::new(f))
}

pub fn load(file: impl AsRef<Path>) -> Result<SampledPath> {
    let file = file.as_ref();
    let label = file.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();
    read_csv(std::fs::File::open(file)?, &label)
}
