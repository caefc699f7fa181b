//! File formats for random variables, spectra and processes.
//!
//! CSV files are comma separated with LF line endings and a header row.
//! Lines starting with `#` are comments; writers emit a single `#` line in
//! front of the header when given one. Reals are written with 17 significant
//! digits, which round-trips every `f64`.
//!
//! | contents        | header             |
//! |-----------------|--------------------|
//! | random variable | `index,value`      |
//! | Walsh spectrum  | `index,value`      |
//! | process         | `time,atom,value`  |
//!
//! The binary process layout is little-endian: `u64` depth, `u64` slice
//! count, then `slice_count × 2^depth` `f64` values, slice by slice.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::martingale::AdaptedProcess;
use crate::space::{DyadicSpace, RandomVariable, WalshSpectrum};

/// `x` with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn write_comment<W: Write>(out: &mut W, comment: Option<&str>) -> std::io::Result<()> {
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    Ok(())
}

fn write_indexed<W: Write>(mut out: W, comment: Option<&str>, values: &[f64]) -> Result<()> {
    write_comment(&mut out, comment)?;
    let mut w = csv_writer(out);
    w.write_record(["index", "value"])?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([i.to_string(), format_real(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_random_variable_csv<W: Write>(out: W, f: &RandomVariable, comment: Option<&str>) -> Result<()> {
    write_indexed(out, comment, f.values())
}

pub fn write_spectrum_csv<W: Write>(out: W, s: &WalshSpectrum, comment: Option<&str>) -> Result<()> {
    write_indexed(out, comment, s.coeffs())
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), message: message.into() }
}

fn csv_reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input)
}

fn parse_field<T: std::str::FromStr>(path: &Path, row: usize, field: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| format_err(path, format!("row {row}: cannot parse {field:?}")))
}

/// Reads `index,value` rows; indices must be `0, 1, …` in order and the
/// row count a power of two.
fn read_indexed(path: &Path) -> Result<(DyadicSpace, Vec<f64>)> {
    let mut r = csv_reader(BufReader::new(File::open(path)?));
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["index", "value"] {
        return Err(format_err(path, "expected header index,value"));
    }
    let mut values = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let index: usize = parse_field(path, row, &record[0])?;
        if index != row {
            return Err(format_err(path, format!("row {row}: expected index {row}, found {index}")));
        }
        values.push(parse_field(path, row, &record[1])?);
    }
    let space = space_for_len(path, values.len())?;
    Ok((space, values))
}

fn space_for_len(path: &Path, len: usize) -> Result<DyadicSpace> {
    if len < 2 || !len.is_power_of_two() {
        return Err(format_err(path, format!("{len} values is not 2^n for n >= 1")));
    }
    DyadicSpace::new(len.trailing_zeros())
}

pub fn read_random_variable_csv(path: &Path) -> Result<RandomVariable> {
    let (space, values) = read_indexed(path)?;
    RandomVariable::new(space, values)
}

pub fn read_spectrum_csv(path: &Path) -> Result<WalshSpectrum> {
    let (space, values) = read_indexed(path)?;
    WalshSpectrum::new(space, values)
}

pub fn write_process_csv<W: Write>(mut out: W, p: &AdaptedProcess, comment: Option<&str>) -> Result<()> {
    write_comment(&mut out, comment)?;
    let mut w = csv_writer(out);
    w.write_record(["time", "atom", "value"])?;
    for (t, slice) in p.slices().iter().enumerate() {
        for (m, v) in slice.values().iter().enumerate() {
            w.write_record([t.to_string(), m.to_string(), format_real(*v)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Raw slices read from a process file, before any adaptedness check.
pub type RawProcess = Vec<RandomVariable>;

/// Reads `time,atom,value` rows, time-major with atoms in order.
pub fn read_process_csv(path: &Path) -> Result<RawProcess> {
    let mut r = csv_reader(BufReader::new(File::open(path)?));
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["time", "atom", "value"] {
        return Err(format_err(path, "expected header time,atom,value"));
    }
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record?;
        rows.push((
            parse_field(path, row, &record[0])?,
            parse_field(path, row, &record[1])?,
            parse_field(path, row, &record[2])?,
        ));
    }
    let slice_count = rows.last().map_or(0, |r| r.0 + 1);
    if slice_count == 0 || !rows.len().is_multiple_of(slice_count) {
        return Err(format_err(path, "rows do not form complete slices"));
    }
    let size = rows.len() / slice_count;
    let space = space_for_len(path, size)?;
    for (row, &(t, m, _)) in rows.iter().enumerate() {
        if t != row / size || m != row % size {
            return Err(format_err(path, format!("row {row}: expected ({}, {}), found ({t}, {m})", row / size, row % size)));
        }
    }
    rows.chunks(size)
        .map(|chunk| RandomVariable::new(space, chunk.iter().map(|r| r.2).collect()))
        .collect()
}

pub fn write_process_binary<W: Write>(out: W, p: &AdaptedProcess) -> Result<()> {
    let mut out = BufWriter::new(out);
    out.write_all(&(p.space().depth() as u64).to_le_bytes())?;
    out.write_all(&(p.slices().len() as u64).to_le_bytes())?;
    for slice in p.slices() {
        for v in slice.values() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_process_binary(path: &Path) -> Result<RawProcess> {
    let mut input = BufReader::new(File::open(path)?);
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let depth = u64::from_le_bytes(word);
    input.read_exact(&mut word)?;
    let slice_count = u64::from_le_bytes(word);
    let depth = u32::try_from(depth).map_err(|_| format_err(path, format!("depth {depth} too large")))?;
    let space = DyadicSpace::new(depth)?;
    if slice_count != depth as u64 + 1 {
        return Err(Error::SliceCount { expected: depth as usize + 1, found: slice_count as usize });
    }
    let mut slices = Vec::with_capacity(slice_count as usize);
    let mut buf = vec![0u8; space.size() * 8];
    for _ in 0..slice_count {
        input.read_exact(&mut buf)?;
        let values = buf
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
            .collect();
        slices.push(RandomVariable::new(space, values)?);
    }
    if input.read(&mut word)? != 0 {
        return Err(format_err(path, "trailing bytes after the last slice"));
    }
    Ok(slices)
}

/// Reads a process file, choosing the binary layout for `.bin` files and
/// CSV otherwise.
pub fn read_process(path: &Path) -> Result<RawProcess> {
    if path.extension().is_some_and(|e| e == "bin") {
        read_process_binary(path)
    } else {
        read_process_csv(path)
    }
}
