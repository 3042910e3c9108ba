//! On-disk formats.
//!
//! Binary dataset: `FCL1`, little-endian u64 `n`, little-endian u64 `d`,
//! then `n` rows of `ceil(d/8)` bytes with bit `j` at byte `j/8`, offset
//! `j % 8` and zero padding. Text dataset: one row of `0`/`1` characters
//! per line. Files are detected by their first four bytes.
//!
//! Ground truth CSV: `query_id,point_id,distance`, one row per neighbor.
//! Metrics CSV: the columns of [`MetricsRow`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use fclsh_core::{BitVector, Dataset};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"FCL1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Binary,
    Text,
}

impl DatasetFormat {
    /// Text for `.txt` paths, binary otherwise.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("txt") => DatasetFormat::Text,
            _ => DatasetFormat::Binary,
        }
    }
}

pub fn write_binary<W: Write>(out: &mut W, data: &Dataset) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(data.len() as u64).to_le_bytes())?;
    out.write_all(&(data.dims() as u64).to_le_bytes())?;
    for p in data.points() {
        out.write_all(&p.to_row_bytes())?;
    }
    Ok(())
}

pub fn write_text<W: Write>(out: &mut W, data: &Dataset) -> std::io::Result<()> {
    for p in data.points() {
        writeln!(out, "{p}")?;
    }
    Ok(())
}

/// Decodes a binary dataset whose magic has already been consumed.
fn read_binary_body<R: Read>(input: &mut R) -> Result<Dataset> {
    let mut header = [0u8; 16];
    input
        .read_exact(&mut header)
        .map_err(|_| CliError::Data("truncated dataset header".into()))?;
    let n = u64::from_le_bytes(header[..8].try_into().unwrap());
    let d = u64::from_le_bytes(header[8..].try_into().unwrap());
    let dims = usize::try_from(d)
        .ok()
        .filter(|&d| d <= fclsh_core::bitvec::MAX_DIMS)
        .ok_or_else(|| CliError::Data(format!("dimension {d} is out of range")))?;
    if n > u32::MAX as u64 {
        return Err(CliError::Data(format!("{n} points exceed the id range")));
    }
    let row_len = dims.div_ceil(8);
    let mut row = vec![0u8; row_len];
    let mut points = Vec::new();
    for i in 0..n {
        input
            .read_exact(&mut row)
            .map_err(|_| CliError::Data(format!("dataset truncated at row {i} of {n}")))?;
        let p = BitVector::from_row_bytes(dims, &row)
            .map_err(|e| CliError::Data(format!("row {i}: {e}")))?;
        points.push(p);
    }
    if input.read(&mut [0u8; 1]).map_err(|e| CliError::Data(e.to_string()))? != 0 {
        return Err(CliError::Data("trailing bytes after the last row".into()));
    }
    Ok(Dataset::new(dims, points)?)
}

fn read_text_body<R: BufRead>(input: R, prefix: &[u8]) -> Result<Dataset> {
    let mut points: Vec<BitVector> = Vec::new();
    let mut dims = None;
    let chained = prefix.chain(input);
    for (i, line) in chained.lines().enumerate() {
        let line = line.map_err(|e| CliError::Data(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let p: BitVector = line
            .parse()
            .map_err(|_| CliError::Data(format!("line {}: expected only 0 and 1", i + 1)))?;
        match dims {
            None => dims = Some(p.dims()),
            Some(d) if d != p.dims() => {
                return Err(CliError::Data(format!(
                    "line {}: length {} differs from {d}",
                    i + 1,
                    p.dims()
                )))
            }
            _ => {}
        }
        points.push(p);
    }
    let dims = dims.ok_or_else(|| CliError::Data("text dataset has no rows".into()))?;
    Ok(Dataset::new(dims, points)?)
}

/// Reads either format from a stream.
pub fn read_dataset_from<R: BufRead>(mut input: R) -> Result<Dataset> {
    let mut magic = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        let k = input
            .read(&mut magic[got..])
            .map_err(|e| CliError::Data(e.to_string()))?;
        if k == 0 {
            break;
        }
        got += k;
    }
    if got == 4 && &magic == MAGIC {
        read_binary_body(&mut input)
    } else {
        read_text_body(input, &magic[..got])
    }
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(CliError::io(path))?;
    read_dataset_from(BufReader::new(file)).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut out = BufWriter::new(file);
    match DatasetFormat::for_path(path) {
        DatasetFormat::Binary => write_binary(&mut out, data),
        DatasetFormat::Text => write_text(&mut out, data),
    }
    .and_then(|_| out.flush())
    .map_err(CliError::io(path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TruthRow {
    pub query_id: u32,
    pub point_id: u32,
    pub distance: u32,
}

/// Neighbor lists per query, each sorted by point id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    rows: Vec<TruthRow>,
    queries: usize,
}

impl GroundTruth {
    pub fn new(mut rows: Vec<TruthRow>, queries: usize) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.query_id as usize >= queries) {
            return Err(CliError::Data(format!(
                "ground truth names query {} but there are {queries}",
                r.query_id
            )));
        }
        rows.sort_unstable();
        Ok(GroundTruth { rows, queries })
    }

    pub fn rows(&self) -> &[TruthRow] {
        &self.rows
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    /// Ids within `r` of each query.
    pub fn near_sets(&self, r: usize) -> Vec<Vec<u32>> {
        let mut sets = vec![Vec::new(); self.queries];
        for row in self.rows.iter().filter(|row| row.distance as usize <= r) {
            sets[row.query_id as usize].push(row.point_id);
        }
        sets
    }

    /// Largest radius the rows are complete for, if recorded.
    pub fn max_distance(&self) -> Option<u32> {
        self.rows.iter().map(|r| r.distance).max()
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(CliError::io(path))?;
    let mut r = csv::Reader::from_reader(BufReader::new(file));
    let rows = r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    Ok(rows)
}

pub fn read_truth(path: &Path, queries: usize) -> Result<GroundTruth> {
    GroundTruth::new(read_csv(path)?, queries)
}

/// One query's costs and quality, averaged over repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub query_id: u32,
    pub method: String,
    pub r: u32,
    pub collisions: f64,
    pub candidates: f64,
    pub found: f64,
    pub true_near: u64,
    pub precision: f64,
    pub recall: f64,
    pub time_s1_us: f64,
    pub time_s2_us: f64,
    pub time_s3_us: f64,
}

/// Distance histogram bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistRow {
    pub distance: u32,
    pub count: u64,
}
