//! Random-hyperplane binarization of real-valued vectors: bit `j` is set
//! when the row's dot product with Gaussian direction `h_j` is non-negative.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use fclsh_core::rng::{stream_rng, Stream};
use fclsh_core::{BitVector, Dataset};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{CliError, Result};

pub struct Hyperplanes {
    dim: usize,
    /// Row-major, one direction per output bit.
    normals: Vec<f64>,
}

impl Hyperplanes {
    pub fn new(dim: usize, bits: usize, seed: u64) -> Result<Self> {
        if bits == 0 || bits > fclsh_core::bitvec::MAX_DIMS {
            return Err(CliError::Usage(format!("bit count {bits} is out of range")));
        }
        if dim == 0 {
            return Err(CliError::Data("input vectors are empty".into()));
        }
        let mut rng = stream_rng(seed, Stream::Hyperplanes, 0);
        let normals = (0..dim * bits).map(|_| rng.sample(StandardNormal)).collect();
        Ok(Hyperplanes { dim, normals })
    }

    pub fn bits(&self) -> usize {
        self.normals.len() / self.dim
    }

    pub fn direction(&self, bit: usize) -> &[f64] {
        &self.normals[bit * self.dim..(bit + 1) * self.dim]
    }

    pub fn encode(&self, row: &[f64]) -> Result<BitVector> {
        if row.len() != self.dim {
            return Err(CliError::Data(format!(
                "row has {} values, expected {}",
                row.len(),
                self.dim
            )));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Data("input contains a non-finite value".into()));
        }
        let bits: Vec<bool> = (0..self.bits())
            .map(|j| {
                let dot: f64 = self.direction(j).iter().zip(row).map(|(a, b)| a * b).sum();
                dot >= 0.0
            })
            .collect();
        Ok(BitVector::from_bits(&bits))
    }
}

pub fn binarize(rows: &[Vec<f64>], bits: usize, seed: u64) -> Result<Dataset> {
    let dim = rows.first().map_or(0, Vec::len);
    let planes = Hyperplanes::new(dim, bits, seed)?;
    let points = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            planes.encode(r).map_err(|e| match e {
                CliError::Data(msg) => CliError::Data(format!("row {i}: {msg}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(bits, points)?)
}

/// Rows of numbers separated by commas or whitespace; `#` starts a comment.
pub fn read_text_vectors<R: BufRead>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| CliError::Data(e.to_string()))?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| CliError::Data(format!("line {}: `{s}` is not a number", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// The `.fvecs` layout: per row a little-endian i32 length then that many
/// little-endian f32 values.
pub fn read_fvecs<R: Read>(mut input: R) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    let mut len_buf = [0u8; 4];
    loop {
        match input.read_exact(&mut len_buf) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(CliError::Data(e.to_string())),
        }
        let len = i32::from_le_bytes(len_buf);
        if len <= 0 {
            return Err(CliError::Data(format!("row {} has length {len}", rows.len())));
        }
        let mut raw = vec![0u8; 4 * len as usize];
        input
            .read_exact(&mut raw)
            .map_err(|_| CliError::Data(format!("row {} is truncated", rows.len())))?;
        rows.push(
            raw.chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect(),
        );
    }
    Ok(rows)
}

pub fn read_vectors(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(CliError::io(path))?;
    let reader = BufReader::new(file);
    if path.extension().and_then(|e| e.to_str()) == Some("fvecs") {
        read_fvecs(reader)
    } else {
        read_text_vectors(reader)
    }
}
