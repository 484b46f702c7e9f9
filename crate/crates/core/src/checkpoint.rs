//! Binary checkpoint files.
//!
//! Layout (little-endian): magic `SQGF`, `u32` version (1), `u32 n`,
//! `f64 length`, `f64 gamma`, `f64 time`, then the `n × (n/2 + 1)`
//! half-spectrum coefficients in row-major order as interleaved `(re, im)`
//! `f64` pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Result, SqgError};
use crate::field::SpectralField;
use crate::grid::{Grid, GridSpec};

pub const MAGIC: &[u8; 4] = b"SQGF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8 + 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckpointHeader {
    pub n: u32,
    pub length: f64,
    pub gamma: f64,
    pub time: f64,
}

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub coeffs: Vec<Complex64>,
}

impl Checkpoint {
    pub fn from_field(field: &SpectralField, gamma: f64, time: f64) -> Self {
        let g = field.grid();
        Self {
            header: CheckpointHeader {
                n: g.n() as u32,
                length: g.length(),
                gamma,
                time,
            },
            coeffs: field.coeffs().to_vec(),
        }
    }

    /// Rebuild the field on a grid with the stored `n` and `length`.
    /// The dealias fraction is not part of the format and is supplied here.
    pub fn to_field(&self, dealias_fraction: f64) -> Result<SpectralField> {
        let grid = GridSpec::new(self.header.n as usize, self.header.length)
            .with_dealias_fraction(dealias_fraction)
            .build()?;
        self.to_field_on(&grid)
    }

    pub fn to_field_on(&self, grid: &Arc<Grid>) -> Result<SpectralField> {
        if grid.n() != self.header.n as usize || grid.length() != self.header.length {
            return Err(SqgError::GridMismatch);
        }
        SpectralField::from_coeffs(grid, self.coeffs.clone())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(HEADER_LEN + 16 * self.coeffs.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&self.header.n.to_le_bytes());
        buf.extend_from_slice(&self.header.length.to_le_bytes());
        buf.extend_from_slice(&self.header.gamma.to_le_bytes());
        buf.extend_from_slice(&self.header.time.to_le_bytes());
        for c in &self.coeffs {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
        buf
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.encode())?;
        Ok(())
    }

    pub fn read_header(mut r: impl Read) -> Result<CheckpointHeader> {
        let mut head = [0u8; HEADER_LEN];
        r.read_exact(&mut head)
            .map_err(|e| SqgError::Checkpoint(format!("truncated header: {e}")))?;
        parse_header(&head)
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut head = [0u8; HEADER_LEN];
        r.read_exact(&mut head)
            .map_err(|e| SqgError::Checkpoint(format!("truncated header: {e}")))?;
        let header = parse_header(&head)?;
        let n = header.n as usize;
        let count = n * (n / 2 + 1);
        let mut body = vec![0u8; count * 16];
        r.read_exact(&mut body)
            .map_err(|e| SqgError::Checkpoint(format!("truncated coefficient block: {e}")))?;
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(SqgError::Checkpoint(
                "trailing bytes after coefficients".into(),
            ));
        }
        let coeffs = body
            .chunks_exact(16)
            .map(|c| Complex64::new(f64_le(&c[..8]), f64_le(&c[8..])))
            .collect();
        Ok(Self { header, coeffs })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    /// Largest mode-wise difference between two checkpoints of equal shape.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        if self.header.n != other.header.n || self.header.length != other.header.length {
            return Err(SqgError::GridMismatch);
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }
}

fn f64_le(b: &[u8]) -> f64 {
    f64::from_le_bytes(b.try_into().expect("8-byte slice"))
}

fn parse_header(head: &[u8; HEADER_LEN]) -> Result<CheckpointHeader> {
    if &head[0..4] != MAGIC {
        return Err(SqgError::Checkpoint(format!(
            "bad magic {:?}, expected \"SQGF\"",
            String::from_utf8_lossy(&head[0..4])
        )));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(SqgError::Checkpoint(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let n = u32::from_le_bytes(head[8..12].try_into().unwrap());
    if n < 2 || n % 2 != 0 {
        return Err(SqgError::Checkpoint(format!("invalid resolution n = {n}")));
    }
    Ok(CheckpointHeader {
        n,
        length: f64_le(&head[12..20]),
        gamma: f64_le(&head[20..28]),
        time: f64_le(&head[28..36]),
    })
}
