//! Binary field dumps.
//!
//! Layout (all little-endian):
//!
//! | offset | size | content                              |
//! |--------|------|--------------------------------------|
//! | 0      | 4    | magic `SGFF`                         |
//! | 4      | 4    | u32 format version (1)               |
//! | 8      | 4    | u32 dimension d                      |
//! | 12     | 4    | u32 cutoff n                         |
//! | 16     | 8    | f64 regularity s                     |
//! | 24     | 8    | u64 master seed                      |
//! | 32     | 8    | u64 sample index                     |
//! | 40     | 16·L | (Re, Im) f64 pairs, L = (2n+1)^d     |
//!
//! Coefficients follow lexicographic order of k over [−n, n]^d with the first
//! component most significant.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::FourierField;
use crate::error::{Error, Result};

pub const FIELD_DUMP_MAGIC: [u8; 4] = *b"SGFF";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDumpHeader {
    pub d: usize,
    pub n: usize,
    pub s: f64,
    pub seed: u64,
    pub index: u64,
}

fn io_err(e: std::io::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn write_field_dump(
    mut w: impl Write,
    u: &FourierField,
    s: f64,
    seed: u64,
    index: u64,
) -> Result<()> {
    let mut bytes = Vec::with_capacity(40 + 16 * u.coeffs().len());
    bytes.extend_from_slice(&FIELD_DUMP_MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(u.d() as u32).to_le_bytes());
    bytes.extend_from_slice(&(u.n() as u32).to_le_bytes());
    bytes.extend_from_slice(&s.to_le_bytes());
    bytes.extend_from_slice(&seed.to_le_bytes());
    bytes.extend_from_slice(&index.to_le_bytes());
    for c in u.coeffs() {
        bytes.extend_from_slice(&c.re.to_le_bytes());
        bytes.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&bytes).map_err(io_err)
}

pub fn read_field_dump(mut r: impl Read) -> Result<(FieldDumpHeader, FourierField)> {
    let mut head = [0u8; 40];
    r.read_exact(&mut head).map_err(io_err)?;
    if head[0..4] != FIELD_DUMP_MAGIC {
        return Err(Error::Parse("not a field dump (bad magic)".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(head[i..i + 4].try_into().unwrap());
    let u64_at = |i: usize| u64::from_le_bytes(head[i..i + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::Parse(format!("unsupported dump version {version}")));
    }
    let header = FieldDumpHeader {
        d: u32_at(8) as usize,
        n: u32_at(12) as usize,
        s: f64::from_bits(u64_at(16)),
        seed: u64_at(24),
        index: u64_at(32),
    };
    let shape = super::FieldShape::new(header.d, header.n)?;
    let mut body = vec![0u8; 16 * shape.len()];
    r.read_exact(&mut body).map_err(io_err)?;
    let coeffs = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Ok((header, FourierField::from_coeffs(header.d, header.n, coeffs)?))
}
