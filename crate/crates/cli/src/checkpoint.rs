//! Binary checkpoints.
//!
//! Layout, all little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `IPC1` |
//! | 4     | `u32` version, currently 1 |
//! | 12    | `u32` nx, ny, nz |
//! | 24    | `f64` L, Ra, time |
//! | 16·nx·ny·nz | `(f64 re, f64 im)` per coefficient, k3 fastest, then k2, then k1, FFT index order |

use std::path::Path;

use ipconv::{Complex64, Grid, PhysParams, SimState, SpectralError, SpectralField};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"IPC1";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 12 + 24;
/// Largest Hermitian defect accepted on load.
pub const HERMITIAN_LOAD_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:?}, expected \"IPC1\"")]
    BadMagic([u8; 4]),
    #[error("unsupported checkpoint version {0}, expected {VERSION}")]
    Version(u32),
    #[error("truncated checkpoint: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("checkpoint has {actual} bytes, expected {expected}")]
    TrailingBytes { expected: usize, actual: usize },
    #[error("invalid header: {0}")]
    Header(String),
    #[error("Hermitian symmetry violated: defect {0:e} exceeds {HERMITIAN_LOAD_TOL:e}")]
    NotHermitian(f64),
    #[error("invalid payload: {0}")]
    Payload(SpectralError),
    #[error("non-finite coefficient at payload index {0}")]
    NonFinite(usize),
}

pub fn encode(state: &SimState) -> Vec<u8> {
    let grid = state.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * grid.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for n in grid.dims() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for v in [grid.length(), state.params.rayleigh(), state.time] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    // the coefficient cube is already stored k3-fastest
    for c in state.theta.coeffs() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

/// Header fields without the payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub version: u32,
    pub dims: [usize; 3],
    pub length: f64,
    pub rayleigh: f64,
    pub time: f64,
}

pub fn decode_header(bytes: &[u8]) -> Result<Header, CheckpointError> {
    if bytes.len() >= 4 && bytes[..4] != MAGIC {
        return Err(CheckpointError::BadMagic(bytes[..4].try_into().expect("4 bytes")));
    }
    if bytes.len() < HEADER_LEN {
        return Err(CheckpointError::Truncated { expected: HEADER_LEN, actual: bytes.len() });
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let dims = [u32_at(bytes, 8), u32_at(bytes, 12), u32_at(bytes, 16)].map(|n| n as usize);
    Ok(Header { version, dims, length: f64_at(bytes, 20), rayleigh: f64_at(bytes, 28), time: f64_at(bytes, 36) })
}

/// Parses a checkpoint. Besides the format itself this checks the band limit,
/// Hermitian symmetry and the absence of horizontal-mean content.
pub fn decode(bytes: &[u8]) -> Result<SimState, CheckpointError> {
    let header = decode_header(bytes)?;
    let [nx, ny, nz] = header.dims;
    let grid = Grid::new(nx, ny, nz, header.length).map_err(|e| CheckpointError::Header(e.to_string()))?;
    let params = PhysParams::new(header.rayleigh, header.length).map_err(|e| CheckpointError::Header(e.to_string()))?;
    if !header.time.is_finite() {
        return Err(CheckpointError::Header(format!("time {} is not finite", header.time)));
    }
    let expected = HEADER_LEN + 16 * grid.len();
    if bytes.len() < expected {
        return Err(CheckpointError::Truncated { expected, actual: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(CheckpointError::TrailingBytes { expected, actual: bytes.len() });
    }
    let coeffs: Vec<Complex64> = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8)))
        .collect();
    if let Some(i) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(CheckpointError::NonFinite(i));
    }
    let theta = SpectralField::from_coeffs_within(&grid, coeffs, HERMITIAN_LOAD_TOL).map_err(|e| match e {
        SpectralError::NotHermitian(d) => CheckpointError::NotHermitian(d),
        other => CheckpointError::Payload(other),
    })?;
    let mut state = SimState::new(theta, params).map_err(|e| match e {
        ipconv::EvolutionError::Spectral(s) => CheckpointError::Payload(s),
        other => CheckpointError::Header(other.to_string()),
    })?;
    state.time = header.time;
    Ok(state)
}

pub fn write_checkpoint(state: &SimState, path: &Path) -> Result<(), CheckpointError> {
    std::fs::write(path, encode(state))?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<SimState, CheckpointError> {
    decode(&std::fs::read(path)?)
}
