//! Binary state snapshots.
//!
//! A snapshot is one UTF-8 header line of `key=value` pairs, e.g.
//!
//! ```text
//! elreg-snapshot dim=2 n_modes=32 length=6.283185307179586 t=0.5 fields=u:vector,d:vector endian=little
//! ```
//!
//! followed by the physical-space values of `u` then `d` as little-endian
//! `f64`, component by component, each component in grid order.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use elreg_core::dynamics::SimState;
use elreg_core::spectral::{Grid, Rank, SpectralField};

use crate::FormatError;

const MAGIC: &str = "elreg-snapshot";
const FIELDS: &str = "u:vector,d:vector";

pub fn encode_snapshot(state: &SimState) -> Vec<u8> {
    let g = state.grid();
    let mut out = format!(
        "{MAGIC} dim={} n_modes={} length={:e} t={:e} fields={FIELDS} endian=little\n",
        g.dim(),
        g.n_modes(),
        g.length(),
        state.t
    )
    .into_bytes();
    for field in [&state.u, &state.d] {
        for v in field.to_physical() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<SimState, FormatError> {
    let bad = |m: String| FormatError::Snapshot(m);
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8".into()))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(bad(format!("header must start with `{MAGIC}`")));
    }
    let mut kv = HashMap::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| bad(format!("header token `{tok}` is not key=value")))?;
        kv.insert(k, v);
    }
    match kv.get("endian") {
        Some(&"little") => {}
        Some(e) => return Err(bad(format!("unsupported endianness `{e}`"))),
        None => return Err(bad("header lacks the endian marker".into())),
    }
    if kv.get("fields") != Some(&FIELDS) {
        return Err(bad(format!("fields must be `{FIELDS}`")));
    }
    let num = |key: &str| -> Result<f64, FormatError> {
        kv.get(key)
            .ok_or_else(|| bad(format!("header lacks `{key}`")))?
            .parse::<f64>()
            .map_err(|_| bad(format!("`{key}` is not a number")))
    };
    let int = |key: &str| -> Result<usize, FormatError> {
        kv.get(key)
            .ok_or_else(|| bad(format!("header lacks `{key}`")))?
            .parse::<usize>()
            .map_err(|_| bad(format!("`{key}` is not a non-negative integer")))
    };
    let (dim, n, length, t) = (int("dim")?, int("n_modes")?, num("length")?, num("t")?);
    let grid = Grid::new(dim, n, length)?;

    let per_field = dim * grid.mode_count();
    let payload = &bytes[nl + 1..];
    let expected = 2 * per_field * 8;
    if payload.len() != expected {
        return Err(FormatError::SizeMismatch {
            expected,
            found: payload.len(),
        });
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let u = SpectralField::from_physical(&grid, Rank::Vector, &values[..per_field])?;
    let d = SpectralField::from_physical(&grid, Rank::Vector, &values[per_field..])?;
    Ok(SimState::new(u, d, t)?)
}

pub fn write_snapshot(path: &Path, state: &SimState) -> Result<(), FormatError> {
    let mut f = fs::File::create(path).map_err(|e| FormatError::io(path, e))?;
    f.write_all(&encode_snapshot(state)).map_err(|e| FormatError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<SimState, FormatError> {
    let bytes = fs::read(path).map_err(|e| FormatError::io(path, e))?;
    decode_snapshot(&bytes)
}
