//! Eigenmodel binary format (little-endian):
//!
//! ```text
//! magic "EGRS" | version u16 = 1 | sample_rate u32 | m u32 | r u32 |
//! k_default u32 | f0_star f64 | mean m*f64 | eigenvalues r*f64 |
//! eigenresiduals r*m*f64 (row-major)
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use super::EigenModel;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"EGRS";
const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4 * 4 + 8;

pub fn write_model(model: &EigenModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (model.m() * (model.r() + 1) + model.r()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&model.sample_rate.to_le_bytes());
    out.extend_from_slice(&(model.m() as u32).to_le_bytes());
    out.extend_from_slice(&(model.r() as u32).to_le_bytes());
    out.extend_from_slice(&(model.k_default() as u32).to_le_bytes());
    out.extend_from_slice(&model.f0_star.to_le_bytes());
    for v in model.mean().iter().chain(model.eigenvalues()).chain(model.basis()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_model(bytes: &[u8]) -> Result<EigenModel> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format("not an eigenmodel file".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format("truncated eigenmodel header".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported eigenmodel version {version} (supported: {VERSION})"
        )));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let sample_rate = u32_at(6);
    let m = u32_at(10) as usize;
    let r = u32_at(14) as usize;
    let k_default = u32_at(18) as usize;
    let f0_star = f64::from_le_bytes(bytes[22..30].try_into().unwrap());

    let count = m
        .checked_mul(r + 1)
        .and_then(|v| v.checked_add(r))
        .ok_or_else(|| Error::Format("eigenmodel dimensions overflow".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != count * 8 {
        return Err(Error::Format(format!(
            "truncated eigenmodel payload: expected {} bytes, found {}",
            count * 8,
            payload.len()
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if values.iter().any(|v| v.is_nan()) || f0_star.is_nan() {
        return Err(Error::Format("NaN in eigenmodel payload".into()));
    }
    let mean = values[..m].to_vec();
    let eigenvalues = values[m..m + r].to_vec();
    let basis = values[m + r..].to_vec();
    EigenModel::from_parts(sample_rate, f0_star, mean, eigenvalues, basis, k_default)
        .map_err(|e| Error::Format(format!("invalid eigenmodel: {e}")))
}

pub fn save_model(model: &EigenModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EigenModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_model(&bytes)
}

/// `k,I(k)` rows for `k = 0..=r`, no header.
pub fn information_rate_csv(model: &EigenModel, mut out: impl Write) -> std::io::Result<()> {
    for k in 0..=model.r() {
        let rate = model.information_rate(k).expect("k within range");
        writeln!(out, "{k},{rate:.12}")?;
    }
    Ok(())
}

/// One eigenresidual waveform as `m` rows of `index,value`, no header.
/// `component` is 0-based.
pub fn write_eigenresidual_csv(model: &EigenModel, component: usize, mut out: impl Write) -> std::io::Result<()> {
    for (j, v) in model.eigenresidual(component).iter().enumerate() {
        writeln!(out, "{j},{v:.12e}")?;
    }
    Ok(())
}
