//! Field serialization.
//!
//! Raw grids: a 32-byte little-endian header (4-byte magic `HCF1` for the
//! complex model or `HCR1` for the real one, `u32` dimension, six `u32` axis
//! sizes padded with zeros) followed by the node values as `f64`, row-major
//! with the last axis fastest. CSV: one row per node with the node's index
//! coordinates and its value.

use std::fmt::Write as _;
use std::sync::Arc;

use super::grid::{GridGeometry, Model, ScalarField, MAX_AXES};
use super::SolverError;

pub const RAW_HEADER_LEN: usize = 32;
const MAGIC_COMPLEX: &[u8; 4] = b"HCF1";
const MAGIC_REAL: &[u8; 4] = b"HCR1";

pub fn write_raw(field: &ScalarField) -> Vec<u8> {
    let geom = field.geometry();
    let (magic, dim) = match geom.model() {
        Model::Complex { n } => (MAGIC_COMPLEX, n),
        Model::Real { d } => (MAGIC_REAL, d),
    };
    let mut out = Vec::with_capacity(RAW_HEADER_LEN + 8 * geom.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    for a in 0..MAX_AXES {
        let size = geom.sizes().get(a).copied().unwrap_or(0) as u32;
        out.extend_from_slice(&size.to_le_bytes());
    }
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], offset: usize) -> u32 {
    u32::from_le_bytes(bytes[offset..offset + 4].try_into().expect("4 bytes"))
}

/// Reads a raw grid, rebuilding its geometry from the header.
pub fn read_raw(bytes: &[u8]) -> Result<ScalarField, SolverError> {
    let bad = |m: &str| SolverError::Format(m.to_string());
    if bytes.len() < RAW_HEADER_LEN {
        return Err(bad("shorter than the 32-byte header"));
    }
    let dim = u32_at(bytes, 4) as usize;
    let model = match &bytes[..4] {
        m if m == MAGIC_COMPLEX => Model::Complex { n: dim },
        m if m == MAGIC_REAL => Model::Real { d: dim },
        _ => return Err(bad("unknown magic")),
    };
    if dim == 0 || model.axes() > MAX_AXES {
        return Err(bad("dimension out of range"));
    }
    let sizes: Vec<usize> = (0..MAX_AXES).map(|a| u32_at(bytes, 8 + 4 * a) as usize).collect();
    let periodic = (0..model.axes()).find(|&a| a != model.dirichlet_axis());
    let resolution = match periodic {
        Some(a) => sizes[a],
        None => sizes[model.dirichlet_axis()].saturating_sub(1),
    };
    let geom = GridGeometry::new(model, resolution)?;
    if geom.sizes() != &sizes[..model.axes()] || sizes[model.axes()..].iter().any(|&s| s != 0) {
        return Err(bad("axis sizes do not describe a model grid"));
    }
    let body = &bytes[RAW_HEADER_LEN..];
    if body.len() != 8 * geom.len() {
        return Err(SolverError::Format(format!(
            "expected {} values, found {} bytes",
            geom.len(),
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    ScalarField::from_values(&geom, values)
}

/// Reads a raw grid that must match `geom`.
pub fn read_raw_on(bytes: &[u8], geom: &Arc<GridGeometry>) -> Result<ScalarField, SolverError> {
    let field = read_raw(bytes)?;
    if field.geometry() != geom {
        return Err(SolverError::Format("raw grid does not match the configured geometry".into()));
    }
    ScalarField::from_values(geom, field.into_values())
}

pub fn field_csv(field: &ScalarField) -> String {
    let geom = field.geometry();
    let dims = geom.axes();
    let mut out = String::new();
    let names: Vec<String> = (0..dims).map(|a| format!("i_{}", geom.axis_name(a))).collect();
    out.push_str(&names.join(","));
    out.push_str(",value\n");
    for (idx, v) in field.values().iter().enumerate() {
        let c = geom.coords(idx);
        for a in 0..dims {
            let _ = write!(out, "{},", c[a]);
        }
        let _ = writeln!(out, "{v:e}");
    }
    out
}
