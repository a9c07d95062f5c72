//! Small helpers for the on-disk artifact layout: raw little-endian f64
//! arrays with JSON shape sidecars, and pretty JSON files.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
}

pub fn f64s_to_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn write_f64le(path: &Path, values: &[f64]) -> Result<()> {
    fs::write(path, f64s_to_bytes(values)).map_err(|e| Error::io(path, e))
}

pub fn read_f64le(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::artifact(path, "length is not a multiple of 8 bytes"));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Read a row-major matrix and check it against its shape.
pub fn read_matrix(path: &Path, shape: Shape) -> Result<Vec<f64>> {
    let values = read_f64le(path)?;
    if values.len() != shape.rows * shape.cols {
        return Err(Error::artifact(
            path,
            format!(
                "expected {}x{} = {} values, found {}",
                shape.rows,
                shape.cols,
                shape.rows * shape.cols,
                values.len()
            ),
        ));
    }
    Ok(values)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::artifact(path, e.to_string()))
}

pub fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}
