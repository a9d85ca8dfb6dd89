//! Binary container shared by pyramid and point-set files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! 0..8    magic "SELCONV\0"
//! 8..16   u64 manifest length L
//! 16..    manifest JSON (L bytes), zero-padded to a multiple of 8
//!         one blob per manifest array, in manifest order, each
//!         zero-padded to a multiple of 8
//! ```
//!
//! The manifest is
//! `{"format":"selconv-container","version":1,"kind":..,"meta":{..},
//!   "arrays":[{"name":..,"dtype":"u8|u32|f32|f64","byte_length":..}]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SELCONV\0";
const FORMAT: &str = "selconv-container";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Array {
    U8(Vec<u8>),
    U32(Vec<u32>),
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl Array {
    pub fn dtype(&self) -> &'static str {
        match self {
            Array::U8(_) => "u8",
            Array::U32(_) => "u32",
            Array::F32(_) => "f32",
            Array::F64(_) => "f64",
        }
    }

    fn to_bytes(&self) -> Vec<u8> {
        match self {
            Array::U8(v) => v.clone(),
            Array::U32(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
            Array::F32(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
            Array::F64(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        }
    }

    fn from_bytes(dtype: &str, bytes: &[u8]) -> Result<Array> {
        fn chunks<const N: usize>(bytes: &[u8]) -> Result<impl Iterator<Item = [u8; N]> + '_> {
            if bytes.len() % N != 0 {
                return Err(Error::Format(format!(
                    "blob of {} bytes is not a multiple of {N}",
                    bytes.len()
                )));
            }
            Ok(bytes
                .chunks_exact(N)
                .map(|c| c.try_into().expect("exact chunk")))
        }
        Ok(match dtype {
            "u8" => Array::U8(bytes.to_vec()),
            "u32" => Array::U32(chunks::<4>(bytes)?.map(u32::from_le_bytes).collect()),
            "f32" => Array::F32(chunks::<4>(bytes)?.map(f32::from_le_bytes).collect()),
            "f64" => Array::F64(chunks::<8>(bytes)?.map(f64::from_le_bytes).collect()),
            other => return Err(Error::Format(format!("unknown dtype {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrayEntry {
    name: String,
    dtype: String,
    byte_length: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    format: String,
    version: u32,
    kind: String,
    meta: serde_json::Value,
    arrays: Vec<ArrayEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Container {
    pub kind: String,
    pub meta: serde_json::Value,
    pub arrays: Vec<(String, Array)>,
}

pub(crate) fn pad8(buf: &mut Vec<u8>) {
    while buf.len() % 8 != 0 {
        buf.push(0);
    }
}

pub(crate) fn padded_len(n: usize) -> usize {
    n.div_ceil(8) * 8
}

/// Writes `magic`, the manifest length and the padded manifest.
pub(crate) fn write_header(magic: &[u8; 8], manifest: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + padded_len(manifest.len()));
    out.extend_from_slice(magic);
    out.extend_from_slice(&(manifest.len() as u64).to_le_bytes());
    out.extend_from_slice(manifest);
    pad8(&mut out);
    out
}

/// Splits a file into (manifest bytes, blob region).
pub(crate) fn read_header<'a>(magic: &[u8; 8], bytes: &'a [u8]) -> Result<(&'a [u8], &'a [u8])> {
    if bytes.len() < 16 || &bytes[..8] != magic {
        return Err(Error::Format("bad magic".into()));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let end = 16usize
        .checked_add(len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| Error::Format("manifest runs past end of file".into()))?;
    let blob_start = padded_len(end).min(bytes.len());
    Ok((&bytes[16..end], &bytes[blob_start..]))
}

impl Container {
    pub fn new(kind: impl Into<String>, meta: serde_json::Value) -> Self {
        Container {
            kind: kind.into(),
            meta,
            arrays: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, array: Array) {
        self.arrays.push((name.into(), array));
    }

    pub fn get(&self, name: &str) -> Option<&Array> {
        self.arrays.iter().find(|(n, _)| n == name).map(|(_, a)| a)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let blobs: Vec<Vec<u8>> = self.arrays.iter().map(|(_, a)| a.to_bytes()).collect();
        let manifest = Manifest {
            format: FORMAT.into(),
            version: VERSION,
            kind: self.kind.clone(),
            meta: self.meta.clone(),
            arrays: self
                .arrays
                .iter()
                .zip(&blobs)
                .map(|((name, a), b)| ArrayEntry {
                    name: name.clone(),
                    dtype: a.dtype().into(),
                    byte_length: b.len() as u64,
                })
                .collect(),
        };
        let mut out = write_header(MAGIC, &serde_json::to_vec(&manifest)?);
        for b in &blobs {
            out.extend_from_slice(b);
            pad8(&mut out);
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Container> {
        let (manifest, mut blobs) = read_header(MAGIC, bytes)?;
        let manifest: Manifest = serde_json::from_slice(manifest)
            .map_err(|e| Error::Format(format!("manifest: {e}")))?;
        if manifest.format != FORMAT || manifest.version != VERSION {
            return Err(Error::Format(format!(
                "unsupported container {} v{}",
                manifest.format, manifest.version
            )));
        }
        let mut arrays = Vec::with_capacity(manifest.arrays.len());
        for entry in manifest.arrays {
            let len = entry.byte_length as usize;
            if len > blobs.len() {
                return Err(Error::Format(format!("array {} is truncated", entry.name)));
            }
            arrays.push((entry.name, Array::from_bytes(&entry.dtype, &blobs[..len])?));
            blobs = &blobs[padded_len(len).min(blobs.len())..];
        }
        Ok(Container {
            kind: manifest.kind,
            meta: manifest.meta,
            arrays,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Container> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Container::from_bytes(&bytes)
    }

    pub fn take(&mut self, name: &str) -> Result<Array> {
        let pos = self
            .arrays
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::Format(format!("missing array {name}")))?;
        Ok(self.arrays.remove(pos).1)
    }

    pub fn take_u32(&mut self, name: &str) -> Result<Vec<u32>> {
        match self.take(name)? {
            Array::U32(v) => Ok(v),
            other => Err(Error::Format(format!("{name}: expected u32, got {}", other.dtype()))),
        }
    }

    pub fn take_u8(&mut self, name: &str) -> Result<Vec<u8>> {
        match self.take(name)? {
            Array::U8(v) => Ok(v),
            other => Err(Error::Format(format!("{name}: expected u8, got {}", other.dtype()))),
        }
    }

    /// Reads a real array; `f32` data is widened.
    pub fn take_real(&mut self, name: &str) -> Result<Vec<f64>> {
        match self.take(name)? {
            Array::F64(v) => Ok(v),
            Array::F32(v) => Ok(v.into_iter().map(f64::from).collect()),
            other => Err(Error::Format(format!("{name}: expected real, got {}", other.dtype()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_alignment() {
        let mut c = Container::new("test", serde_json::json!({"a": 1}));
        c.push("bytes", Array::U8(vec![1, 2, 3]));
        c.push("ids", Array::U32(vec![7, 8, 9]));
        c.push("x", Array::F64(vec![0.1, -2.5]));
        c.push("y", Array::F32(vec![1.5]));
        let bytes = c.to_bytes().unwrap();
        assert_eq!(bytes.len() % 8, 0);
        assert_eq!(Container::from_bytes(&bytes).unwrap(), c);
    }

    #[test]
    fn truncated_file_is_format_error() {
        let mut c = Container::new("test", serde_json::Value::Null);
        c.push("x", Array::F64(vec![1.0; 10]));
        let bytes = c.to_bytes().unwrap();
        let err = Container::from_bytes(&bytes[..bytes.len() - 16]);
        assert!(matches!(err, Err(Error::Format(_))));
        assert!(Container::from_bytes(b"nonsense").is_err());
    }
}
