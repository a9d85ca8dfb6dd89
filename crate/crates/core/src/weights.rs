//! Named weight tensors and their on-disk format.
//!
//! Layout: magic `SELWGT\0\0`, u64 manifest length, JSON manifest padded to
//! 8 bytes, then the blob region. Each tensor is little-endian f32 at an
//! 8-byte aligned offset relative to the blob start. The manifest checksum
//! is the CRC32 of the whole blob region.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::container::{pad8, read_header, write_header};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SELWGT\0\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    /// Planar kernel, shape `[3, 3, c_in, c_out]`, rows growing downward.
    Conv3x3,
    /// Shape `[c_in, c_out]`.
    Conv1x1,
    /// Shape `[c_out]`, named `<layer>.bias`.
    Bias,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub kind: LayerKind,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(kind: LayerKind, shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let t = Tensor { kind, shape, data };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let rank_ok = match self.kind {
            LayerKind::Conv3x3 => {
                self.shape.len() == 4 && self.shape[0] == 3 && self.shape[1] == 3
            }
            LayerKind::Conv1x1 => self.shape.len() == 2,
            LayerKind::Bias => self.shape.len() == 1,
        };
        if !rank_ok {
            return Err(Error::Shape(format!(
                "{:?} tensor cannot have shape {:?}; only 3x3 and 1x1 kernels are supported",
                self.kind, self.shape
            )));
        }
        let n: usize = self.shape.iter().product();
        if n != self.data.len() {
            return Err(Error::Shape(format!(
                "shape {:?} needs {n} values, got {}",
                self.shape,
                self.data.len()
            )));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("non-finite weight".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
struct LayerEntry {
    name: String,
    kind: LayerKind,
    shape: Vec<usize>,
    dtype: String,
    offset: u64,
    length: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    checksum: u32,
    layers: Vec<LayerEntry>,
}

/// Ordered collection of named tensors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightStore {
    tensors: Vec<(String, Tensor)>,
}

impl WeightStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces a tensor.
    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) -> Result<()> {
        tensor.validate()?;
        let name = name.into();
        match self.tensors.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = tensor,
            None => self.tensors.push((name, tensor)),
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn bias(&self, layer: &str) -> Option<&Tensor> {
        self.get(&format!("{layer}.bias"))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut blobs = Vec::new();
        let mut layers = Vec::with_capacity(self.tensors.len());
        for (name, t) in &self.tensors {
            let offset = blobs.len() as u64;
            for v in &t.data {
                blobs.extend_from_slice(&v.to_le_bytes());
            }
            layers.push(LayerEntry {
                name: name.clone(),
                kind: t.kind,
                shape: t.shape.clone(),
                dtype: "f32".into(),
                offset,
                length: (t.data.len() * 4) as u64,
            });
            pad8(&mut blobs);
        }
        let manifest = Manifest {
            version: FORMAT_VERSION,
            checksum: crc32fast::hash(&blobs),
            layers,
        };
        let mut out = write_header(MAGIC, &serde_json::to_vec(&manifest)?);
        out.extend_from_slice(&blobs);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (manifest, blobs) = read_header(MAGIC, bytes)?;
        let manifest: Manifest = serde_json::from_slice(manifest)
            .map_err(|e| Error::Format(format!("bad manifest: {e}")))?;
        if manifest.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported version {}",
                manifest.version
            )));
        }
        let mut store = WeightStore::new();
        for l in &manifest.layers {
            if l.dtype != "f32" {
                return Err(Error::Format(format!("{}: unsupported dtype {}", l.name, l.dtype)));
            }
            if l.offset % 8 != 0 || l.length % 4 != 0 {
                return Err(Error::Format(format!("{}: misaligned blob", l.name)));
            }
            let (start, len) = (l.offset as usize, l.length as usize);
            let end = start
                .checked_add(len)
                .filter(|&e| e <= blobs.len())
                .ok_or_else(|| Error::Format(format!("{}: blob runs past end of file", l.name)))?;
            let data = blobs[start..end]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect();
            store.insert(l.name.clone(), Tensor::new(l.kind, l.shape.clone(), data)?)?;
        }
        let actual = crc32fast::hash(blobs);
        if actual != manifest.checksum {
            return Err(Error::Checksum {
                expected: manifest.checksum,
                actual,
            });
        }
        Ok(store)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

pub fn save_weights(store: &WeightStore, path: &Path) -> Result<()> {
    store.save(path)
}

pub fn load_weights(path: &Path) -> Result<WeightStore> {
    WeightStore::load(path)
}
