//! GraphPyramid <-> container file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::container::{Array, Container};
use crate::error::{Error, Result};
use crate::graph::{
    ClusterAssignment, GraphLevel, GraphPyramid, NodeSet, SelectionEdges, SELECTION_ORDER,
};

const KIND: &str = "graph-pyramid";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelMeta {
    nodes: usize,
    edges: usize,
    spacing: f64,
    padded: usize,
    has_uvs: bool,
    has_source_pixel: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PyramidMeta {
    selection_order: String,
    levels: Vec<LevelMeta>,
    coarse_counts: Vec<usize>,
}

fn flatten<const N: usize>(v: &[[f64; N]]) -> Vec<f64> {
    v.iter().flat_map(|p| p.iter().copied()).collect()
}

fn unflatten<const N: usize>(v: Vec<f64>, name: &str) -> Result<Vec<[f64; N]>> {
    if v.len() % N != 0 {
        return Err(Error::Format(format!("{name}: length not a multiple of {N}")));
    }
    Ok(v.chunks_exact(N)
        .map(|c| c.try_into().expect("exact chunk"))
        .collect())
}

impl GraphPyramid {
    pub fn to_container(&self) -> Result<Container> {
        let meta = PyramidMeta {
            selection_order: SELECTION_ORDER.into(),
            levels: self
                .levels
                .iter()
                .map(|l| LevelMeta {
                    nodes: l.node_count(),
                    edges: l.edges.len(),
                    spacing: l.spacing,
                    padded: l.padded,
                    has_uvs: l.nodes.uvs.is_some(),
                    has_source_pixel: l.nodes.source_pixel.is_some(),
                })
                .collect(),
            coarse_counts: self.assignments.iter().map(|a| a.coarse_count).collect(),
        };
        let mut c = Container::new(KIND, serde_json::to_value(meta)?);
        for (i, l) in self.levels.iter().enumerate() {
            let p = format!("level{i}");
            c.push(format!("{p}.positions"), Array::F64(flatten(&l.nodes.positions)));
            c.push(format!("{p}.normals"), Array::F64(flatten(&l.nodes.normals)));
            if let Some(uvs) = &l.nodes.uvs {
                c.push(format!("{p}.uvs"), Array::F64(flatten(uvs)));
            }
            if let Some(px) = &l.nodes.source_pixel {
                c.push(
                    format!("{p}.source_pixel"),
                    Array::U32(px.iter().flat_map(|p| p.iter().copied()).collect()),
                );
            }
            c.push(format!("{p}.edges.src"), Array::U32(l.edges.src.clone()));
            c.push(format!("{p}.edges.dst"), Array::U32(l.edges.dst.clone()));
            c.push(format!("{p}.edges.selection"), Array::U8(l.edges.selection.clone()));
            c.push(format!("{p}.edges.weight"), Array::F64(l.edges.weight.clone()));
        }
        for (i, a) in self.assignments.iter().enumerate() {
            c.push(format!("assign{i}.parent"), Array::U32(a.parent.clone()));
        }
        Ok(c)
    }

    pub fn from_container(mut c: Container) -> Result<Self> {
        if c.kind != KIND {
            return Err(Error::Format(format!("expected {KIND}, found {}", c.kind)));
        }
        let meta: PyramidMeta = serde_json::from_value(c.meta.clone())
            .map_err(|e| Error::Format(format!("pyramid meta: {e}")))?;
        if meta.selection_order != SELECTION_ORDER {
            return Err(Error::Format(format!(
                "unsupported selection order {}",
                meta.selection_order
            )));
        }
        let mut levels = Vec::with_capacity(meta.levels.len());
        for (i, lm) in meta.levels.iter().enumerate() {
            let p = format!("level{i}");
            let positions = unflatten::<3>(c.take_real(&format!("{p}.positions"))?, "positions")?;
            let normals = unflatten::<3>(c.take_real(&format!("{p}.normals"))?, "normals")?;
            let uvs = if lm.has_uvs {
                Some(unflatten::<2>(c.take_real(&format!("{p}.uvs"))?, "uvs")?)
            } else {
                None
            };
            let source_pixel = if lm.has_source_pixel {
                let raw = c.take_u32(&format!("{p}.source_pixel"))?;
                Some(raw.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
            } else {
                None
            };
            let edges = SelectionEdges {
                src: c.take_u32(&format!("{p}.edges.src"))?,
                dst: c.take_u32(&format!("{p}.edges.dst"))?,
                selection: c.take_u8(&format!("{p}.edges.selection"))?,
                weight: c.take_real(&format!("{p}.edges.weight"))?,
            };
            if positions.len() != lm.nodes || edges.len() != lm.edges {
                return Err(Error::Format(format!("level {i} counts disagree with manifest")));
            }
            levels.push(GraphLevel {
                nodes: NodeSet {
                    positions,
                    normals,
                    uvs,
                    source_pixel,
                },
                edges,
                spacing: lm.spacing,
                padded: lm.padded,
            });
        }
        let mut assignments = Vec::new();
        for (i, &coarse) in meta.coarse_counts.iter().enumerate() {
            let parent = c.take_u32(&format!("assign{i}.parent"))?;
            assignments.push(ClusterAssignment::new(parent, coarse)?);
        }
        GraphPyramid::new(levels, assignments).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.to_container()?.write(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_container(Container::read(path)?)
    }
}

const POINTS_KIND: &str = "point-set";

impl crate::sampling::SphericalPointSet {
    pub fn to_container(&self) -> Result<Container> {
        let mut c = Container::new(POINTS_KIND, serde_json::to_value(self.params)?);
        c.push("points", Array::F64(flatten(&self.points)));
        Ok(c)
    }

    pub fn from_container(mut c: Container) -> Result<Self> {
        if c.kind != POINTS_KIND {
            return Err(Error::Format(format!("expected {POINTS_KIND}, got {}", c.kind)));
        }
        let params = serde_json::from_value(c.meta.clone())
            .map_err(|e| Error::Format(format!("bad sampling parameters: {e}")))?;
        let points = unflatten(c.take_real("points")?, "points")?;
        Ok(crate::sampling::SphericalPointSet { points, params })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.to_container()?.write(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_container(Container::read(path)?)
    }
}
