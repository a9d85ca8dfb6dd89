//! Graph data model: node sets, interpolated selection edges, the two
//! edge-weight normalizations, replicate padding and cluster pooling.
//!
//! An edge `(src, dst, selection, weight)` reads the features of `src`
//! into the `selection` tap of `dst`. Selection convolution therefore
//! computes, for every node `dst`,
//! `out[dst] = sum_m sum_{e: dst, m} w_e * x[src_e] * W_m`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::geom::{norm, Vec2, Vec3};
use crate::interp::Selection;

/// Canonical selection order tag stored with serialized pyramids.
pub const SELECTION_ORDER: &str = "C,E,NE,N,NW,W,SW,S,SE";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NodeSet {
    pub positions: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub uvs: Option<Vec<Vec2>>,
    pub source_pixel: Option<Vec<[u32; 2]>>,
}

impl NodeSet {
    /// Nodes on the unit sphere; the normal of each node is its position.
    pub fn on_sphere(points: &[Vec3]) -> Self {
        NodeSet {
            positions: points.to_vec(),
            normals: points.to_vec(),
            uvs: None,
            source_pixel: None,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        if self.normals.len() != n
            || self.uvs.as_ref().is_some_and(|u| u.len() != n)
            || self.source_pixel.as_ref().is_some_and(|s| s.len() != n)
        {
            return Err(Error::Shape("node attribute arrays differ in length".into()));
        }
        if let Some(i) = self.normals.iter().position(|&v| (norm(v) - 1.0).abs() > 1e-6) {
            return Err(Error::Shape(format!("normal {i} is not unit length")));
        }
        Ok(())
    }
}

/// Flat edge list; one entry per (geometric edge, selection) pair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SelectionEdges {
    pub src: Vec<u32>,
    pub dst: Vec<u32>,
    pub selection: Vec<u8>,
    pub weight: Vec<f64>,
}

impl SelectionEdges {
    pub fn with_capacity(n: usize) -> Self {
        SelectionEdges {
            src: Vec::with_capacity(n),
            dst: Vec::with_capacity(n),
            selection: Vec::with_capacity(n),
            weight: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, src: usize, dst: usize, selection: Selection, weight: f64) {
        self.src.push(src as u32);
        self.dst.push(dst as u32);
        self.selection.push(selection as u8);
        self.weight.push(weight);
    }

    pub fn len(&self) -> usize {
        self.src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        (0..self.len()).map(move |i| {
            (
                self.src[i] as usize,
                self.dst[i] as usize,
                self.selection[i] as usize,
                self.weight[i],
            )
        })
    }

    pub fn validate(&self, node_count: usize) -> Result<()> {
        let n = self.src.len();
        if self.dst.len() != n || self.selection.len() != n || self.weight.len() != n {
            return Err(Error::Shape("edge arrays differ in length".into()));
        }
        for (i, (s, d, m, w)) in self.iter().enumerate() {
            if s >= node_count || d >= node_count {
                return Err(Error::Shape(format!("edge {i} references node out of range")));
            }
            if m >= Selection::COUNT {
                return Err(Error::Shape(format!("edge {i} has selection {m}")));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Shape(format!("edge {i} has weight {w}")));
            }
        }
        Ok(())
    }

    /// Keeps entries for which `keep(index)` holds, preserving order.
    fn retain_indices(&self, keep: impl Fn(usize) -> bool) -> SelectionEdges {
        let mut out = SelectionEdges::with_capacity(self.len());
        for i in (0..self.len()).filter(|&i| keep(i)) {
            out.src.push(self.src[i]);
            out.dst.push(self.dst[i]);
            out.selection.push(self.selection[i]);
            out.weight.push(self.weight[i]);
        }
        out
    }
}

fn pair_key(a: u32, b: u32) -> u64 {
    (u64::from(a) << 32) | u64::from(b)
}

/// Divides every entry by the total of its group, summing in edge order.
/// Exact-zero entries are removed from the output.
fn normalize_groups(
    edges: &SelectionEdges,
    key: impl Fn(usize) -> u64,
    describe: impl Fn(u64) -> String,
) -> Result<SelectionEdges> {
    let mut totals: HashMap<u64, f64> = HashMap::with_capacity(edges.len());
    let mut first_seen: Vec<u64> = Vec::new();
    for i in 0..edges.len() {
        let k = key(i);
        let slot = totals.entry(k).or_insert_with(|| {
            first_seen.push(k);
            0.0
        });
        *slot += edges.weight[i];
    }
    if let Some(&k) = first_seen.iter().find(|k| !(totals[k] > 0.0)) {
        return Err(Error::ZeroGroup { group: describe(k) });
    }
    let mut out = edges.retain_indices(|i| edges.weight[i] != 0.0);
    let mut j = 0;
    for i in 0..edges.len() {
        if edges.weight[i] != 0.0 {
            let total = totals[&key(i)];
            if total != 1.0 {
                out.weight[j] = edges.weight[i] / total;
            }
            j += 1;
        }
    }
    Ok(out)
}

/// Makes the interpolation weights of every `(src, dst)` pair sum to one.
pub fn normalize_interpolation(edges: &SelectionEdges) -> Result<SelectionEdges> {
    normalize_groups(
        edges,
        |i| pair_key(edges.src[i], edges.dst[i]),
        |k| format!("(src {}, dst {})", k >> 32, k & 0xffff_ffff),
    )
}

/// Makes the weights of every `(dst, selection)` group sum to one, so each
/// selection tap aggregates a convex average of its incoming features.
pub fn normalize_rows(edges: &SelectionEdges) -> Result<SelectionEdges> {
    normalize_groups(
        edges,
        |i| pair_key(edges.dst[i], u32::from(edges.selection[i])),
        |k| format!("(dst {}, selection {})", k >> 32, k & 0xffff_ffff),
    )
}

/// Per node, which selections have at least one incoming entry.
pub fn selection_coverage(edges: &SelectionEdges, node_count: usize) -> Vec<[bool; 9]> {
    let mut present = vec![[false; 9]; node_count];
    for (_, d, m, _) in edges.iter() {
        present[d][m] = true;
    }
    present
}

/// Appends a unit self-edge `(i, i, m)` for every node `i` and selection
/// `m` that has no incoming entry. Existing entries are untouched.
pub fn add_replicate_padding(edges: &SelectionEdges, node_count: usize) -> SelectionEdges {
    let present = selection_coverage(edges, node_count);
    let mut out = edges.clone();
    for (i, row) in present.iter().enumerate() {
        for sel in Selection::ALL {
            if !row[sel.index()] {
                out.push(i, i, sel, 1.0);
            }
        }
    }
    out
}

/// Maps every fine node to a coarse node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub parent: Vec<u32>,
    pub coarse_count: usize,
}

impl ClusterAssignment {
    pub fn new(parent: Vec<u32>, coarse_count: usize) -> Result<Self> {
        if let Some(&p) = parent.iter().find(|&&p| p as usize >= coarse_count) {
            return Err(Error::Shape(format!(
                "parent {p} out of range for {coarse_count} coarse nodes"
            )));
        }
        Ok(ClusterAssignment {
            parent,
            coarse_count,
        })
    }

    pub fn identity(n: usize) -> Self {
        ClusterAssignment {
            parent: (0..n as u32).collect(),
            coarse_count: n,
        }
    }

    pub fn fine_count(&self) -> usize {
        self.parent.len()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.coarse_count];
        for &p in &self.parent {
            sizes[p as usize] += 1;
        }
        sizes
    }

    pub fn empty_clusters(&self) -> usize {
        self.cluster_sizes().iter().filter(|&&s| s == 0).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolMode {
    #[default]
    Mean,
    Max,
}

/// Aggregates fine rows into their clusters. Empty clusters yield zero rows.
pub fn pool(
    features: &FeatureMatrix,
    assignment: &ClusterAssignment,
    mode: PoolMode,
) -> Result<FeatureMatrix> {
    if features.rows() != assignment.fine_count() {
        return Err(Error::Shape(format!(
            "pool: {} feature rows for {} fine nodes",
            features.rows(),
            assignment.fine_count()
        )));
    }
    let cols = features.cols();
    let mut out = FeatureMatrix::zeros(assignment.coarse_count, cols);
    let mut counts = vec![0usize; assignment.coarse_count];
    for (i, &p) in assignment.parent.iter().enumerate() {
        let p = p as usize;
        let src = features.row(i);
        let dst = out.row_mut(p);
        match mode {
            PoolMode::Mean => dst.iter_mut().zip(src).for_each(|(d, s)| *d += s),
            PoolMode::Max => {
                if counts[p] == 0 {
                    dst.copy_from_slice(src);
                } else {
                    dst.iter_mut().zip(src).for_each(|(d, &s)| *d = d.max(s));
                }
            }
        }
        counts[p] += 1;
    }
    let empty = counts.iter().filter(|&&c| c == 0).count();
    if empty > 0 {
        log::warn!("pooling into {empty} empty clusters; their rows are zero");
    }
    if mode == PoolMode::Mean {
        for (p, &c) in counts.iter().enumerate() {
            if c > 1 {
                let inv = c as f64;
                out.row_mut(p).iter_mut().for_each(|v| *v /= inv);
            }
        }
    }
    Ok(out)
}

/// Copies each coarse row back to all of its fine members.
pub fn unpool(features: &FeatureMatrix, assignment: &ClusterAssignment) -> Result<FeatureMatrix> {
    if features.rows() != assignment.coarse_count {
        return Err(Error::Shape(format!(
            "unpool: {} feature rows for {} coarse nodes",
            features.rows(),
            assignment.coarse_count
        )));
    }
    let cols = features.cols();
    let mut out = FeatureMatrix::zeros(assignment.fine_count(), cols);
    for (i, &p) in assignment.parent.iter().enumerate() {
        out.row_mut(i).copy_from_slice(features.row(p as usize));
    }
    Ok(out)
}

/// One resolution of a pyramid.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphLevel {
    pub nodes: NodeSet,
    pub edges: SelectionEdges,
    /// Expected node spacing used for barycentric weights and the
    /// coincidence threshold.
    pub spacing: f64,
    /// Number of replicate-padding self-edges appended for selections 1..=8.
    pub padded: usize,
}

impl GraphLevel {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Mean number of distinct source nodes per destination, ignoring self-edges.
    pub fn mean_degree(&self) -> f64 {
        let mut pairs: Vec<u64> = self
            .edges
            .iter()
            .filter(|(s, d, _, _)| s != d)
            .map(|(s, d, _, _)| pair_key(d as u32, s as u32))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs.len() as f64 / self.node_count().max(1) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphPyramid {
    pub levels: Vec<GraphLevel>,
    /// `assignments[l]` maps level `l` onto level `l + 1`.
    pub assignments: Vec<ClusterAssignment>,
}

impl GraphPyramid {
    pub fn new(levels: Vec<GraphLevel>, assignments: Vec<ClusterAssignment>) -> Result<Self> {
        let p = GraphPyramid {
            levels,
            assignments,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::Shape("pyramid has no levels".into()));
        }
        if self.assignments.len() + 1 != self.levels.len() {
            return Err(Error::Shape(format!(
                "{} levels need {} assignments, got {}",
                self.levels.len(),
                self.levels.len() - 1,
                self.assignments.len()
            )));
        }
        for (l, level) in self.levels.iter().enumerate() {
            level.nodes.validate()?;
            level.edges.validate(level.node_count())?;
            if l + 1 < self.levels.len() {
                let a = &self.assignments[l];
                let next = self.levels[l + 1].node_count();
                if a.fine_count() != level.node_count() || a.coarse_count != next {
                    return Err(Error::Shape(format!("assignment {l} does not match level sizes")));
                }
                if next >= level.node_count() {
                    return Err(Error::Shape(format!(
                        "level {} has {next} nodes, not fewer than {}",
                        l + 1,
                        level.node_count()
                    )));
                }
            }
        }
        Ok(())
    }
}
