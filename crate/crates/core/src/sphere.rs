//! Selection graphs on the unit sphere and equirectangular resampling.
//!
//! Each node gets a tangent frame from its normal and a global up vector.
//! Neighbour offsets are rotated into that frame, the normal component is
//! dropped, and the remaining 2D offset is split across kernel selections
//! by [`crate::interp`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::geom::{
    angle_between, cartesian_to_spherical, cross, dot, norm, normalize, sub, Vec2, Vec3,
};
use crate::graph::{
    add_replicate_padding, normalize_interpolation, normalize_rows, GraphLevel, GraphPyramid,
    NodeSet, SelectionEdges,
};
use crate::interp::{assign_selections, Interpolation, InterpolationResult, Selection};
use crate::knn::KdTree;
use crate::raster::Image;
use crate::sampling::{cluster_with, SamplingMethod, SphericalPointSet, CLUSTER_RATIO};

pub type EquirectImage = Image;

pub const DEFAULT_UP: Vec3 = [0.0, 1.0, 0.0];
const FALLBACK_UP: Vec3 = [0.0, 0.0, 1.0];
const DEGENERATE: f64 = 1e-6;

/// Coincidence threshold as a fraction of the expected spacing.
pub const EPSILON_FRACTION: f64 = 0.1;

/// Orthonormal tangent frame; `R` has rows `(x_hat, y_hat, z_hat)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalFrame {
    pub x_hat: Vec3,
    pub y_hat: Vec3,
    pub z_hat: Vec3,
}

impl LocalFrame {
    pub fn rotation(&self) -> [Vec3; 3] {
        [self.x_hat, self.y_hat, self.z_hat]
    }

    /// `R v`.
    pub fn rotate(&self, v: Vec3) -> Vec3 {
        [dot(self.x_hat, v), dot(self.y_hat, v), dot(self.z_hat, v)]
    }

    /// `I_t R v`: the rotated vector with its normal component dropped.
    pub fn project(&self, v: Vec3) -> Vec2 {
        [dot(self.x_hat, v), dot(self.y_hat, v)]
    }
}

/// Tangent frame with the default `+y` up vector.
pub fn local_frame(normal: Vec3) -> LocalFrame {
    local_frame_with_up(normal, DEFAULT_UP)
}

/// Gram-Schmidt frame: `x = normalize(up x z)`, `y = z x x`.
///
/// When `up` is (nearly) parallel to the normal, `+z` is used instead, or
/// `+x` if that is degenerate too.
pub fn local_frame_with_up(normal: Vec3, up: Vec3) -> LocalFrame {
    let z_hat = normalize(normal);
    let mut x = cross(normalize(up), z_hat);
    if norm(x) < DEGENERATE {
        x = cross(FALLBACK_UP, z_hat);
        if norm(x) < DEGENERATE {
            x = cross([1.0, 0.0, 0.0], z_hat);
        }
    }
    let x_hat = normalize(x);
    let y_hat = cross(z_hat, x_hat);
    LocalFrame {
        x_hat,
        y_hat,
        z_hat,
    }
}

/// Selection weights for the edge from `xj` into `xi`.
///
/// Points closer than `EPSILON_FRACTION * spacing` are treated as
/// coincident and map to the center tap.
pub fn spherical_selection(
    xi: Vec3,
    xj: Vec3,
    frame_i: &LocalFrame,
    scheme: Interpolation,
    spacing: f64,
) -> Result<InterpolationResult> {
    let diff = sub(xj, xi);
    if norm(diff) < EPSILON_FRACTION * spacing {
        return Ok(InterpolationResult::single(Selection::Center));
    }
    let p = frame_i.project(diff);
    if p[0].hypot(p[1]) <= f64::EPSILON * norm(diff).max(1.0) {
        // offset along the normal only
        return Ok(InterpolationResult::single(Selection::Center));
    }
    assign_selections(p, scheme, spacing)
}

/// Interpolation weights at or below this are rounding noise from
/// neighbours lying on a selection direction and are dropped.
pub const WEIGHT_SNAP: f64 = 1e-9;

/// Normalized edges for one level from per-node neighbour lists (self
/// included). No padding is added.
pub(crate) fn build_level_edges(
    positions: &[Vec3],
    frames: &[LocalFrame],
    neighbors: &[Vec<usize>],
    scheme: Interpolation,
    spacing: f64,
) -> Result<SelectionEdges> {
    let per_node: Vec<Vec<(usize, usize, Selection, f64)>> = (0..positions.len())
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity(neighbors[i].len() * 3);
            for &j in &neighbors[i] {
                let r = spherical_selection(positions[i], positions[j], &frames[i], scheme, spacing)?;
                for e in r.entries.into_iter().filter(|e| e.weight > WEIGHT_SNAP) {
                    out.push((j, i, e.selection, e.weight));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut edges = SelectionEdges::with_capacity(per_node.iter().map(Vec::len).sum());
    for (s, d, m, w) in per_node.into_iter().flatten() {
        edges.push(s, d, m, w);
    }
    normalize_rows(&normalize_interpolation(&edges)?)
}

/// Adds replicate padding; also returns the number of padding edges for
/// selections other than the center.
pub(crate) fn pad_level(edges: &SelectionEdges, node_count: usize) -> (SelectionEdges, usize) {
    let padded = add_replicate_padding(edges, node_count);
    let count = padded.selection[edges.len()..].iter().filter(|&&m| m != 0).count();
    (padded, count)
}

/// Relative slack under which a candidate counts as tied with the k-th neighbour.
const TIE_TOLERANCE: f64 = 1e-9;

/// `k` nearest neighbours of every point (self first, then by distance)
/// and the mean nearest-neighbour distance.
///
/// Candidates tied with the k-th neighbour are all kept, so symmetric
/// samplings give symmetric neighbourhoods regardless of point order.
pub(crate) fn knn_lists(positions: &[Vec3], k: usize) -> (Vec<Vec<usize>>, f64) {
    let tree = KdTree::new(positions);
    let k = k.min(positions.len().saturating_sub(1));
    let lists: Vec<Vec<usize>> = (0..positions.len())
        .into_par_iter()
        .map(|i| {
            let found: Vec<_> = tree
                .knn(positions[i], 2 * k + 2)
                .into_iter()
                .filter(|n| n.index != i)
                .collect();
            let mut list = Vec::with_capacity(k + 1);
            list.push(i);
            if let Some(kth) = found.get(k.saturating_sub(1)).map(|n| n.dist2) {
                let cutoff = kth * (1.0 + TIE_TOLERANCE) + f64::MIN_POSITIVE;
                list.extend(
                    found
                        .iter()
                        .enumerate()
                        .take_while(|&(r, n)| r < k || n.dist2 <= cutoff)
                        .map(|(_, n)| n.index),
                );
            }
            list
        })
        .collect();
    let spacing = mean_nearest_distance(positions, &lists);
    (lists, spacing)
}

pub(crate) fn mean_nearest_distance(positions: &[Vec3], lists: &[Vec<usize>]) -> f64 {
    let (sum, count) = lists
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.get(1).map(|&j| norm(sub(positions[j], positions[i]))))
        .fold((0.0, 0usize), |(s, c), d| (s + d, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereGraphOptions {
    pub k: usize,
    pub scheme: Interpolation,
    pub levels: usize,
    /// Method used to build coarser levels; defaults to the sampling method.
    pub clustering: Option<SamplingMethod>,
    pub seed: u64,
}

impl Default for SphereGraphOptions {
    fn default() -> Self {
        SphereGraphOptions {
            k: 8,
            scheme: Interpolation::Angular,
            levels: 1,
            clustering: None,
            seed: 0,
        }
    }
}

pub(crate) fn level_seed(seed: u64, level: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(level as u64 + 1)
}

/// One sphere level from a point set.
pub fn build_sphere_level(points: &[Vec3], k: usize, scheme: Interpolation) -> Result<GraphLevel> {
    let (lists, spacing) = knn_lists(points, k);
    let frames: Vec<LocalFrame> = points.iter().map(|&p| local_frame(p)).collect();
    let edges = build_level_edges(points, &frames, &lists, scheme, spacing)?;
    let (edges, padded) = pad_level(&edges, points.len());
    Ok(GraphLevel {
        nodes: NodeSet::on_sphere(points),
        edges,
        spacing,
        padded,
    })
}

/// Builds a pyramid; also returns the point set of every level.
pub fn build_sphere_pyramid(
    points: &SphericalPointSet,
    opts: &SphereGraphOptions,
) -> Result<(GraphPyramid, Vec<SphericalPointSet>)> {
    if opts.k < 1 || opts.levels < 1 {
        return Err(Error::InvalidParam("k and levels must be at least 1".into()));
    }
    if points.len() < opts.k + 1 {
        return Err(Error::TooFewPoints {
            needed: opts.k + 1,
            got: points.len(),
        });
    }
    let mut sets = vec![points.clone()];
    let mut assignments = Vec::new();
    for l in 1..opts.levels {
        let fine = &sets[l - 1];
        let method = opts.clustering.unwrap_or(fine.method());
        let (coarse, a) = cluster_with(fine, method, CLUSTER_RATIO, level_seed(opts.seed, l))?;
        if a.empty_clusters() > 0 {
            log::warn!("level {l}: {} empty clusters", a.empty_clusters());
        }
        sets.push(coarse);
        assignments.push(a);
    }
    let levels = sets
        .iter()
        .map(|s| build_sphere_level(&s.points, opts.k, opts.scheme))
        .collect::<Result<Vec<_>>>()?;
    Ok((GraphPyramid::new(levels, assignments)?, sets))
}

pub fn build_sphere_graph(
    points: &SphericalPointSet,
    opts: &SphereGraphOptions,
) -> Result<GraphPyramid> {
    Ok(build_sphere_pyramid(points, opts)?.0)
}

/// Bilinear lookup of an equirectangular image at each point, wrapping
/// across the `theta = 0` seam and clamping at the poles.
pub fn image_to_features(img: &EquirectImage, points: &[Vec3]) -> Result<FeatureMatrix> {
    img.validate()?;
    let mut out = FeatureMatrix::zeros(points.len(), img.channels);
    out.data_mut()
        .par_chunks_mut(img.channels)
        .zip(points.par_iter())
        .for_each(|(row, &p)| {
            let (theta, phi) = cartesian_to_spherical(p);
            let x = theta / std::f64::consts::TAU * img.width as f64 - 0.5;
            let y = phi / std::f64::consts::PI * img.height as f64 - 0.5;
            img.bilinear(x, y, true, row);
        });
    Ok(out)
}

/// Number of samples blended per output pixel.
pub const RECONSTRUCTION_NEIGHBORS: usize = 3;

/// Inverse-distance blend of the nearest samples at `query`.
pub(crate) fn idw_blend(
    tree: &KdTree,
    features: &FeatureMatrix,
    query: Vec3,
    angular: bool,
    out: &mut [f64],
) {
    let near = tree.knn(query, RECONSTRUCTION_NEIGHBORS);
    out.iter_mut().for_each(|v| *v = 0.0);
    let dist = |i: usize| -> f64 {
        let p = tree.points()[i];
        if angular {
            angle_between(p, query)
        } else {
            norm(sub(p, query))
        }
    };
    if let Some(hit) = near
        .iter()
        .find(|n| near.len() == 1 || dist(n.index) < 1e-12)
    {
        out.copy_from_slice(features.row(hit.index));
        return;
    }
    let mut total = 0.0;
    for n in &near {
        let w = 1.0 / dist(n.index);
        total += w;
        for (o, &v) in out.iter_mut().zip(features.row(n.index)) {
            *o += w * v;
        }
    }
    out.iter_mut().for_each(|v| *v /= total);
}

/// Renders node features back to an equirectangular image by blending the
/// three angularly nearest samples of each pixel direction.
pub fn features_to_image(
    features: &FeatureMatrix,
    points: &[Vec3],
    width: usize,
    height: usize,
) -> Result<EquirectImage> {
    if features.rows() != points.len() || points.is_empty() {
        return Err(Error::Shape(format!(
            "{} feature rows for {} points",
            features.rows(),
            points.len()
        )));
    }
    let tree = KdTree::new(points);
    let channels = features.cols();
    let mut img = Image::new(width, height, channels);
    img.data
        .par_chunks_mut(channels)
        .enumerate()
        .for_each(|(i, px)| {
            let (r, c) = (i / width, i % width);
            let theta = std::f64::consts::TAU * (c as f64 + 0.5) / width as f64;
            let phi = std::f64::consts::PI * (r as f64 + 0.5) / height as f64;
            let dir = crate::geom::spherical_to_cartesian(theta, phi);
            idw_blend(&tree, features, dir, true, px);
        });
    Ok(img)
}

/// Rotates points about the polar (y) axis by `angle`.
pub fn rotate_about_pole(points: &[Vec3], angle: f64) -> Vec<Vec3> {
    let (s, c) = angle.sin_cos();
    points
        .iter()
        .map(|p| {
            // theta -> theta + angle with x = sin(phi)cos(theta), z = -sin(phi)sin(theta)
            [c * p[0] + s * p[2], p[1], -s * p[0] + c * p[2]]
        })
        .collect()
}
