//! Selection graphs on textured triangle meshes.
//!
//! The surface is sampled uniformly by area. Each sample keeps the normal
//! of its face and its texture coordinate. Graph edges come from 3D nearest
//! neighbours with edges across sharp folds removed, and selections use the
//! same frame and interpolation machinery as the sphere.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::geom::{add, cross, dot, norm, normalize, scale, sub, Vec2, Vec3};
use crate::graph::{GraphLevel, GraphPyramid, NodeSet};
use crate::interp::Interpolation;
use crate::knn::KdTree;
use crate::raster::Image;
use crate::sampling::{assign_nearest, CLUSTER_RATIO};
use crate::sphere::{
    build_level_edges, idw_blend, knn_lists, level_seed, local_frame_with_up,
    mean_nearest_distance, pad_level, LocalFrame,
};

/// Neighbours whose normals differ by more than 60 degrees are not connected.
pub const NORMAL_CULL_DOT: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct MeshSurface {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    /// Per-corner texture coordinates; zeros when the file has none.
    pub face_uvs: Vec<[Vec2; 3]>,
    pub face_normals: Vec<Vec3>,
    pub has_uvs: bool,
}

fn triangle_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    0.5 * norm(cross(sub(b, a), sub(c, a)))
}

impl MeshSurface {
    /// Builds a mesh, computing face normals from the winding.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>, face_uvs: Option<Vec<[Vec2; 3]>>) -> Result<Self> {
        let has_uvs = face_uvs.is_some();
        let face_uvs = face_uvs.unwrap_or_else(|| vec![[[0.0; 2]; 3]; faces.len()]);
        if face_uvs.len() != faces.len() {
            return Err(Error::Shape(format!(
                "{} uv triples for {} faces",
                face_uvs.len(),
                faces.len()
            )));
        }
        if faces.iter().flatten().any(|&i| i as usize >= vertices.len()) {
            return Err(Error::Shape("face index out of range".into()));
        }
        let face_normals = faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| vertices[i as usize]);
                let n = cross(sub(b, a), sub(c, a));
                if norm(n) > 0.0 {
                    normalize(n)
                } else {
                    [0.0, 0.0, 1.0]
                }
            })
            .collect();
        Ok(MeshSurface {
            vertices,
            faces,
            face_uvs,
            face_normals,
            has_uvs,
        })
    }

    pub fn corners(&self, face: usize) -> [Vec3; 3] {
        self.faces[face].map(|i| self.vertices[i as usize])
    }

    pub fn face_areas(&self) -> Vec<f64> {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.corners(f);
                triangle_area(a, b, c)
            })
            .collect()
    }

    pub fn area(&self) -> f64 {
        self.face_areas().iter().sum()
    }

    pub fn bounding_diagonal(&self) -> f64 {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        norm(sub(hi, lo))
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_floats<const N: usize>(parts: &[&str], line: usize, what: &str) -> Result<[f64; N]> {
    if parts.len() < N {
        return Err(parse_err(line, format!("{what} needs {N} numbers")));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .parse()
            .map_err(|_| parse_err(line, format!("bad number {p:?} in {what}")))?;
    }
    Ok(out)
}

/// Resolves a 1-based (or negative, relative) OBJ index.
fn resolve(token: &str, count: usize, line: usize) -> Result<usize> {
    let i: i64 = token
        .parse()
        .map_err(|_| parse_err(line, format!("bad index {token:?}")))?;
    let idx = if i > 0 {
        i - 1
    } else if i < 0 {
        count as i64 + i
    } else {
        -1
    };
    if idx < 0 || idx as usize >= count {
        return Err(parse_err(line, format!("index {i} out of range")));
    }
    Ok(idx as usize)
}

/// Parses the `v`, `vt`, `vn` and `f` records of a Wavefront OBJ file.
///
/// Polygons are fan-triangulated. Other records are ignored. A face's
/// normal comes from its winding, flipped if it disagrees with the
/// average of its `vn` normals.
pub fn parse_obj(text: &str) -> Result<MeshSurface> {
    let mut vertices = Vec::new();
    let mut uvs: Vec<Vec2> = Vec::new();
    let mut normals: Vec<Vec3> = Vec::new();
    let mut faces = Vec::new();
    let mut face_uvs = Vec::new();
    let mut face_vn: Vec<Option<Vec3>> = Vec::new();
    let mut any_missing_uv = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let mut parts = raw.split_whitespace();
        let Some(tag) = parts.next() else { continue };
        let rest: Vec<&str> = parts.collect();
        match tag {
            "v" => vertices.push(parse_floats::<3>(&rest, line, "vertex")?),
            "vt" => uvs.push(parse_floats::<2>(&rest, line, "texture coordinate")?),
            "vn" => normals.push(parse_floats::<3>(&rest, line, "normal")?),
            "f" => {
                if rest.len() < 3 {
                    return Err(parse_err(line, "face needs at least 3 corners"));
                }
                let mut corners = Vec::with_capacity(rest.len());
                for c in &rest {
                    let fields: Vec<&str> = c.split('/').collect();
                    if fields.len() > 3 || fields[0].is_empty() {
                        return Err(parse_err(line, format!("bad face corner {c:?}")));
                    }
                    let v = resolve(fields[0], vertices.len(), line)?;
                    let vt = match fields.get(1) {
                        Some(s) if !s.is_empty() => Some(resolve(s, uvs.len(), line)?),
                        _ => None,
                    };
                    let vn = match fields.get(2) {
                        Some(s) if !s.is_empty() => Some(resolve(s, normals.len(), line)?),
                        Some(_) => return Err(parse_err(line, format!("bad face corner {c:?}"))),
                        None => None,
                    };
                    corners.push((v, vt, vn));
                }
                for k in 1..corners.len() - 1 {
                    let tri = [corners[0], corners[k], corners[k + 1]];
                    faces.push(tri.map(|c| c.0 as u32));
                    if tri.iter().any(|c| c.1.is_none()) {
                        any_missing_uv = true;
                    }
                    face_uvs.push(tri.map(|c| c.1.map_or([0.0, 0.0], |i| uvs[i])));
                    face_vn.push(if tri.iter().all(|c| c.2.is_some()) {
                        Some(tri.iter().fold([0.0; 3], |acc, c| add(acc, normals[c.2.unwrap()])))
                    } else {
                        None
                    });
                }
            }
            _ => {}
        }
    }
    let has_uvs = !faces.is_empty() && !any_missing_uv;
    let mut mesh = MeshSurface::new(vertices, faces, Some(face_uvs))?;
    mesh.has_uvs = has_uvs;
    for (n, vn) in mesh.face_normals.iter_mut().zip(face_vn) {
        if let Some(vn) = vn {
            if dot(*n, vn) < 0.0 {
                *n = scale(*n, -1.0);
            }
        }
    }
    Ok(mesh)
}

/// Writes vertices, per-corner texture coordinates and faces.
pub fn write_obj(mesh: &MeshSurface) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
    }
    if mesh.has_uvs {
        for uv in mesh.face_uvs.iter().flatten() {
            let _ = writeln!(out, "vt {} {}", uv[0], uv[1]);
        }
    }
    for (f, face) in mesh.faces.iter().enumerate() {
        if mesh.has_uvs {
            let t = 3 * f + 1;
            let _ = writeln!(
                out,
                "f {}/{} {}/{} {}/{}",
                face[0] + 1,
                t,
                face[1] + 1,
                t + 1,
                face[2] + 1,
                t + 2
            );
        } else {
            let _ = writeln!(out, "f {} {} {}", face[0] + 1, face[1] + 1, face[2] + 1);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceSample {
    pub position: Vec3,
    pub normal: Vec3,
    pub uv: Option<Vec2>,
    pub face: usize,
}

fn blend2(w: [f64; 3], a: [Vec2; 3]) -> Vec2 {
    [
        w[0] * a[0][0] + w[1] * a[1][0] + w[2] * a[2][0],
        w[0] * a[0][1] + w[1] * a[1][1] + w[2] * a[2][1],
    ]
}

fn blend3(w: [f64; 3], a: [Vec3; 3]) -> Vec3 {
    add(add(scale(a[0], w[0]), scale(a[1], w[1])), scale(a[2], w[2]))
}

/// Sample on `face` at barycentric coordinates `w`.
pub fn surface_point(mesh: &MeshSurface, face: usize, w: [f64; 3]) -> SurfaceSample {
    SurfaceSample {
        position: blend3(w, mesh.corners(face)),
        normal: mesh.face_normals[face],
        uv: mesh.has_uvs.then(|| blend2(w, mesh.face_uvs[face])),
        face,
    }
}

/// `count` points uniformly distributed over the surface area.
pub fn sample_surface(mesh: &MeshSurface, count: usize, seed: u64) -> Result<Vec<SurfaceSample>> {
    if count == 0 {
        return Err(Error::InvalidParam("sample count must be positive".into()));
    }
    let areas = mesh.face_areas();
    let mut cumulative = Vec::with_capacity(areas.len());
    let mut total = 0.0;
    for a in &areas {
        total += a;
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::DegenerateMesh);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let t = rng.gen::<f64>() * total;
            let face = cumulative
                .partition_point(|&c| c <= t)
                .min(areas.len() - 1);
            let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
            let s = r1.sqrt();
            surface_point(mesh, face, [1.0 - s, s * (1.0 - r2), s * r2])
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshGraphOptions {
    pub k: usize,
    pub scheme: Interpolation,
    pub levels: usize,
    /// Up vector for every frame; drawn from the seed when absent.
    pub up: Option<Vec3>,
    pub seed: u64,
}

impl Default for MeshGraphOptions {
    fn default() -> Self {
        MeshGraphOptions {
            k: 8,
            scheme: Interpolation::Angular,
            levels: 1,
            up: None,
            seed: 0,
        }
    }
}

/// Seeded random unit vector.
pub fn random_up(seed: u64) -> Vec3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v: Vec3 = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        if norm(v) > 1e-6 {
            return normalize(v);
        }
    }
}

/// Neighbour lists with fold edges removed, and the spacing estimate.
pub fn culled_neighbors(samples: &[SurfaceSample], k: usize) -> (Vec<Vec<usize>>, f64) {
    let positions: Vec<Vec3> = samples.iter().map(|s| s.position).collect();
    let (mut lists, _) = knn_lists(&positions, k);
    lists.par_iter_mut().enumerate().for_each(|(i, l)| {
        l.retain(|&j| j == i || dot(samples[i].normal, samples[j].normal) >= NORMAL_CULL_DOT)
    });
    let spacing = mean_nearest_distance(&positions, &lists);
    (lists, spacing)
}

/// One mesh level from surface samples.
pub fn build_mesh_level(
    samples: &[SurfaceSample],
    k: usize,
    scheme: Interpolation,
    up: Vec3,
) -> Result<GraphLevel> {
    let positions: Vec<Vec3> = samples.iter().map(|s| s.position).collect();
    let normals: Vec<Vec3> = samples.iter().map(|s| s.normal).collect();
    let (lists, spacing) = culled_neighbors(samples, k);
    let frames: Vec<LocalFrame> = normals.iter().map(|&n| local_frame_with_up(n, up)).collect();
    let edges = build_level_edges(&positions, &frames, &lists, scheme, spacing)?;
    let (edges, padded) = pad_level(&edges, positions.len());
    let uvs = samples.iter().map(|s| s.uv).collect::<Option<Vec<_>>>();
    Ok(GraphLevel {
        nodes: NodeSet {
            positions,
            normals,
            uvs,
            source_pixel: None,
        },
        edges,
        spacing,
        padded,
    })
}

/// Builds a pyramid; coarser levels re-sample the surface with a quarter
/// of the points. Also returns the samples of every level.
pub fn build_mesh_graph(
    mesh: &MeshSurface,
    samples: &[SurfaceSample],
    opts: &MeshGraphOptions,
) -> Result<(GraphPyramid, Vec<Vec<SurfaceSample>>)> {
    if opts.k < 1 || opts.levels < 1 {
        return Err(Error::InvalidParam("k and levels must be at least 1".into()));
    }
    if samples.len() < opts.k + 1 {
        return Err(Error::TooFewPoints {
            needed: opts.k + 1,
            got: samples.len(),
        });
    }
    let up = opts.up.map(normalize).unwrap_or_else(|| random_up(opts.seed));
    let mut sets = vec![samples.to_vec()];
    let mut assignments = Vec::new();
    for l in 1..opts.levels {
        let count = sets[l - 1].len() / CLUSTER_RATIO;
        if count == 0 {
            return Err(Error::TooCoarse(format!("level {l} would have no samples")));
        }
        let coarse = sample_surface(mesh, count, level_seed(opts.seed, l))?;
        let fine: Vec<Vec3> = sets[l - 1].iter().map(|s| s.position).collect();
        let pos: Vec<Vec3> = coarse.iter().map(|s| s.position).collect();
        assignments.push(assign_nearest(&fine, &pos)?);
        sets.push(coarse);
    }
    let levels = sets
        .iter()
        .map(|s| build_mesh_level(s, opts.k, opts.scheme, up))
        .collect::<Result<Vec<_>>>()?;
    Ok((GraphPyramid::new(levels, assignments)?, sets))
}

/// Texture coordinates to continuous pixel coordinates (v points up).
fn uv_to_pixel(uv: Vec2, width: usize, height: usize) -> (f64, f64) {
    (uv[0] * width as f64 - 0.5, (1.0 - uv[1]) * height as f64 - 0.5)
}

/// Bilinear texture fetch at every sample's texture coordinate.
pub fn texture_to_features(texture: &Image, samples: &[SurfaceSample]) -> Result<FeatureMatrix> {
    texture.validate()?;
    let mut out = FeatureMatrix::zeros(samples.len(), texture.channels);
    for (i, s) in samples.iter().enumerate() {
        let uv = s.uv.ok_or(Error::MissingUv)?;
        let (x, y) = uv_to_pixel(uv, texture.width, texture.height);
        texture.bilinear(x, y, false, out.row_mut(i));
    }
    Ok(out)
}

/// Barycentric coordinates of `p` in the 2D triangle `t`.
fn barycentric_2d(p: Vec2, t: [Vec2; 3]) -> Option<[f64; 3]> {
    let d = (t[1][1] - t[2][1]) * (t[0][0] - t[2][0]) + (t[2][0] - t[1][0]) * (t[0][1] - t[2][1]);
    if d.abs() < 1e-18 {
        return None;
    }
    let a = ((t[1][1] - t[2][1]) * (p[0] - t[2][0]) + (t[2][0] - t[1][0]) * (p[1] - t[2][1])) / d;
    let b = ((t[2][1] - t[0][1]) * (p[0] - t[2][0]) + (t[0][0] - t[2][0]) * (p[1] - t[2][1])) / d;
    Some([a, b, 1.0 - a - b])
}

/// Surface point behind every texel, or `None` where no face covers it.
/// Overlapping faces resolve to the lowest face index.
pub fn rasterize_uv(mesh: &MeshSurface, width: usize, height: usize) -> Vec<Option<Vec3>> {
    let mut cover: Vec<Option<Vec3>> = vec![None; width * height];
    if !mesh.has_uvs {
        return cover;
    }
    const INSIDE: f64 = -1e-9;
    for f in 0..mesh.faces.len() {
        let t = mesh.face_uvs[f];
        let px = t.map(|uv| uv_to_pixel(uv, width, height));
        let x0 = px.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let x1 = px.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).ceil();
        let y0 = px.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor().max(0.0) as usize;
        let y1 = px.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil();
        if x1 < 0.0 || y1 < 0.0 {
            continue;
        }
        let x1 = (x1 as usize).min(width - 1);
        let y1 = (y1 as usize).min(height - 1);
        let corners = mesh.corners(f);
        for r in y0..=y1 {
            for c in x0..=x1 {
                if cover[r * width + c].is_some() {
                    continue;
                }
                let uv = [(c as f64 + 0.5) / width as f64, 1.0 - (r as f64 + 0.5) / height as f64];
                if let Some(w) = barycentric_2d(uv, t) {
                    if w.iter().all(|&x| x >= INSIDE) {
                        cover[r * width + c] = Some(blend3(w, corners));
                    }
                }
            }
        }
    }
    cover
}

/// Writes node features into a texture through the UV layout.
///
/// Every covered texel takes an inverse-distance blend of the three
/// samples nearest to its 3D surface point. Uncovered texels keep the
/// value of `original`, or zero without one.
pub fn features_to_texture(
    features: &FeatureMatrix,
    samples: &[SurfaceSample],
    mesh: &MeshSurface,
    width: usize,
    height: usize,
    original: Option<&Image>,
) -> Result<Image> {
    if features.rows() != samples.len() || samples.is_empty() {
        return Err(Error::Shape(format!(
            "{} feature rows for {} samples",
            features.rows(),
            samples.len()
        )));
    }
    let channels = features.cols();
    let mut img = match original {
        Some(o) if o.width == width && o.height == height && o.channels == channels => o.clone(),
        Some(_) => return Err(Error::Shape("original texture does not match output".into())),
        None => Image::new(width, height, channels),
    };
    let positions: Vec<Vec3> = samples.iter().map(|s| s.position).collect();
    let tree = KdTree::new(&positions);
    let cover = rasterize_uv(mesh, width, height);
    img.data
        .par_chunks_mut(channels)
        .zip(cover.par_iter())
        .for_each(|(px, p)| {
            if let Some(p) = p {
                idw_blend(&tree, features, *p, false, px);
            }
        });
    Ok(img)
}
