//! Point sets on the unit sphere and the resampling used for clustering.
//!
//! The polar axis is +y: `phi` is measured from +y and `theta` runs around
//! it, see [`crate::geom::spherical_to_cartesian`].

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{angle_between, normalize, spherical_to_cartesian, Vec3};
use crate::graph::ClusterAssignment;
use crate::knn::KdTree;

pub const MAX_ICOSPHERE_SUBDIVISIONS: usize = 8;

/// Coarse levels hold a quarter of the fine points (stride 2 per axis).
pub const CLUSTER_RATIO: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMethod {
    Equirect,
    Random,
    #[serde(alias = "spiral")]
    Fibonacci,
    Icosphere,
    Layering,
}

impl SamplingMethod {
    pub const ALL: [SamplingMethod; 5] = [
        SamplingMethod::Random,
        SamplingMethod::Equirect,
        SamplingMethod::Fibonacci,
        SamplingMethod::Icosphere,
        SamplingMethod::Layering,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplingMethod::Equirect => "equirect",
            SamplingMethod::Random => "random",
            SamplingMethod::Fibonacci => "fibonacci",
            SamplingMethod::Icosphere => "icosphere",
            SamplingMethod::Layering => "layering",
        }
    }
}

impl std::str::FromStr for SamplingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "equirect" | "equirectangular" => SamplingMethod::Equirect,
            "random" => SamplingMethod::Random,
            "fibonacci" | "spiral" => SamplingMethod::Fibonacci,
            "icosphere" => SamplingMethod::Icosphere,
            "layering" => SamplingMethod::Layering,
            other => {
                return Err(Error::InvalidParam(format!("unknown sampling method {other:?}")))
            }
        })
    }
}

impl std::fmt::Display for SamplingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase", deny_unknown_fields)]
pub enum SamplingParams {
    Equirect { width: usize, height: usize },
    Random { count: usize, seed: u64 },
    Fibonacci { count: usize },
    Icosphere { subdivisions: usize },
    Layering { n_phi: usize },
}

impl SamplingParams {
    pub fn method(&self) -> SamplingMethod {
        match self {
            SamplingParams::Equirect { .. } => SamplingMethod::Equirect,
            SamplingParams::Random { .. } => SamplingMethod::Random,
            SamplingParams::Fibonacci { .. } => SamplingMethod::Fibonacci,
            SamplingParams::Icosphere { .. } => SamplingMethod::Icosphere,
            SamplingParams::Layering { .. } => SamplingMethod::Layering,
        }
    }

    pub fn sample(&self) -> Result<SphericalPointSet> {
        match *self {
            SamplingParams::Equirect { width, height } => sample_equirect(width, height),
            SamplingParams::Random { count, seed } => sample_random(count, seed),
            SamplingParams::Fibonacci { count } => sample_fibonacci(count),
            SamplingParams::Icosphere { subdivisions } => sample_icosphere(subdivisions),
            SamplingParams::Layering { n_phi } => sample_layering(n_phi),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphericalPointSet {
    pub points: Vec<Vec3>,
    pub params: SamplingParams,
}

impl SphericalPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn method(&self) -> SamplingMethod {
        self.params.method()
    }
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidParam(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// Rows of the layering sampler as `(phi, points in row)`.
///
/// The per-row count is `round(2 pi sin(phi) / d_theta)`; with
/// `d_theta = pi / n_phi` every row keeps roughly equal spacing in both
/// directions.
pub fn layering_rows(n_phi: usize) -> Vec<(f64, usize)> {
    let n = n_phi as f64;
    let a = PI * PI / (n * n);
    let d = a.sqrt();
    let m_phi = (PI / d).round() as usize;
    let d_phi = PI / m_phi as f64;
    let d_theta = a / d_phi;
    (0..m_phi)
        .map(|m| {
            let phi = PI * (m as f64 + 0.5) / m_phi as f64;
            let m_theta = (TAU * phi.sin() / d_theta).round().max(1.0) as usize;
            (phi, m_theta)
        })
        .collect()
}

pub fn sample_layering(n_phi: usize) -> Result<SphericalPointSet> {
    positive("n_phi", n_phi)?;
    let mut points = Vec::new();
    for (phi, m_theta) in layering_rows(n_phi) {
        for n in 0..m_theta {
            let theta = TAU * n as f64 / m_theta as f64;
            points.push(spherical_to_cartesian(theta, phi));
        }
    }
    Ok(SphericalPointSet {
        points,
        params: SamplingParams::Layering { n_phi },
    })
}

/// Golden-angle spiral with uniform offsets in `cos(phi)`.
pub fn sample_fibonacci(count: usize) -> Result<SphericalPointSet> {
    positive("count", count)?;
    let golden = PI * (3.0 - 5f64.sqrt());
    let n = count as f64;
    let points = (0..count)
        .map(|k| {
            let y = 1.0 - 2.0 * (k as f64 + 0.5) / n;
            let phi = y.clamp(-1.0, 1.0).acos();
            let theta = (golden * k as f64).rem_euclid(TAU);
            spherical_to_cartesian(theta, phi)
        })
        .collect();
    Ok(SphericalPointSet {
        points,
        params: SamplingParams::Fibonacci { count },
    })
}

pub fn sample_equirect(width: usize, height: usize) -> Result<SphericalPointSet> {
    positive("width", width)?;
    positive("height", height)?;
    let mut points = Vec::with_capacity(width * height);
    for r in 0..height {
        let phi = PI * (r as f64 + 0.5) / height as f64;
        for c in 0..width {
            let theta = TAU * (c as f64 + 0.5) / width as f64;
            points.push(spherical_to_cartesian(theta, phi));
        }
    }
    Ok(SphericalPointSet {
        points,
        params: SamplingParams::Equirect { width, height },
    })
}

/// Normalized Gaussian draws from a ChaCha8 stream seeded with `seed`.
pub fn sample_random(count: usize, seed: u64) -> Result<SphericalPointSet> {
    positive("count", count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let v: Vec3 = [
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        ];
        let n = crate::geom::norm(v);
        if n > 1e-12 {
            points.push(crate::geom::scale(v, 1.0 / n));
        }
    }
    Ok(SphericalPointSet {
        points,
        params: SamplingParams::Random { count, seed },
    })
}

/// Triangulated unit icosphere.
#[derive(Clone, Debug)]
pub struct Icosphere {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
}

impl Icosphere {
    pub fn icosahedron() -> Self {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let raw = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ];
        let faces = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        Icosphere {
            vertices: raw.iter().map(|&v| normalize(v)).collect(),
            faces,
        }
    }

    /// Splits every triangle into four; shared midpoints are created once.
    pub fn subdivide(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut mid = |a: u32, b: u32, vertices: &mut Vec<Vec3>| -> u32 {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let (pa, pb) = (vertices[a as usize], vertices[b as usize]);
                vertices.push(normalize([
                    pa[0] + pb[0],
                    pa[1] + pb[1],
                    pa[2] + pb[2],
                ]));
                (vertices.len() - 1) as u32
            })
        };
        let mut faces = Vec::with_capacity(self.faces.len() * 4);
        for &[a, b, c] in &self.faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            faces.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        Icosphere { vertices, faces }
    }

    pub fn new(subdivisions: usize) -> Result<Self> {
        if subdivisions > MAX_ICOSPHERE_SUBDIVISIONS {
            return Err(Error::LimitExceeded {
                what: "icosphere subdivisions",
                value: subdivisions,
                limit: MAX_ICOSPHERE_SUBDIVISIONS,
            });
        }
        let mut mesh = Icosphere::icosahedron();
        for _ in 0..subdivisions {
            mesh = mesh.subdivide();
        }
        Ok(mesh)
    }

    /// Mean great-circle length over all triangle edges.
    pub fn mean_edge_angle(&self) -> f64 {
        let mut total = 0.0;
        for f in &self.faces {
            for k in 0..3 {
                let a = self.vertices[f[k] as usize];
                let b = self.vertices[f[(k + 1) % 3] as usize];
                total += angle_between(a, b);
            }
        }
        total / (3 * self.faces.len()) as f64
    }
}

pub fn sample_icosphere(subdivisions: usize) -> Result<SphericalPointSet> {
    Ok(SphericalPointSet {
        points: Icosphere::new(subdivisions)?.vertices,
        params: SamplingParams::Icosphere { subdivisions },
    })
}

pub fn icosphere_vertex_count(subdivisions: usize) -> usize {
    10 * 4usize.pow(subdivisions as u32) + 2
}

/// Nearest coarse point for every fine point; ties go to the lower index.
pub fn assign_nearest(fine: &[Vec3], coarse: &[Vec3]) -> Result<ClusterAssignment> {
    use rayon::prelude::*;
    if coarse.is_empty() {
        return Err(Error::TooCoarse("no coarse points".into()));
    }
    let tree = KdTree::new(coarse);
    let parent = fine
        .par_iter()
        .map(|&p| tree.nearest(p).expect("non-empty tree").index as u32)
        .collect();
    ClusterAssignment::new(parent, coarse.len())
}

/// Parameters for a coarse set of roughly `target` points generated by
/// `method`.
fn params_for_count(method: SamplingMethod, target: usize, seed: u64) -> Result<SamplingParams> {
    if target == 0 {
        return Err(Error::TooCoarse(format!("{method} clustering of zero points")));
    }
    let t = target as f64;
    Ok(match method {
        SamplingMethod::Random => SamplingParams::Random {
            count: target,
            seed,
        },
        SamplingMethod::Fibonacci => SamplingParams::Fibonacci { count: target },
        SamplingMethod::Equirect => {
            let height = (t / 2.0).sqrt().round().max(1.0) as usize;
            SamplingParams::Equirect {
                width: 2 * height,
                height,
            }
        }
        SamplingMethod::Layering => SamplingParams::Layering {
            n_phi: (PI * t / 4.0).sqrt().round().max(1.0) as usize,
        },
        SamplingMethod::Icosphere => {
            let s = (0..=MAX_ICOSPHERE_SUBDIVISIONS)
                .min_by(|&a, &b| {
                    let da = (icosphere_vertex_count(a) as f64 / t).ln().abs();
                    let db = (icosphere_vertex_count(b) as f64 / t).ln().abs();
                    da.total_cmp(&db)
                })
                .unwrap_or(0);
            SamplingParams::Icosphere { subdivisions: s }
        }
    })
}

/// Coarse sampling for clustering `fine` with `method`.
///
/// When `method` matches the fine set's own method the method-specific
/// rule applies (one fewer icosphere subdivision, half the layering rows,
/// a quarter of the spiral or random points, half the equirect width and
/// height). Otherwise the coarse set targets a quarter of the fine count.
pub fn coarse_params(
    fine: &SphericalPointSet,
    method: SamplingMethod,
    seed: u64,
) -> Result<SamplingParams> {
    let params = match (fine.params, method) {
        (SamplingParams::Icosphere { subdivisions }, SamplingMethod::Icosphere) => {
            if subdivisions == 0 {
                return Err(Error::TooCoarse("icosahedron cannot be coarsened".into()));
            }
            SamplingParams::Icosphere {
                subdivisions: subdivisions - 1,
            }
        }
        (SamplingParams::Layering { n_phi }, SamplingMethod::Layering) => {
            if n_phi / 2 == 0 {
                return Err(Error::TooCoarse("single layering row".into()));
            }
            SamplingParams::Layering { n_phi: n_phi / 2 }
        }
        (SamplingParams::Equirect { width, height }, SamplingMethod::Equirect) => {
            if width / 2 == 0 || height / 2 == 0 {
                return Err(Error::TooCoarse(format!("{width}x{height} equirect")));
            }
            SamplingParams::Equirect {
                width: width / 2,
                height: height / 2,
            }
        }
        _ => params_for_count(method, fine.len() / CLUSTER_RATIO, seed)?,
    };
    Ok(params)
}

/// Resamples `points` at a quarter of the density with its own method and
/// assigns each fine point to its nearest coarse point.
pub fn cluster_resample(
    points: &SphericalPointSet,
    ratio: usize,
) -> Result<(SphericalPointSet, ClusterAssignment)> {
    let seed = match points.params {
        SamplingParams::Random { seed, .. } => seed.wrapping_add(1),
        _ => 0,
    };
    cluster_with(points, points.method(), ratio, seed)
}

/// Like [`cluster_resample`] but with an arbitrary clustering method.
pub fn cluster_with(
    points: &SphericalPointSet,
    method: SamplingMethod,
    ratio: usize,
    seed: u64,
) -> Result<(SphericalPointSet, ClusterAssignment)> {
    if ratio != CLUSTER_RATIO {
        return Err(Error::InvalidParam(format!(
            "cluster ratio must be {CLUSTER_RATIO}, got {ratio}"
        )));
    }
    let coarse = coarse_params(points, method, seed)?.sample()?;
    if coarse.len() >= points.len() {
        return Err(Error::TooCoarse(format!(
            "{method} resampling of {} points gives {} points",
            points.len(),
            coarse.len()
        )));
    }
    let assignment = assign_nearest(&points.points, &coarse.points)?;
    Ok((coarse, assignment))
}

/// Angular resolution of a planar training setup: `delta_theta = fov / n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolutionSpec {
    pub fov: f64,
    pub n: usize,
}

impl ResolutionSpec {
    pub fn new(fov: f64, n: usize) -> Result<Self> {
        if !(fov > 0.0 && fov < PI) || n == 0 {
            return Err(Error::InvalidParam(format!(
                "resolution needs 0 < fov < pi and n >= 1, got fov={fov}, n={n}"
            )));
        }
        Ok(ResolutionSpec { fov, n })
    }

    pub fn delta_theta(&self) -> f64 {
        self.fov / self.n as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolutionMatch {
    pub params: SamplingParams,
    /// Expected spacing of the chosen parameters (radians).
    pub achieved_spacing: f64,
}

/// Sampling parameters whose spacing best matches `delta_theta` radians.
///
/// Icosphere resolutions are discrete; the subdivision level with the
/// closest mean edge angle (in log ratio) is returned along with that
/// angle.
pub fn resolution_for(
    delta_theta: f64,
    method: SamplingMethod,
    seed: u64,
) -> Result<ResolutionMatch> {
    if !(delta_theta > 0.0) || !delta_theta.is_finite() {
        return Err(Error::InvalidParam(format!(
            "delta_theta must be positive, got {delta_theta}"
        )));
    }
    let count = ((4.0 * PI) / (delta_theta * delta_theta)).round().max(1.0) as usize;
    let area_spacing = |n: usize| (4.0 * PI / n as f64).sqrt();
    Ok(match method {
        SamplingMethod::Layering => {
            let n_phi = (PI / delta_theta).round().max(1.0) as usize;
            ResolutionMatch {
                params: SamplingParams::Layering { n_phi },
                achieved_spacing: PI / n_phi as f64,
            }
        }
        SamplingMethod::Fibonacci => ResolutionMatch {
            params: SamplingParams::Fibonacci { count },
            achieved_spacing: area_spacing(count),
        },
        SamplingMethod::Random => ResolutionMatch {
            params: SamplingParams::Random { count, seed },
            achieved_spacing: area_spacing(count),
        },
        SamplingMethod::Equirect => {
            let height = (PI / delta_theta).round().max(1.0) as usize;
            ResolutionMatch {
                params: SamplingParams::Equirect {
                    width: 2 * height,
                    height,
                },
                achieved_spacing: PI / height as f64,
            }
        }
        SamplingMethod::Icosphere => {
            let mut mesh = Icosphere::icosahedron();
            let mut best = (0, mesh.mean_edge_angle());
            for s in 1..=MAX_ICOSPHERE_SUBDIVISIONS {
                if best.1 < delta_theta {
                    break;
                }
                mesh = mesh.subdivide();
                let edge = mesh.mean_edge_angle();
                if (edge / delta_theta).ln().abs() < (best.1 / delta_theta).ln().abs() {
                    best = (s, edge);
                }
            }
            ResolutionMatch {
                params: SamplingParams::Icosphere {
                    subdivisions: best.0,
                },
                achieved_spacing: best.1,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{dot, norm};

    fn all_unit(p: &SphericalPointSet) -> bool {
        p.points.iter().all(|&v| (norm(v) - 1.0).abs() < 1e-6)
    }

    #[test]
    fn layering_single_row() {
        let rows = layering_rows(1);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].0 - PI / 2.0).abs() < 1e-15);
        assert_eq!(rows[0].1, 2);
    }

    #[test]
    fn layering_four_rows() {
        let rows: Vec<usize> = layering_rows(4).iter().map(|r| r.1).collect();
        assert_eq!(rows, vec![3, 7, 7, 3]);
        let p = sample_layering(4).unwrap();
        assert_eq!(p.len(), 20);
        assert!(all_unit(&p));
    }

    #[test]
    fn layering_rows_symmetric() {
        for n in 1..60 {
            let rows = layering_rows(n);
            assert_eq!(rows.len(), n);
            for i in 0..n {
                assert_eq!(rows[i].1, rows[n - 1 - i].1, "n_phi={n}");
            }
        }
    }

    #[test]
    fn fibonacci_small_counts() {
        let p = sample_fibonacci(1).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p.points[0][1].abs() < 1e-12 && all_unit(&p));
        let p = sample_fibonacci(4).unwrap();
        for i in 0..4 {
            for j in 0..i {
                assert!(angle_between(p.points[i], p.points[j]) > 1e-3);
            }
        }
    }

    #[test]
    fn fibonacci_min_separation() {
        let p = sample_fibonacci(1000).unwrap();
        let expected = (4.0 * PI / 1000.0).sqrt();
        let mut min = f64::INFINITY;
        for i in 0..p.len() {
            for j in 0..i {
                min = min.min(angle_between(p.points[i], p.points[j]));
            }
        }
        assert!(min > 0.5 * expected, "min separation {min}");
        assert!(all_unit(&p));
    }

    #[test]
    fn icosphere_counts_and_euler() {
        for s in 0..=4 {
            let m = Icosphere::new(s).unwrap();
            assert_eq!(m.vertices.len(), icosphere_vertex_count(s));
            let mut edges: Vec<(u32, u32)> = m
                .faces
                .iter()
                .flat_map(|f| (0..3).map(move |k| (f[k].min(f[(k + 1) % 3]), f[k].max(f[(k + 1) % 3]))))
                .collect();
            edges.sort_unstable();
            edges.dedup();
            let chi = m.vertices.len() as i64 - edges.len() as i64 + m.faces.len() as i64;
            assert_eq!(chi, 2);
            assert!(m.vertices.iter().all(|&v| (norm(v) - 1.0).abs() < 1e-12));
        }
        assert!(matches!(
            sample_icosphere(9),
            Err(Error::LimitExceeded { .. })
        ));
    }

    #[test]
    fn equirect_layout() {
        let p = sample_equirect(2, 1).unwrap();
        assert_eq!(p.len(), 2);
        assert!((dot(p.points[0], p.points[1]) + 1.0).abs() < 1e-12);
        let p = sample_equirect(4, 2).unwrap();
        assert_eq!(p.len(), 8);
        let phi0 = p.points[0][1].acos();
        let phi1 = p.points[4][1].acos();
        assert!((phi0 - PI / 4.0).abs() < 1e-12 && (phi1 - 3.0 * PI / 4.0).abs() < 1e-12);
        assert_eq!(sample_equirect(7, 5).unwrap().len(), 35);
    }

    #[test]
    fn random_is_reproducible_and_balanced() {
        assert_eq!(sample_random(1, 3).unwrap(), sample_random(1, 3).unwrap());
        let p = sample_random(10_000, 11).unwrap();
        assert!(all_unit(&p));
        let mut mean = [0.0; 3];
        for v in &p.points {
            for k in 0..3 {
                mean[k] += v[k] / p.len() as f64;
            }
        }
        // each coordinate has variance 1/3, so 3 sigma on the mean norm is ~0.03
        assert!(norm(mean) < 0.05, "mean norm {}", norm(mean));
        assert_ne!(sample_random(5, 1).unwrap().points, sample_random(5, 2).unwrap().points);
    }

    #[test]
    fn resample_rules() {
        let ico = sample_icosphere(2).unwrap();
        let (coarse, a) = cluster_resample(&ico, 4).unwrap();
        assert_eq!(coarse.len(), 42);
        assert_eq!(a.fine_count(), 162);
        for (i, &p) in a.parent.iter().enumerate() {
            let brute = crate::knn::knn_brute_force(&coarse.points, ico.points[i], 1)[0].index;
            assert_eq!(p as usize, brute);
        }

        let (coarse, _) = cluster_resample(&sample_layering(8).unwrap(), 4).unwrap();
        assert_eq!(coarse.params, SamplingParams::Layering { n_phi: 4 });

        let (coarse, a) = cluster_resample(&sample_fibonacci(1000).unwrap(), 4).unwrap();
        assert_eq!(coarse.len(), 250);
        let sizes = a.cluster_sizes();
        assert_eq!(sizes.iter().sum::<usize>() as f64 / sizes.len() as f64, 4.0);

        assert!(matches!(
            cluster_resample(&sample_icosphere(0).unwrap(), 4),
            Err(Error::TooCoarse(_))
        ));
        assert!(matches!(
            cluster_resample(&sample_layering(1).unwrap(), 4),
            Err(Error::TooCoarse(_))
        ));
        assert!(cluster_resample(&sample_layering(8).unwrap(), 2).is_err());
    }

    #[test]
    fn resolution_matching() {
        let spec = ResolutionSpec::new(60f64.to_radians(), 240).unwrap();
        assert!((spec.delta_theta() - 0.004363323).abs() < 1e-8);
        let m = resolution_for(spec.delta_theta(), SamplingMethod::Layering, 0).unwrap();
        assert_eq!(m.params, SamplingParams::Layering { n_phi: 720 });
        let m = resolution_for(PI, SamplingMethod::Layering, 0).unwrap();
        assert_eq!(m.params, SamplingParams::Layering { n_phi: 1 });
        assert!(ResolutionSpec::new(0.0, 10).is_err());
        assert!(ResolutionSpec::new(1.0, 0).is_err());
        assert!(resolution_for(-1.0, SamplingMethod::Fibonacci, 0).is_err());
    }

    #[test]
    fn icosphere_resolution_is_discrete() {
        let mut mesh = Icosphere::icosahedron();
        let mut table = vec![mesh.mean_edge_angle()];
        for _ in 0..5 {
            mesh = mesh.subdivide();
            table.push(mesh.mean_edge_angle());
        }
        // just below the s=4 spacing: s=4 is far closer than s=5
        let m = resolution_for(table[4] * 0.97, SamplingMethod::Icosphere, 0).unwrap();
        assert_eq!(m.params, SamplingParams::Icosphere { subdivisions: 4 });
        assert!((m.achieved_spacing - table[4]).abs() < 1e-12);
    }
}
