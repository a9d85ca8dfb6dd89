//! Sampling x clustering x interpolation comparison grid and its metrics.
//!
//! Each cell builds a two-level sphere pyramid and reports
//! - cap deviation: a small U-Net run on the sphere graph versus the same
//!   network run densely on a tangent-plane grid around a few cap centers,
//!   relative to the spread of the dense output;
//! - seam score of a smoothing network rendered back to equirectangular;
//! - the fraction of selections filled by replicate padding;
//! - build time.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::geom::{add, dot, normalize, scale, spherical_to_cartesian, Vec3};
use crate::graph::GraphPyramid;
use crate::interp::Interpolation;
use crate::knn::KdTree;
use crate::network::{run_network, run_network_dense};
use crate::presets;
use crate::raster::Image;
use crate::sampling::{resolution_for, SamplingMethod};
use crate::sphere::{
    build_sphere_pyramid, features_to_image, idw_blend, image_to_features, local_frame,
    SphereGraphOptions,
};

/// Sampling methods compared (random sampling is only used for clustering).
pub const SAMPLINGS: [SamplingMethod; 4] = [
    SamplingMethod::Equirect,
    SamplingMethod::Fibonacci,
    SamplingMethod::Icosphere,
    SamplingMethod::Layering,
];

pub const CLUSTERINGS: [SamplingMethod; 5] = [
    SamplingMethod::Random,
    SamplingMethod::Equirect,
    SamplingMethod::Fibonacci,
    SamplingMethod::Icosphere,
    SamplingMethod::Layering,
];

pub const SCHEMES: [Interpolation; 2] = [Interpolation::Angular, Interpolation::Barycentric];

#[derive(Clone, Debug, PartialEq)]
pub struct AblationConfig {
    pub delta_theta: f64,
    pub k: usize,
    pub seed: u64,
    /// Side of the dense tangent-plane grid around each cap center.
    pub cap_grid: usize,
    /// Side of the central window compared on each cap.
    pub cap_window: usize,
}

impl Default for AblationConfig {
    fn default() -> Self {
        AblationConfig {
            delta_theta: PI / 32.0,
            k: 8,
            seed: 0,
            cap_grid: 24,
            cap_window: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationRow {
    pub sampling: SamplingMethod,
    pub clustering: SamplingMethod,
    pub scheme: Interpolation,
    pub fine_nodes: usize,
    pub coarse_nodes: usize,
    pub cap_deviation: f64,
    pub seam_score: f64,
    pub padding_fraction: f64,
    pub build_ms: f64,
    pub error: Option<String>,
}

/// Smooth random field on the sphere: a sum of plane waves with
/// wavelengths between 8 and 16 times `delta_theta`.
#[derive(Clone, Debug)]
pub struct SmoothField {
    waves: Vec<(Vec3, f64, f64, f64)>,
}

impl SmoothField {
    pub fn new(delta_theta: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let waves = (0..6)
            .map(|_| {
                let d: Vec3 = [
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                ];
                let wavelength = delta_theta * rng.gen_range(8.0..16.0);
                (normalize(d), TAU / wavelength, rng.gen_range(0.0..TAU), rng.gen_range(0.5..1.0))
            })
            .collect();
        SmoothField { waves }
    }

    pub fn eval(&self, p: Vec3) -> f64 {
        let s: f64 = self
            .waves
            .iter()
            .map(|&(d, k, ph, a)| a * (k * dot(d, p) + ph).sin())
            .sum();
        0.5 + 0.1 * s
    }

    pub fn render(&self, width: usize, height: usize) -> Image {
        Image::from_fn(width, height, 1, |r, c, _| {
            self.eval(spherical_to_cartesian(
                TAU * (c as f64 + 0.5) / width as f64,
                PI * (r as f64 + 0.5) / height as f64,
            ))
        })
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute difference across the left/right image edge divided by
/// the median difference between horizontally adjacent interior pixels.
/// About 1 for content without a seam.
pub fn seam_score(img: &Image) -> f64 {
    let w = img.width;
    let mut seam = Vec::with_capacity(img.height * img.channels);
    let mut interior = Vec::with_capacity(img.height * w * img.channels);
    for r in 0..img.height {
        for ch in 0..img.channels {
            seam.push((img.get(r, w - 1, ch) - img.get(r, 0, ch)).abs());
            for c in 0..w - 1 {
                interior.push((img.get(r, c + 1, ch) - img.get(r, c, ch)).abs());
            }
        }
    }
    median(seam) / median(interior)
}

/// Share of the eight directional selections filled by replicate padding,
/// over all levels.
pub fn padding_fraction(p: &GraphPyramid) -> f64 {
    let padded: usize = p.levels.iter().map(|l| l.padded).sum();
    let slots: usize = p.levels.iter().map(|l| 8 * l.node_count()).sum();
    padded as f64 / slots as f64
}

/// Cap centers `(theta, phi)`: one on the seam, the others spread out.
pub const CAP_CENTERS: [(f64, f64); 4] = [
    (0.0, PI / 2.0),
    (PI / 2.0, PI / 3.0),
    (PI, 2.0 * PI / 3.0),
    (3.0 * PI / 2.0, 0.4 * PI),
];

/// Directions of a `size x size` tangent-plane grid with spacing
/// `delta_theta` around `center`, rows top to bottom.
pub fn cap_grid(center: Vec3, size: usize, delta_theta: f64) -> Vec<Vec3> {
    let f = local_frame(center);
    let mid = (size as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(size * size);
    for r in 0..size {
        for c in 0..size {
            let u = (c as f64 - mid) * delta_theta;
            let v = (mid - r as f64) * delta_theta;
            out.push(normalize(add(center, add(scale(f.x_hat, u), scale(f.y_hat, v)))));
        }
    }
    out
}

/// RMS difference between the graph network and the dense network on the
/// central windows of all caps, over the RMS spread of the dense output.
pub fn cap_deviation(
    pyramid: &GraphPyramid,
    field: &SmoothField,
    cfg: &AblationConfig,
) -> Result<f64> {
    let (spec, weights) = presets::toy_unet(1, 1, 4, cfg.seed);
    cap_deviation_with(pyramid, field, cfg, &spec, &weights)
}

/// [`cap_deviation`] for an arbitrary single-channel network.
pub fn cap_deviation_with(
    pyramid: &GraphPyramid,
    field: &SmoothField,
    cfg: &AblationConfig,
    spec: &crate::network::NetworkSpec,
    weights: &crate::weights::WeightStore,
) -> Result<f64> {
    let points = &pyramid.levels[0].nodes.positions;
    let x = FeatureMatrix::from_fn(points.len(), 1, |r, _| field.eval(points[r]));
    let y = run_network(spec, weights, pyramid, &x)?;
    let tree = KdTree::new(points);
    let (g, win) = (cfg.cap_grid, cfg.cap_window);
    let lo = (g - win) / 2;
    let (mut diff2, mut dense_vals) = (0.0, Vec::new());
    for &(theta, phi) in &CAP_CENTERS {
        let dirs = cap_grid(spherical_to_cartesian(theta, phi), g, cfg.delta_theta);
        let img = Image {
            width: g,
            height: g,
            channels: 1,
            data: dirs.iter().map(|&d| field.eval(d)).collect(),
        };
        let dense = run_network_dense(spec, weights, &img)?;
        for r in lo..lo + win {
            for c in lo..lo + win {
                let mut v = [0.0];
                idw_blend(&tree, &y, dirs[r * g + c], true, &mut v);
                let d = dense.get(r, c, 0);
                diff2 += (v[0] - d).powi(2);
                dense_vals.push(d);
            }
        }
    }
    let n = dense_vals.len() as f64;
    let mean = dense_vals.iter().sum::<f64>() / n;
    let spread = (dense_vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok((diff2 / n).sqrt() / spread)
}

fn run_cell(
    sampling: SamplingMethod,
    clustering: SamplingMethod,
    scheme: Interpolation,
    cfg: &AblationConfig,
    field: &SmoothField,
) -> AblationRow {
    let mut row = AblationRow {
        sampling,
        clustering,
        scheme,
        fine_nodes: 0,
        coarse_nodes: 0,
        cap_deviation: f64::NAN,
        seam_score: f64::NAN,
        padding_fraction: f64::NAN,
        build_ms: f64::NAN,
        error: None,
    };
    let result = (|| -> Result<()> {
        let points = resolution_for(cfg.delta_theta, sampling, cfg.seed)?.params.sample()?;
        let start = Instant::now();
        let (pyramid, _) = build_sphere_pyramid(
            &points,
            &SphereGraphOptions {
                k: cfg.k,
                scheme,
                levels: 2,
                clustering: Some(clustering),
                seed: cfg.seed,
            },
        )?;
        row.build_ms = start.elapsed().as_secs_f64() * 1e3;
        row.fine_nodes = pyramid.levels[0].node_count();
        row.coarse_nodes = pyramid.levels[1].node_count();
        row.padding_fraction = padding_fraction(&pyramid);
        row.cap_deviation = cap_deviation(&pyramid, field, cfg)?;

        let height = (PI / cfg.delta_theta).round() as usize;
        let img = field.render(2 * height, height);
        let (spec, weights) = presets::smooth3(1, cfg.seed);
        let x = image_to_features(&img, &pyramid.levels[0].nodes.positions)?;
        let y = run_network(&spec, &weights, &pyramid, &x)?;
        let out = features_to_image(&y, &pyramid.levels[0].nodes.positions, 2 * height, height)?;
        row.seam_score = seam_score(&out);
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

/// Runs every cell; a failing cell is reported in its row.
pub fn run_ablation(cfg: &AblationConfig) -> Vec<AblationRow> {
    let field = SmoothField::new(cfg.delta_theta, cfg.seed);
    let cells: Vec<_> = SAMPLINGS
        .iter()
        .flat_map(|&s| CLUSTERINGS.iter().flat_map(move |&c| SCHEMES.iter().map(move |&i| (s, c, i))))
        .collect();
    cells
        .par_iter()
        .map(|&(s, c, i)| run_cell(s, c, i, cfg, &field))
        .collect()
}

fn fmt_metric(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "nan".into()
    }
}

/// CSV without timing, so reruns are byte-identical.
pub fn rows_to_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from(
        "sampling,clustering,interpolation,fine_nodes,coarse_nodes,cap_deviation,seam_score,padding_fraction,status\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.sampling,
            r.clustering,
            r.scheme,
            r.fine_nodes,
            r.coarse_nodes,
            fmt_metric(r.cap_deviation),
            fmt_metric(r.seam_score),
            fmt_metric(r.padding_fraction),
            r.error.as_deref().map_or("ok".to_string(), |e| format!("\"failed: {}\"", e.replace('"', "'")))
        );
    }
    out
}

/// Aligned text table including build time.
pub fn rows_to_table(rows: &[AblationRow]) -> String {
    let mut out = format!(
        "{:<10} {:<10} {:<12} {:>6} {:>6} {:>10} {:>8} {:>8} {:>9}\n",
        "sampling", "cluster", "interp", "fine", "coarse", "cap_dev", "seam", "pad", "build_ms"
    );
    for r in rows {
        let _ = write!(
            out,
            "{:<10} {:<10} {:<12} {:>6} {:>6} {:>10.4} {:>8.3} {:>8.4} {:>9.1}",
            r.sampling.name(),
            r.clustering.name(),
            r.scheme.to_string(),
            r.fine_nodes,
            r.coarse_nodes,
            r.cap_deviation,
            r.seam_score,
            r.padding_fraction,
            r.build_ms
        );
        if let Some(e) = &r.error {
            let _ = write!(out, "  FAILED: {e}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seam_score_of_periodic_image_is_one() {
        let img = Image::from_fn(64, 8, 1, |r, c, _| (TAU * (c as f64 + 0.5) / 64.0 + r as f64).sin());
        let s = seam_score(&img);
        assert!((s - 1.0).abs() < 0.05, "{s}");
        let ramp = Image::from_fn(64, 8, 1, |_, c, _| c as f64);
        assert!((seam_score(&ramp) - 63.0).abs() < 1e-9);
    }

    #[test]
    fn cap_grid_centered() {
        let c = spherical_to_cartesian(1.0, 1.0);
        let g = cap_grid(c, 5, 0.01);
        assert!(crate::geom::norm(crate::geom::sub(g[12], c)) < 1e-12);
        let f = local_frame(c);
        assert!(dot(crate::geom::sub(g[13], c), f.x_hat) > 0.0);
        assert!(dot(crate::geom::sub(g[7], c), f.y_hat) > 0.0);
    }

    #[test]
    fn single_cell_runs() {
        let cfg = AblationConfig {
            delta_theta: PI / 16.0,
            ..Default::default()
        };
        let field = SmoothField::new(cfg.delta_theta, 0);
        let row = run_cell(SamplingMethod::Layering, SamplingMethod::Layering, Interpolation::Angular, &cfg, &field);
        assert!(row.error.is_none(), "{:?}", row.error);
        assert!(row.cap_deviation.is_finite() && row.cap_deviation > 0.0);
        assert!(row.seam_score < 1.5);
        assert!(row.padding_fraction >= 0.0 && row.padding_fraction < 0.5);
    }
}
