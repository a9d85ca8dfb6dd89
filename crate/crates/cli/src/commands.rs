//! Subcommand implementations. Each returns the text report for stdout.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;

use selconv::ablation::{rows_to_csv, rows_to_table, run_ablation, AblationConfig};
use selconv::container::Container;
use selconv::geom::cartesian_to_spherical;
use selconv::graph::GraphPyramid;
use selconv::mesh::{
    build_mesh_graph, features_to_texture, parse_obj, sample_surface, texture_to_features,
    MeshGraphOptions, MeshSurface, SurfaceSample,
};
use selconv::network::{run_network, NetworkSpec};
use selconv::presets;
use selconv::raster::Image;
use selconv::sampling::SphericalPointSet;
use selconv::sphere::{
    build_sphere_graph, features_to_image, image_to_features, SphereGraphOptions,
};
use selconv::weights::WeightStore;

use crate::config::{RunConfig, Task};
use crate::{CliError, PresetArgs};

const PREVIEW_WIDTH: usize = 256;

fn sphere_options(cfg: &RunConfig, levels: usize) -> SphereGraphOptions {
    SphereGraphOptions {
        k: cfg.k,
        scheme: cfg.interp,
        levels,
        clustering: cfg.clustering,
        seed: cfg.seed,
    }
}

fn mesh_options(cfg: &RunConfig, levels: usize) -> MeshGraphOptions {
    MeshGraphOptions {
        k: cfg.k,
        scheme: cfg.interp,
        levels,
        up: cfg.up,
        seed: cfg.seed,
    }
}

fn load_mesh(path: &Path) -> anyhow::Result<MeshSurface> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_obj(&text).with_context(|| format!("parsing {}", path.display()))
}

fn mesh_graph(
    cfg: &RunConfig,
    levels: usize,
) -> Result<(MeshSurface, GraphPyramid, Vec<SurfaceSample>), CliError> {
    let mesh = load_mesh(cfg.require(&cfg.mesh, "mesh")?)?;
    let samples = sample_surface(&mesh, cfg.mesh_samples(), cfg.seed)?;
    let (pyramid, _) = build_mesh_graph(&mesh, &samples, &mesh_options(cfg, levels))?;
    Ok((mesh, pyramid, samples))
}

/// White dots on black at each point's equirectangular pixel.
fn dot_preview(points: &SphericalPointSet) -> Image {
    let (w, h) = (PREVIEW_WIDTH, PREVIEW_WIDTH / 2);
    let mut img = Image::new(w, h, 1);
    for &p in &points.points {
        let (theta, phi) = cartesian_to_spherical(p);
        let c = ((theta / (2.0 * PI) * w as f64) as usize).min(w - 1);
        let r = ((phi / PI * h as f64) as usize).min(h - 1);
        img.pixel_mut(r, c)[0] = 1.0;
    }
    img
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<String, CliError> {
    let params = cfg.sampling_params()?;
    let output = cfg.require(&cfg.output, "output")?;
    let points = params.sample()?;
    points.write(output)?;
    let mut report = format!(
        "sampled {} points ({}) -> {}\n",
        points.len(),
        serde_json::to_string(&params).map_err(anyhow::Error::from)?,
        output.display()
    );
    if let Some(preview) = &cfg.preview {
        dot_preview(&points).write_png(preview)?;
        let _ = writeln!(report, "preview -> {}", preview.display());
    }
    Ok(report)
}

fn pyramid_report(p: &GraphPyramid) -> String {
    let mut out = format!(
        "{:>5} {:>8} {:>9} {:>8} {:>8} {:>10}\n",
        "level", "nodes", "edges", "degree", "padded", "spacing"
    );
    for (l, level) in p.levels.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>5} {:>8} {:>9} {:>8.3} {:>8} {:>10.6}",
            l,
            level.node_count(),
            level.edges.len(),
            level.mean_degree(),
            level.padded,
            level.spacing
        );
    }
    out
}

pub fn cmd_build(cfg: &RunConfig) -> Result<String, CliError> {
    let output = cfg.require(&cfg.output, "output")?;
    let pyramid = match cfg.task {
        Task::Sphere => {
            let points = cfg.sampling_params()?.sample()?;
            build_sphere_graph(&points, &sphere_options(cfg, cfg.levels))?
        }
        Task::Mesh => mesh_graph(cfg, cfg.levels)?.1,
    };
    pyramid.write(output)?;
    Ok(format!("{}wrote {}\n", pyramid_report(&pyramid), output.display()))
}

pub fn cmd_run(cfg: &RunConfig) -> Result<String, CliError> {
    let spec_path = cfg.require(&cfg.network, "network")?;
    let weights_path = cfg.require(&cfg.weights, "weights")?;
    let output = cfg.require(&cfg.output, "output")?;
    if cfg.task == Task::Sphere {
        cfg.require(&cfg.input, "input")?;
        cfg.sampling_params()?;
    } else {
        cfg.require(&cfg.texture, "texture")?;
        cfg.require(&cfg.mesh, "mesh")?;
    }
    let spec = NetworkSpec::load(spec_path)?;
    let weights = WeightStore::load(weights_path)?;
    let levels = cfg.levels.max(spec.required_levels());
    let (result, nodes) = match cfg.task {
        Task::Sphere => {
            let img = Image::read_png(cfg.input.as_deref().expect("checked"))?;
            let points = cfg.sampling_params()?.sample()?;
            let pyramid = build_sphere_graph(&points, &sphere_options(cfg, levels))?;
            let x = image_to_features(&img, &points.points)?;
            let y = run_network(&spec, &weights, &pyramid, &x)?;
            (features_to_image(&y, &points.points, img.width, img.height)?, points.len())
        }
        Task::Mesh => {
            let texture = Image::read_png(cfg.texture.as_deref().expect("checked"))?;
            let (mesh, pyramid, samples) = mesh_graph(cfg, levels)?;
            let x = texture_to_features(&texture, &samples)?;
            let y = run_network(&spec, &weights, &pyramid, &x)?;
            let original = (y.cols() == texture.channels).then_some(&texture);
            let out = features_to_texture(&y, &samples, &mesh, texture.width, texture.height, original)?;
            (out, samples.len())
        }
    };
    result.write_png(output)?;
    Ok(format!(
        "ran {} layers on {nodes} nodes ({levels} levels) -> {}\n",
        spec.layers.len(),
        output.display()
    ))
}

pub fn cmd_ablate(cfg: &RunConfig) -> Result<String, CliError> {
    let acfg = AblationConfig {
        delta_theta: cfg.resolution().unwrap_or(PI / 32.0),
        k: cfg.k,
        seed: cfg.seed,
        ..Default::default()
    };
    let rows = run_ablation(&acfg);
    let mut report = rows_to_table(&rows);
    if let Some(out) = &cfg.output {
        std::fs::write(out, rows_to_csv(&rows)).with_context(|| format!("writing {}", out.display()))?;
        let _ = writeln!(report, "wrote {} rows to {}", rows.len(), out.display());
    }
    Ok(report)
}

pub fn cmd_info(cfg: &RunConfig) -> Result<String, CliError> {
    let path = cfg.require(&cfg.input, "input")?;
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(b"SELCONV\0") {
        let c = Container::from_bytes(&bytes)?;
        return Ok(match c.kind.as_str() {
            "graph-pyramid" => format!("graph pyramid\n{}", pyramid_report(&GraphPyramid::from_container(c)?)),
            "point-set" => {
                let p = SphericalPointSet::from_container(c)?;
                format!(
                    "point set: {} points, {}\n",
                    p.len(),
                    serde_json::to_string(&p.params).map_err(anyhow::Error::from)?
                )
            }
            other => format!("container of kind {other}\n"),
        });
    }
    if bytes.starts_with(b"SELWGT\0\0") {
        let w = WeightStore::from_bytes(&bytes)?;
        let mut out = format!("weights: {} tensors\n", w.len());
        for name in w.names() {
            let t = w.get(name).expect("listed");
            let _ = writeln!(out, "  {name}: {:?} {:?}", t.kind, t.shape);
        }
        return Ok(out);
    }
    if bytes.starts_with(b"\x89PNG") {
        let img = Image::read_png(path)?;
        return Ok(format!("image: {}x{}\n", img.width, img.height));
    }
    if let Ok(spec) = serde_json::from_slice::<NetworkSpec>(&bytes) {
        let mut out = format!(
            "network: {} input channels, {} layers, {} levels\n",
            spec.input_channels,
            spec.layers.len(),
            spec.required_levels()
        );
        for l in &spec.layers {
            let _ = writeln!(out, "  {}", l.label());
        }
        return Ok(out);
    }
    Err(anyhow::anyhow!("{}: unrecognized file", path.display()).into())
}

pub fn cmd_preset(args: &PresetArgs) -> Result<String, CliError> {
    if args.channels == 0 {
        return Err(CliError::Validation("channels must be at least 1".into()));
    }
    let (spec, weights) = presets::by_name(&args.name, args.channels, args.seed).ok_or_else(|| {
        CliError::Validation(format!(
            "unknown preset {:?} (expected one of {})",
            args.name,
            presets::PRESETS.join(", ")
        ))
    })?;
    spec.save(&args.network)?;
    weights.save(&args.weights)?;
    Ok(format!(
        "wrote {} -> {} and {}\n",
        args.name,
        args.network.display(),
        args.weights.display()
    ))
}
