//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selconv::ablation::seam_score;
use selconv::conv::{sel_conv, transfer_kernel};
use selconv::geom::{dot, norm, spherical_to_cartesian, Vec2, Vec3};
use selconv::graph::{normalize_interpolation, normalize_rows, SelectionEdges};
use selconv::interp::{angular_weights, barycentric_weights, Interpolation, Selection};
use selconv::mesh::{
    build_mesh_graph, features_to_texture, sample_surface, texture_to_features, MeshGraphOptions,
    MeshSurface,
};
use selconv::network::{run_network, run_network_dense};
use selconv::planar::{grid_level, image_to_grid_features, GridBorder};
use selconv::presets;
use selconv::raster::Image;
use selconv::sampling::{layering_rows, sample_equirect, sample_icosphere, sample_layering};
use selconv::sphere::{
    build_sphere_graph, features_to_image, image_to_features, local_frame, SphereGraphOptions,
};
use selconv::weights::{LayerKind, Tensor};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// ---------------------------------------------------------------- planar

/// Cross-correlation with a `[3, 3, ci, co]` kernel and replicate padding.
fn dense_reference(img: &Image, kernel: &Tensor, bias: &[f64]) -> Image {
    let (ci, co) = (kernel.shape[2], kernel.shape[3]);
    let (w, h) = (img.width as isize, img.height as isize);
    let mut out = Image::new(img.width, img.height, co);
    for r in 0..h {
        for c in 0..w {
            let px = out.idx(r as usize, c as usize);
            for o in 0..co {
                let mut acc = bias[o];
                for ky in 0..3 {
                    for kx in 0..3 {
                        let rr = (r + ky as isize - 1).clamp(0, h - 1) as usize;
                        let cc = (c + kx as isize - 1).clamp(0, w - 1) as usize;
                        for i in 0..ci {
                            let k = kernel.data[((ky * 3 + kx) * ci + i) * co + o] as f64;
                            acc += k * img.get(rr, cc, i);
                        }
                    }
                }
                out.data[px + o] = acc;
            }
        }
    }
    out
}

fn planar_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0f64;
    for case in 0..20 {
        let (w, h) = if case == 0 { (64, 64) } else { (rng.gen_range(1..=64), rng.gen_range(1..=64)) };
        let ci = rng.gen_range(1..=16);
        let co = rng.gen_range(1..=16);
        let scheme = if case % 2 == 0 { Interpolation::Angular } else { Interpolation::Barycentric };
        let img = Image::from_fn(w, h, ci, |_, _, _| rng.gen_range(-1.0..1.0));
        let kernel = Tensor::new(
            LayerKind::Conv3x3,
            vec![3, 3, ci, co],
            (0..9 * ci * co).map(|_| rng.gen_range(-1.0f32..1.0)).collect(),
        )
        .unwrap();
        let bias: Vec<f64> = (0..co).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut sw = transfer_kernel(&kernel).unwrap();
        sw.bias = Some(bias.clone());
        let level = grid_level(w, h, scheme, GridBorder::Clamp).unwrap();
        let y = sel_conv(&image_to_grid_features(&img).unwrap(), &level.edges, &sw).unwrap();
        let want = dense_reference(&img, &kernel, &bias);
        let err = y
            .data()
            .iter()
            .zip(&want.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-4 && secs < 10.0,
        format!("20 cases, max abs error {worst:.2e} (< 1e-4), {secs:.2} s (< 10 s)"),
    )
}

// ----------------------------------------------------------- barycentric

/// Solves the 3x3 system `[a b c; 1 1 1] w = [p; 1]` by Gaussian elimination
/// with partial pivoting.
fn solve_barycentric(p: Vec2, tri: [Vec2; 3]) -> [f64; 3] {
    let mut m = [
        [tri[0][0], tri[1][0], tri[2][0], p[0]],
        [tri[0][1], tri[1][1], tri[2][1], p[1]],
        [1.0, 1.0, 1.0, 1.0],
    ];
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..4 {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]]
}

/// Oracle: find the kernel-square triangle containing `p` and solve for its
/// barycentric coordinates.
fn barycentric_oracle(p: Vec2, d: f64) -> [f64; 9] {
    let pos = |s: Selection| {
        let (dx, dy) = s.step();
        [dx as f64 * d, dy as f64 * d]
    };
    use Selection::*;
    let ring = [E, NE, N, NW, W, SW, S, SE, E];
    let mut best = ([0.0; 9], f64::NEG_INFINITY);
    for k in 0..8 {
        let tri = [Center, ring[k], ring[k + 1]];
        let w = solve_barycentric(p, tri.map(pos));
        let min = w.iter().copied().fold(f64::INFINITY, f64::min);
        if min > best.1 {
            let mut out = [0.0; 9];
            for (s, wi) in tri.iter().zip(w) {
                out[s.index()] += wi;
            }
            best = (out, min);
        }
    }
    best.0
}

fn barycentric_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut worst, mut worst_sum) = (0f64, 0f64);
    for _ in 0..10_000 {
        let d = rng.gen_range(0.01..5.0);
        let p = [rng.gen_range(-d..d), rng.gen_range(-d..d)];
        let got = barycentric_weights(p, d).unwrap();
        let want = barycentric_oracle(p, d);
        let arr = got.to_array();
        worst = arr.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
        worst_sum = worst_sum.max((got.total() - 1.0).abs());
        // outside the square too
        let q = [rng.gen_range(-10.0..10.0) * d, rng.gen_range(-10.0..10.0) * d];
        worst_sum = worst_sum.max((barycentric_weights(q, d).unwrap().total() - 1.0).abs());
    }
    outcome(
        worst <= 1e-9 && worst_sum <= 1e-12,
        format!("10000 points, max deviation from linear solve {worst:.2e} (<= 1e-9), max |sum - 1| {worst_sum:.2e} (<= 1e-12)"),
    )
}

// --------------------------------------------------------------- angular

fn angular_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut unity = 0f64;
    for _ in 0..10_000 {
        let a = rng.gen_range(0.0..TAU);
        let r = rng.gen_range(0.01..10.0);
        let w = angular_weights([r * a.cos(), r * a.sin()]).unwrap();
        unity = unity.max((w.total() - 1.0).abs());
    }
    let mut jump = 0f64;
    for k in 0..8 {
        let a = k as f64 * FRAC_PI_4;
        let at = |x: f64| angular_weights([x.cos(), x.sin()]).unwrap().to_array();
        let (l, r) = (at(a - 1e-12), at(a + 1e-12));
        jump = l.iter().zip(&r).map(|(x, y)| (x - y).abs()).fold(jump, f64::max);
    }
    let mid = angular_weights([1.0, (PI / 8.0).tan()]).unwrap().to_array();
    let symmetric = mid[Selection::E.index()] == 0.5 && mid[Selection::NE.index()] == 0.5;
    outcome(
        unity <= 1e-12 && jump <= 1e-9 && symmetric,
        format!(
            "max |sum - 1| {unity:.2e}, max boundary jump {jump:.2e} (<= 1e-9), w(22.5deg) = ({}, {})",
            mid[Selection::E.index()],
            mid[Selection::NE.index()]
        ),
    )
}

// --------------------------------------------------------- normalization

fn group_sums(edges: &SelectionEdges, key: impl Fn(usize, usize, usize) -> (usize, usize)) -> Vec<f64> {
    let mut sums: HashMap<(usize, usize), f64> = HashMap::new();
    for (s, d, m, w) in edges.iter() {
        *sums.entry(key(s, d, m)).or_default() += w;
    }
    sums.into_values().collect()
}

fn normalization_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (mut pair_err, mut row_err) = (0f64, 0f64);
    for _ in 0..100 {
        let n = rng.gen_range(2..60);
        let mut edges = SelectionEdges::with_capacity(0);
        for _ in 0..rng.gen_range(1..400) {
            let (s, d) = (rng.gen_range(0..n), rng.gen_range(0..n));
            for _ in 0..rng.gen_range(1..=3) {
                let m = Selection::ALL[rng.gen_range(0..9)];
                edges.push(s, d, m, rng.gen_range(1e-3..5.0));
            }
        }
        let pass1 = normalize_interpolation(&edges).unwrap();
        for v in group_sums(&pass1, |s, d, _| (s, d)) {
            pair_err = pair_err.max((v - 1.0).abs());
        }
        let pass2 = normalize_rows(&pass1).unwrap();
        for v in group_sums(&pass2, |_, d, m| (d, m)) {
            row_err = row_err.max((v - 1.0).abs());
        }
    }
    outcome(
        pair_err <= 1e-9 && row_err <= 1e-9,
        format!("100 graphs, max (src,dst) error {pair_err:.2e}, max (dst,selection) error {row_err:.2e} (<= 1e-9)"),
    )
}

// ---------------------------------------------------------------- frames

fn frames_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut normals: Vec<Vec3> = vec![[0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 3.0, 0.0]];
    while normals.len() < 10_000 {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if norm(v) > 1e-3 {
            normals.push(v);
        }
    }
    let (mut ortho, mut align) = (0f64, 0f64);
    for n in &normals {
        let f = local_frame(*n);
        let r = f.rotation();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((dot(r[i], r[j]) - want).abs());
            }
        }
        let z = f.rotate(selconv::geom::normalize(*n));
        align = align.max((z[0].abs()).max(z[1].abs()).max((z[2] - 1.0).abs()));
    }
    outcome(
        ortho <= 1e-6 && align <= 1e-6,
        format!("10000 normals incl. both poles, orthonormality error {ortho:.2e}, |R n - z| {align:.2e} (<= 1e-6)"),
    )
}

// -------------------------------------------------------------- sampling

fn sampling_check() -> Outcome {
    let counts: Vec<usize> = (0..4).map(|s| sample_icosphere(s).unwrap().len()).collect();
    let rows: Vec<usize> = layering_rows(4).iter().map(|r| r.1).collect();
    let layering = sample_layering(4).unwrap();
    let mut worst = 0f64;
    for set in (0..4).map(|s| sample_icosphere(s).unwrap()).chain([layering.clone()]) {
        for p in &set.points {
            worst = worst.max((norm(*p) - 1.0).abs());
        }
    }
    outcome(
        counts == [12, 42, 162, 642] && rows == [3, 7, 7, 3] && layering.len() == 20 && worst <= 1e-6,
        format!(
            "icosphere {counts:?}, layering rows {rows:?} ({} points), max |norm - 1| {worst:.2e}",
            layering.len()
        ),
    )
}

// ------------------------------------------------------------ sphere seam

/// Panorama continuous across the seam: smooth structure plus fine
/// periodic stripes with an integer number of periods around the sphere.
fn seam_panorama(width: usize, height: usize) -> Image {
    Image::from_fn(width, height, 3, |r, c, ch| {
        let theta = TAU * (c as f64 + 0.5) / width as f64;
        let phi = PI * (r as f64 + 0.5) / height as f64;
        let d = spherical_to_cartesian(theta, phi);
        let stripes = ((width / 2 - 8) as f64 * theta + ch as f64).sin();
        0.5 + 0.2 * d[ch] + 0.2 * stripes * phi.sin()
    })
}

fn sphere_seam() -> Outcome {
    let start = Instant::now();
    let (w, h) = (256, 128);
    let img = seam_panorama(w, h);
    let (spec, weights) = presets::smooth3(3, 5);

    let naive = run_network_dense(&spec, &weights, &img).unwrap();

    let points = sample_equirect(w, h).unwrap();
    let pyramid = build_sphere_graph(&points, &SphereGraphOptions::default()).unwrap();
    let x = image_to_features(&img, &points.points).unwrap();
    let y = run_network(&spec, &weights, &pyramid, &x).unwrap();
    let graph = features_to_image(&y, &points.points, w, h).unwrap();

    let (g, n) = (seam_score(&graph), seam_score(&naive));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        g <= 1.5 && n >= 3.0 && secs < 60.0,
        format!("graph score {g:.3} (<= 1.5), naive score {n:.3} (>= 3.0), {secs:.1} s (< 60 s)"),
    )
}

// -------------------------------------------------------------- mesh seam

const CHART: usize = 32;

/// Cube faces as `(origin, a, b)` with outward `a x b`.
fn cube_faces() -> Vec<(Vec3, Vec3, Vec3)> {
    let faces = [
        ([-1.0, -1.0, 1.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]),
        ([1.0, -1.0, -1.0], [-2.0, 0.0, 0.0], [0.0, 2.0, 0.0]),
        ([1.0, -1.0, 1.0], [0.0, 0.0, -2.0], [0.0, 2.0, 0.0]),
        ([-1.0, -1.0, -1.0], [0.0, 0.0, 2.0], [0.0, 2.0, 0.0]),
        ([-1.0, 1.0, 1.0], [2.0, 0.0, 0.0], [0.0, 0.0, -2.0]),
        ([-1.0, -1.0, -1.0], [2.0, 0.0, 0.0], [0.0, 0.0, 2.0]),
    ];
    // quarter turns of each chart so atlas neighbours do not line up
    let turns = [0, 1, 2, 3, 1, 2];
    faces
        .iter()
        .zip(turns)
        .map(|(&(mut o, mut a, mut b), t)| {
            for _ in 0..t {
                let add = |x: Vec3, y: Vec3| [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
                (o, a, b) = (add(o, a), b, a.map(|v| -v));
            }
            (o, a, b)
        })
        .collect()
}

fn at(f: &(Vec3, Vec3, Vec3), s: f64, t: f64) -> Vec3 {
    std::array::from_fn(|i| f.0[i] + f.1[i] * s + f.2[i] * t)
}

/// Cube in a 3x2 atlas; each chart spans texel centers of a 32x32 block.
fn seamed_cube() -> (MeshSurface, usize, usize) {
    let (tw, th) = (3 * CHART, 2 * CHART);
    let mut vertices = Vec::new();
    let mut tris = Vec::new();
    let mut uvs = Vec::new();
    for (f, face) in cube_faces().iter().enumerate() {
        let (col, row) = (f % 3, f / 3);
        let u = |s: f64| ((col * CHART) as f64 + 0.5 + s * (CHART - 1) as f64) / tw as f64;
        let v = |t: f64| 1.0 - ((row * CHART) as f64 + 0.5 + (1.0 - t) * (CHART - 1) as f64) / th as f64;
        let base = vertices.len() as u32;
        let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        for &(s, t) in &corners {
            vertices.push(at(face, s, t));
        }
        let uv: Vec<Vec2> = corners.iter().map(|&(s, t)| [u(s), v(t)]).collect();
        tris.push([base, base + 1, base + 2]);
        uvs.push([uv[0], uv[1], uv[2]]);
        tris.push([base, base + 2, base + 3]);
        uvs.push([uv[0], uv[2], uv[3]]);
    }
    (MeshSurface::new(vertices, tris, Some(uvs)).unwrap(), tw, th)
}

/// Chart index and 3D point of every texel.
fn texel_points(tw: usize, th: usize) -> Vec<(usize, Vec3)> {
    let faces = cube_faces();
    let mut out = Vec::with_capacity(tw * th);
    for r in 0..th {
        for c in 0..tw {
            let f = (r / CHART) * 3 + c / CHART;
            let s = (c % CHART) as f64 / (CHART - 1) as f64;
            let t = (CHART - 1 - r % CHART) as f64 / (CHART - 1) as f64;
            out.push((f, at(&faces[f], s, t)));
        }
    }
    out
}

fn paint(p: Vec3, ch: usize) -> f64 {
    match ch {
        0 => 0.5 + 0.35 * (1.7 * p[0] + 0.9 * p[1] + 0.3).sin(),
        1 => 0.5 + 0.35 * (1.1 * p[1] - 1.4 * p[2]).cos(),
        _ => 0.5 + 0.35 * (0.8 * p[2] + 1.3 * p[0] - 0.5).sin(),
    }
}

/// Ratio of the median cross-seam difference to the median within-chart
/// adjacent difference.
fn seam_ratio(img: &Image, texels: &[(usize, Vec3)], cross: &[(usize, usize)]) -> f64 {
    let (tw, th) = (img.width, img.height);
    let diffs = |a: usize, b: usize, out: &mut Vec<f64>| {
        for ch in 0..img.channels {
            out.push((img.data[a * img.channels + ch] - img.data[b * img.channels + ch]).abs());
        }
    };
    let mut within = Vec::new();
    for r in 0..th {
        for c in 0..tw {
            let i = r * tw + c;
            if c + 1 < tw && texels[i + 1].0 == texels[i].0 {
                diffs(i, i + 1, &mut within);
            }
            if r + 1 < th && texels[i + tw].0 == texels[i].0 {
                diffs(i, i + tw, &mut within);
            }
        }
    }
    let mut seam = Vec::new();
    for &(a, b) in cross {
        diffs(a, b, &mut seam);
    }
    median(seam) / median(within)
}

fn mesh_seam() -> Outcome {
    let (mesh, tw, th) = seamed_cube();
    let texels = texel_points(tw, th);
    let spacing = 2.0 / (CHART - 1) as f64;
    let mut cross = Vec::new();
    for (i, (fi, pi)) in texels.iter().enumerate() {
        for (j, (fj, pj)) in texels.iter().enumerate().skip(i + 1) {
            if fi != fj && selconv::geom::dist2(*pi, *pj).sqrt() < 0.5 * spacing {
                cross.push((i, j));
            }
        }
    }
    let texture = Image::from_fn(tw, th, 3, |r, c, ch| paint(texels[r * tw + c].1, ch));
    let (spec, weights) = presets::average(3);

    let naive = run_network_dense(&spec, &weights, &texture).unwrap();

    let samples = sample_surface(&mesh, 20_000, 3).unwrap();
    let opts = MeshGraphOptions { seed: 3, ..Default::default() };
    let (pyramid, _) = build_mesh_graph(&mesh, &samples, &opts).unwrap();
    let x = texture_to_features(&texture, &samples).unwrap();
    let y = run_network(&spec, &weights, &pyramid, &x).unwrap();
    let graph = features_to_texture(&y, &samples, &mesh, tw, th, Some(&texture)).unwrap();

    let (g, n) = (seam_ratio(&graph, &texels, &cross), seam_ratio(&naive, &texels, &cross));
    outcome(
        g <= 2.0 && n > 2.0,
        format!("{} seam pairs, graph ratio {g:.3} (<= 2), naive ratio {n:.3} (fails when > 2)", cross.len()),
    )
}

// ---------------------------------------------------- ablation, determinism

fn selconv(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_selconv")).args(args).output().expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn ablation_check(dir: &Path) -> Outcome {
    let csv = dir.join("ablation.csv");
    let start = Instant::now();
    selconv(&["ablate", "--seed", "0", "--output", csv.to_str().unwrap()]);
    let secs = start.elapsed().as_secs_f64();
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let dev = |r: &Vec<&str>| r[5].parse::<f64>().unwrap_or(f64::NAN);
    let ok = rows.iter().filter(|r| r[8] == "ok").count();
    let reference = rows
        .iter()
        .filter(|r| r[0] == "layering" && r[1] == "layering")
        .map(dev)
        .fold(f64::NEG_INFINITY, f64::max);
    let random = rows
        .iter()
        .filter(|r| r[1] == "random")
        .map(dev)
        .fold(f64::INFINITY, f64::min);
    outcome(
        rows.len() == 40 && ok == 40 && secs < 300.0 && reference <= random,
        format!(
            "{} rows ({ok} ok) in {secs:.1} s (< 300 s), layering/layering deviation {reference:.4} <= min random-clustering deviation {random:.4}",
            rows.len()
        ),
    )
}

fn determinism_check(dir: &Path) -> Outcome {
    let mesh = dir.join("cube.obj");
    let (cube, tw, th) = seamed_cube();
    std::fs::write(&mesh, selconv::mesh::write_obj(&cube)).unwrap();
    let texels = texel_points(tw, th);
    let texture = dir.join("tex.png");
    Image::from_fn(tw, th, 3, |r, c, ch| paint(texels[r * tw + c].1, ch)).write_png(&texture).unwrap();
    let pano = dir.join("pano.png");
    seam_panorama(64, 32).write_png(&pano).unwrap();
    let (net, w) = (dir.join("net.json"), dir.join("net.w"));
    let s = |p: &Path| p.to_str().unwrap().to_string();

    let cases: Vec<(&str, Vec<String>)> = vec![
        ("sample", vec!["sample".into(), "--method".into(), "random".into(), "--count".into(), "500".into(), "--seed".into(), "4".into()]),
        ("build sphere", vec!["build".into(), "--method".into(), "icosphere".into(), "--subdivisions".into(), "3".into(), "--levels".into(), "3".into(), "--clustering".into(), "random".into()]),
        ("build mesh", vec!["build".into(), "--task".into(), "mesh".into(), "--mesh".into(), s(&mesh), "--samples".into(), "3000".into(), "--levels".into(), "2".into()]),
        ("run sphere", vec!["run".into(), "--n-phi".into(), "32".into(), "--levels".into(), "2".into(), "--network".into(), s(&net), "--weights".into(), s(&w), "--input".into(), s(&pano)]),
        ("run mesh", vec!["run".into(), "--task".into(), "mesh".into(), "--mesh".into(), s(&mesh), "--texture".into(), s(&texture), "--samples".into(), "3000".into(), "--network".into(), s(&net), "--weights".into(), s(&w)]),
        ("ablate", vec!["ablate".into(), "--seed".into(), "0".into()]),
    ];
    let mut failed = Vec::new();
    let mut outputs = Vec::new();
    for (i, pass) in [0, 1].iter().enumerate() {
        let (n, wt) = (dir.join(format!("p{pass}.json")), dir.join(format!("p{pass}.w")));
        selconv(&["preset", "toy_unet", "--seed", "2", "--network", &s(&n), "--weights", &s(&wt)]);
        if i == 0 {
            std::fs::copy(&n, &net).unwrap();
            std::fs::copy(&wt, &w).unwrap();
        }
        let mut files = vec![std::fs::read(&n).unwrap(), std::fs::read(&wt).unwrap()];
        for (name, args) in &cases {
            let ext = if name.starts_with("run") { "png" } else { "bin" };
            let out = dir.join(format!("{}-{pass}.{ext}", name.replace(' ', "_")));
            let mut a: Vec<&str> = args.iter().map(String::as_str).collect();
            let o = s(&out);
            a.extend(["--output", &o]);
            selconv(&a);
            files.push(std::fs::read(&out).unwrap());
        }
        outputs.push(files);
    }
    let names: Vec<&str> = ["preset spec", "preset weights"].into_iter().chain(cases.iter().map(|c| c.0)).collect();
    for (k, name) in names.iter().enumerate() {
        if outputs[0][k] != outputs[1][k] {
            failed.push(*name);
        }
    }
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} commands rerun, all outputs byte-identical", names.len())
        } else {
            format!("outputs differ for {failed:?}")
        },
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("planar oracle equivalence", Box::new(planar_oracle)),
        ("barycentric oracle", Box::new(barycentric_check)),
        ("angular properties", Box::new(angular_check)),
        ("normalization invariants", Box::new(normalization_check)),
        ("frames", Box::new(frames_check)),
        ("sampling counts", Box::new(sampling_check)),
        ("sphere seam continuity", Box::new(sphere_seam)),
        ("mesh seam consistency", Box::new(mesh_seam)),
        ("ablation grid", Box::new(|| ablation_check(dir.path()))),
        ("determinism", Box::new(|| determinism_check(dir.path()))),
    ];
    let mut failures = 0;
    for (name, check) in &checks {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failures += 1;
        }
    }
    println!("{} of {} criteria passed", checks.len() - failures, checks.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
