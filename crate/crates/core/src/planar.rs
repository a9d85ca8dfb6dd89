//! Regular pixel grids as selection graphs, and dense image operations.
//!
//! A `width x height` grid becomes a graph whose nodes sit at `(c, -r, 0)`
//! with normal `+z`, so the local frame is the image frame with y up. The
//! grid pyramid halves both dimensions per level and clusters 2x2 blocks,
//! which makes graph pooling coincide with 2x2 average pooling.

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::{ClusterAssignment, GraphLevel, GraphPyramid, NodeSet, PoolMode};
use crate::interp::{Interpolation, Selection};
use crate::conv::SelectionWeights;
use crate::raster::Image;
use crate::sphere::{build_level_edges, local_frame, pad_level};

/// How missing border directions are filled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GridBorder {
    /// Self-edges, as on any other graph.
    #[default]
    Missing,
    /// Edges from the clamped neighbour, matching dense replicate padding.
    Clamp,
}

fn clamp_step(r: usize, c: usize, sel: Selection, width: usize, height: usize) -> (usize, usize) {
    let (dx, dy) = sel.step();
    let rr = (r as i64 - dy as i64).clamp(0, height as i64 - 1) as usize;
    let cc = (c as i64 + dx as i64).clamp(0, width as i64 - 1) as usize;
    (rr, cc)
}

pub fn grid_nodes(width: usize, height: usize) -> NodeSet {
    let mut positions = Vec::with_capacity(width * height);
    let mut pixels = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            positions.push([c as f64, -(r as f64), 0.0]);
            pixels.push([r as u32, c as u32]);
        }
    }
    NodeSet {
        normals: vec![[0.0, 0.0, 1.0]; positions.len()],
        positions,
        uvs: None,
        source_pixel: Some(pixels),
    }
}

/// Graph for one grid level with unit spacing.
pub fn grid_level(
    width: usize,
    height: usize,
    scheme: Interpolation,
    border: GridBorder,
) -> Result<GraphLevel> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidParam("grid must be at least 1x1".into()));
    }
    let nodes = grid_nodes(width, height);
    let neighbors: Vec<Vec<usize>> = (0..width * height)
        .map(|i| {
            let (r, c) = (i / width, i % width);
            let mut list = vec![i];
            for sel in &Selection::ALL[1..] {
                let (dx, dy) = sel.step();
                let (rr, cc) = (r as i64 - dy as i64, c as i64 + dx as i64);
                if (0..height as i64).contains(&rr) && (0..width as i64).contains(&cc) {
                    list.push(rr as usize * width + cc as usize);
                }
            }
            list
        })
        .collect();
    let frames = vec![local_frame([0.0, 0.0, 1.0]); nodes.len()];
    let mut edges = build_level_edges(&nodes.positions, &frames, &neighbors, scheme, 1.0)?;
    if border == GridBorder::Clamp {
        let coverage = crate::graph::selection_coverage(&edges, nodes.len());
        for (i, present) in coverage.iter().enumerate() {
            let (r, c) = (i / width, i % width);
            for sel in Selection::ALL.iter().filter(|s| !present[s.index()]) {
                let (rr, cc) = clamp_step(r, c, *sel, width, height);
                edges.push(rr * width + cc, i, *sel, 1.0);
            }
        }
    }
    let (edges, padded) = pad_level(&edges, nodes.len());
    Ok(GraphLevel {
        nodes,
        edges,
        spacing: 1.0,
        padded,
    })
}

/// Maps each pixel of a `width x height` grid onto its 2x2 block.
pub fn grid_assignment(width: usize, height: usize) -> Result<ClusterAssignment> {
    let (cw, ch) = (width / 2, height / 2);
    let parent = (0..width * height)
        .map(|i| ((i / width / 2) * cw + (i % width) / 2) as u32)
        .collect();
    ClusterAssignment::new(parent, cw * ch)
}

/// `levels` grid levels; dimensions must be divisible by `2^(levels-1)`.
pub fn grid_pyramid(
    width: usize,
    height: usize,
    levels: usize,
    scheme: Interpolation,
    border: GridBorder,
) -> Result<GraphPyramid> {
    let f = 1usize << levels.saturating_sub(1);
    if levels == 0 || width % f != 0 || height % f != 0 {
        return Err(Error::InvalidParam(format!(
            "{width}x{height} grid cannot be halved {} times",
            levels.saturating_sub(1)
        )));
    }
    let mut out = Vec::with_capacity(levels);
    let mut assignments = Vec::new();
    for l in 0..levels {
        let (w, h) = (width >> l, height >> l);
        out.push(grid_level(w, h, scheme, border)?);
        if l + 1 < levels {
            assignments.push(grid_assignment(w, h)?);
        }
    }
    GraphPyramid::new(out, assignments)
}

/// Pixel values as node features, row-major.
pub fn image_to_grid_features(img: &Image) -> Result<FeatureMatrix> {
    img.validate()?;
    FeatureMatrix::from_vec(img.width * img.height, img.channels, img.data.clone())
}

pub fn grid_features_to_image(f: &FeatureMatrix, width: usize, height: usize) -> Result<Image> {
    if f.rows() != width * height {
        return Err(Error::Shape(format!(
            "{} rows for a {width}x{height} grid",
            f.rows()
        )));
    }
    Ok(Image {
        width,
        height,
        channels: f.cols(),
        data: f.data().to_vec(),
    })
}

/// Dense 3x3 convolution with replicate border padding.
pub fn dense_conv3x3(img: &Image, w: &SelectionWeights) -> Result<Image> {
    if img.channels != w.c_in {
        return Err(Error::Shape(format!(
            "{} channels, kernel expects {}",
            img.channels, w.c_in
        )));
    }
    let (c_in, c_out) = (w.c_in, w.c_out);
    let mut out = Image::new(img.width, img.height, c_out);
    for r in 0..img.height {
        for c in 0..img.width {
            let o = out.pixel_mut(r, c);
            if let Some(b) = &w.bias {
                o.copy_from_slice(b);
            }
            for sel in Selection::ALL {
                let (rr, cc) = clamp_step(r, c, sel, img.width, img.height);
                let x = img.pixel(rr, cc);
                let wm = &w.w[sel.index()];
                for ci in 0..c_in {
                    for (oo, &wv) in o.iter_mut().zip(&wm[ci * c_out..(ci + 1) * c_out]) {
                        *oo += x[ci] * wv;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// 2x2 pooling; odd trailing rows and columns are dropped.
pub fn dense_pool2(img: &Image, mode: PoolMode) -> Image {
    let (w, h) = (img.width / 2, img.height / 2);
    let mut out = Image::new(w, h, img.channels);
    for r in 0..h {
        for c in 0..w {
            let taps = [
                img.pixel(2 * r, 2 * c),
                img.pixel(2 * r, 2 * c + 1),
                img.pixel(2 * r + 1, 2 * c),
                img.pixel(2 * r + 1, 2 * c + 1),
            ];
            let o = out.pixel_mut(r, c);
            for ch in 0..o.len() {
                o[ch] = match mode {
                    PoolMode::Mean => taps.iter().map(|t| t[ch]).sum::<f64>() / 4.0,
                    PoolMode::Max => taps.iter().map(|t| t[ch]).fold(f64::NEG_INFINITY, f64::max),
                };
            }
        }
    }
    out
}

/// Nearest-neighbour 2x upsampling.
pub fn dense_upsample2(img: &Image) -> Image {
    Image::from_fn(img.width * 2, img.height * 2, img.channels, |r, c, ch| {
        img.get(r / 2, c / 2, ch)
    })
}
