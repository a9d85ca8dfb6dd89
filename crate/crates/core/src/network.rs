//! Data-driven networks: layer lists executed over a graph pyramid or a
//! dense image.
//!
//! Features are stored automatically before every pool so a later
//! `concat_skip` at the same level can append them channel-wise.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conv::{conv1x1, relu, sel_conv_indexed, transfer_kernel, EdgeIndex, SelectionWeights};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::{pool, unpool, GraphPyramid, PoolMode};
use crate::planar::{dense_conv3x3, dense_pool2, dense_upsample2};
use crate::raster::Image;
use crate::weights::{LayerKind, WeightStore};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Layer {
    SelConv {
        name: String,
    },
    Conv1x1 {
        name: String,
    },
    Relu,
    Pool {
        #[serde(default)]
        mode: PoolMode,
    },
    Unpool,
    ConcatSkip {
        level: usize,
    },
}

impl Layer {
    pub fn label(&self) -> String {
        match self {
            Layer::SelConv { name } => format!("sel_conv({name})"),
            Layer::Conv1x1 { name } => format!("conv1x1({name})"),
            Layer::Relu => "relu".into(),
            Layer::Pool { mode } => format!("pool({mode:?})").to_lowercase(),
            Layer::Unpool => "unpool".into(),
            Layer::ConcatSkip { level } => format!("concat_skip({level})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub input_channels: usize,
    pub layers: Vec<Layer>,
}

/// Result of a successful dry run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkShape {
    pub output_channels: usize,
    /// Number of pyramid levels the network touches.
    pub levels_used: usize,
}

enum Op {
    Sel(SelectionWeights),
    Pointwise {
        w: Vec<f64>,
        c_out: usize,
        bias: Option<Vec<f64>>,
    },
    Relu,
    Pool(PoolMode),
    Unpool,
    Concat(usize),
}

impl NetworkSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    /// Pyramid depth the network needs: one more than its deepest pool.
    pub fn required_levels(&self) -> usize {
        let (mut level, mut deepest) = (0usize, 0usize);
        for l in &self.layers {
            match l {
                Layer::Pool { .. } => {
                    level += 1;
                    deepest = deepest.max(level);
                }
                Layer::Unpool => level = level.saturating_sub(1),
                _ => {}
            }
        }
        deepest + 1
    }

    /// Checks channel and level arithmetic against the weights and a
    /// pyramid of `depth` levels.
    pub fn validate(&self, weights: &WeightStore, depth: usize) -> Result<NetworkShape> {
        self.compile(weights, depth).map(|(shape, _)| shape)
    }

    fn compile(&self, weights: &WeightStore, depth: usize) -> Result<(NetworkShape, Vec<Op>)> {
        let mut level = 0usize;
        let mut channels = self.input_channels;
        let mut skips: Vec<Option<usize>> = Vec::new();
        let mut used = 1;
        let mut ops = Vec::with_capacity(self.layers.len());
        for (index, layer) in self.layers.iter().enumerate() {
            let fail = |reason: String| Error::SpecMismatch {
                index,
                layer: layer.label(),
                reason,
            };
            let bias_for = |name: &str, c_out: usize| -> Result<Option<Vec<f64>>> {
                match weights.bias(name) {
                    None => Ok(None),
                    Some(b) if b.kind == LayerKind::Bias && b.shape == [c_out] => {
                        Ok(Some(b.data.iter().map(|&v| v as f64).collect()))
                    }
                    Some(b) => Err(fail(format!("bias shape {:?}, expected [{c_out}]", b.shape))),
                }
            };
            let op = match layer {
                Layer::SelConv { name } => {
                    let t = weights
                        .get(name)
                        .ok_or_else(|| fail(format!("no weights named {name}")))?;
                    if t.kind != LayerKind::Conv3x3 {
                        return Err(fail(format!("{name} is {:?}, expected conv3x3", t.kind)));
                    }
                    let mut w = transfer_kernel(t).map_err(|e| fail(e.to_string()))?;
                    if w.c_in != channels {
                        return Err(fail(format!("expects {} input channels, got {channels}", w.c_in)));
                    }
                    channels = w.c_out;
                    w.bias = bias_for(name, channels)?;
                    Op::Sel(w)
                }
                Layer::Conv1x1 { name } => {
                    let t = weights
                        .get(name)
                        .ok_or_else(|| fail(format!("no weights named {name}")))?;
                    if t.kind != LayerKind::Conv1x1 {
                        return Err(fail(format!("{name} is {:?}, expected conv1x1", t.kind)));
                    }
                    if t.shape[0] != channels {
                        return Err(fail(format!(
                            "expects {} input channels, got {channels}",
                            t.shape[0]
                        )));
                    }
                    channels = t.shape[1];
                    Op::Pointwise {
                        w: t.data.iter().map(|&v| v as f64).collect(),
                        c_out: channels,
                        bias: bias_for(name, channels)?,
                    }
                }
                Layer::Relu => Op::Relu,
                Layer::Pool { mode } => {
                    if level + 1 >= depth {
                        return Err(fail(format!("pyramid has only {depth} levels")));
                    }
                    if skips.len() <= level {
                        skips.resize(level + 1, None);
                    }
                    skips[level] = Some(channels);
                    level += 1;
                    used = used.max(level + 1);
                    Op::Pool(*mode)
                }
                Layer::Unpool => {
                    if level == 0 {
                        return Err(fail("already at the finest level".into()));
                    }
                    level -= 1;
                    Op::Unpool
                }
                Layer::ConcatSkip { level: l } => {
                    if *l != level {
                        return Err(fail(format!("skip from level {l} used at level {level}")));
                    }
                    let c = skips
                        .get(*l)
                        .copied()
                        .flatten()
                        .ok_or_else(|| fail(format!("nothing stored at level {l}")))?;
                    channels += c;
                    Op::Concat(*l)
                }
            };
            ops.push(op);
        }
        if level != 0 {
            return Err(Error::SpecMismatch {
                index: self.layers.len(),
                layer: "end".into(),
                reason: format!("network ends at level {level}, expected 0"),
            });
        }
        Ok((
            NetworkShape {
                output_channels: channels,
                levels_used: used,
            },
            ops,
        ))
    }
}

/// Execution target for a compiled network.
trait Backend {
    type Data;
    fn sel_conv(&self, level: usize, x: &Self::Data, w: &SelectionWeights) -> Result<Self::Data>;
    fn pointwise(&self, x: &Self::Data, w: &[f64], c_out: usize, bias: Option<&[f64]>)
        -> Result<Self::Data>;
    fn relu(&self, x: &Self::Data) -> Self::Data;
    fn pool(&self, level: usize, x: &Self::Data, mode: PoolMode) -> Result<Self::Data>;
    fn unpool(&self, level: usize, x: &Self::Data) -> Result<Self::Data>;
    fn concat(&self, a: &Self::Data, b: &Self::Data) -> Result<Self::Data>;
}

fn execute<B: Backend>(backend: &B, ops: &[Op], input: B::Data) -> Result<B::Data>
where
    B::Data: Clone,
{
    let mut x = input;
    let mut level = 0;
    let mut stored: Vec<Option<B::Data>> = Vec::new();
    for op in ops {
        x = match op {
            Op::Sel(w) => backend.sel_conv(level, &x, w)?,
            Op::Pointwise { w, c_out, bias } => backend.pointwise(&x, w, *c_out, bias.as_deref())?,
            Op::Relu => backend.relu(&x),
            Op::Pool(mode) => {
                if stored.len() <= level {
                    stored.resize(level + 1, None);
                }
                stored[level] = Some(x.clone());
                level += 1;
                backend.pool(level - 1, &x, *mode)?
            }
            Op::Unpool => {
                level -= 1;
                backend.unpool(level + 1, &x)?
            }
            Op::Concat(l) => {
                let skip = stored[*l].as_ref().expect("validated");
                backend.concat(&x, skip)?
            }
        };
    }
    Ok(x)
}

struct GraphBackend<'a> {
    pyramid: &'a GraphPyramid,
    index: Vec<EdgeIndex>,
}

impl Backend for GraphBackend<'_> {
    type Data = FeatureMatrix;

    fn sel_conv(&self, level: usize, x: &FeatureMatrix, w: &SelectionWeights) -> Result<FeatureMatrix> {
        sel_conv_indexed(x, &self.index[level], w)
    }

    fn pointwise(
        &self,
        x: &FeatureMatrix,
        w: &[f64],
        c_out: usize,
        bias: Option<&[f64]>,
    ) -> Result<FeatureMatrix> {
        conv1x1(x, w, c_out, bias)
    }

    fn relu(&self, x: &FeatureMatrix) -> FeatureMatrix {
        relu(x)
    }

    fn pool(&self, level: usize, x: &FeatureMatrix, mode: PoolMode) -> Result<FeatureMatrix> {
        pool(x, &self.pyramid.assignments[level], mode)
    }

    fn unpool(&self, level: usize, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        unpool(x, &self.pyramid.assignments[level - 1])
    }

    fn concat(&self, a: &FeatureMatrix, b: &FeatureMatrix) -> Result<FeatureMatrix> {
        a.concat(b)
    }
}

struct DenseBackend;

impl Backend for DenseBackend {
    type Data = Image;

    fn sel_conv(&self, _level: usize, x: &Image, w: &SelectionWeights) -> Result<Image> {
        dense_conv3x3(x, w)
    }

    fn pointwise(&self, x: &Image, w: &[f64], c_out: usize, bias: Option<&[f64]>) -> Result<Image> {
        let f = FeatureMatrix::from_vec(x.width * x.height, x.channels, x.data.clone())?;
        let y = conv1x1(&f, w, c_out, bias)?;
        Ok(Image {
            width: x.width,
            height: x.height,
            channels: c_out,
            data: y.into_vec(),
        })
    }

    fn relu(&self, x: &Image) -> Image {
        Image {
            data: x.data.iter().map(|v| v.max(0.0)).collect(),
            ..x.clone()
        }
    }

    fn pool(&self, _level: usize, x: &Image, mode: PoolMode) -> Result<Image> {
        if x.width % 2 != 0 || x.height % 2 != 0 {
            return Err(Error::Shape(format!("cannot pool a {}x{} image", x.width, x.height)));
        }
        Ok(dense_pool2(x, mode))
    }

    fn unpool(&self, _level: usize, x: &Image) -> Result<Image> {
        Ok(dense_upsample2(x))
    }

    fn concat(&self, a: &Image, b: &Image) -> Result<Image> {
        let fa = FeatureMatrix::from_vec(a.width * a.height, a.channels, a.data.clone())?;
        let fb = FeatureMatrix::from_vec(b.width * b.height, b.channels, b.data.clone())?;
        let f = fa.concat(&fb)?;
        Ok(Image {
            width: a.width,
            height: a.height,
            channels: f.cols(),
            data: f.into_vec(),
        })
    }
}

fn check_input(spec: &NetworkSpec, rows: usize, expected_rows: usize, cols: usize) -> Result<()> {
    if cols != spec.input_channels || rows != expected_rows {
        return Err(Error::SpecMismatch {
            index: 0,
            layer: "input".into(),
            reason: format!(
                "input is {rows}x{cols}, network expects {expected_rows}x{}",
                spec.input_channels
            ),
        });
    }
    Ok(())
}

/// Runs the network over a graph pyramid; output lives on level 0.
pub fn run_network(
    spec: &NetworkSpec,
    weights: &WeightStore,
    pyramid: &GraphPyramid,
    input: &FeatureMatrix,
) -> Result<FeatureMatrix> {
    let (shape, ops) = spec.compile(weights, pyramid.depth())?;
    check_input(spec, input.rows(), pyramid.levels[0].node_count(), input.cols())?;
    let index = pyramid.levels[..shape.levels_used]
        .iter()
        .map(|l| EdgeIndex::new(&l.edges, l.node_count()))
        .collect::<Result<Vec<_>>>()?;
    execute(&GraphBackend { pyramid, index }, &ops, input.clone())
}

/// Runs the network as an ordinary image CNN: replicate padding, 2x2
/// pooling and nearest upsampling.
pub fn run_network_dense(spec: &NetworkSpec, weights: &WeightStore, input: &Image) -> Result<Image> {
    input.validate()?;
    // each pool halves both sides
    let depth = 1 + input.width.trailing_zeros().min(input.height.trailing_zeros()) as usize;
    let (_, ops) = spec.compile(weights, depth)?;
    check_input(spec, input.height * input.width, input.height * input.width, input.channels)?;
    execute(&DenseBackend, &ops, input.clone())
}
