//! Small bundled networks for demos and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::PoolMode;
use crate::network::{Layer, NetworkSpec};
use crate::weights::{LayerKind, Tensor, WeightStore};

pub const PRESETS: [&str; 4] = ["identity", "average", "smooth3", "toy_unet"];

fn conv(name: &str) -> Layer {
    Layer::SelConv { name: name.into() }
}

/// Per-tap diagonal kernel: tap `(r, c)` scales every channel by `taps[r*3+c]`.
fn diagonal_kernel(channels: usize, taps: &[f32; 9]) -> Tensor {
    let mut data = vec![0.0; 9 * channels * channels];
    for (t, &v) in taps.iter().enumerate() {
        for i in 0..channels {
            data[t * channels * channels + i * channels + i] = v;
        }
    }
    Tensor::new(LayerKind::Conv3x3, vec![3, 3, channels, channels], data).expect("valid shape")
}

fn store(entries: Vec<(String, Tensor)>) -> WeightStore {
    let mut s = WeightStore::new();
    for (n, t) in entries {
        s.insert(n, t).expect("valid tensor");
    }
    s
}

/// One conv layer whose center tap is the identity.
pub fn identity(channels: usize) -> (NetworkSpec, WeightStore) {
    let mut taps = [0.0; 9];
    taps[4] = 1.0;
    (
        NetworkSpec {
            input_channels: channels,
            layers: vec![conv("identity")],
        },
        store(vec![("identity".into(), diagonal_kernel(channels, &taps))]),
    )
}

/// One 3x3 box filter, each channel separately.
pub fn average(channels: usize) -> (NetworkSpec, WeightStore) {
    (
        NetworkSpec {
            input_channels: channels,
            layers: vec![conv("average")],
        },
        store(vec![("average".into(), diagonal_kernel(channels, &[1.0 / 9.0; 9]))]),
    )
}

/// Three random smoothing layers: positive taps summing to one per channel.
pub fn smooth3(channels: usize, seed: u64) -> (NetworkSpec, WeightStore) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    let mut layers = Vec::new();
    for l in 0..3 {
        let mut taps = [0f32; 9];
        taps.iter_mut().for_each(|t| *t = rng.gen_range(0.5..1.5));
        let sum: f32 = taps.iter().sum();
        taps.iter_mut().for_each(|t| *t /= sum);
        let name = format!("smooth{l}");
        entries.push((name.clone(), diagonal_kernel(channels, &taps)));
        layers.push(conv(&name));
    }
    (
        NetworkSpec {
            input_channels: channels,
            layers,
        },
        store(entries),
    )
}

fn random_tensor(kind: LayerKind, shape: Vec<usize>, fan_in: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    let scale = (2.0 / fan_in as f32).sqrt();
    let data = (0..n).map(|_| rng.gen_range(-scale..scale)).collect();
    Tensor::new(kind, shape, data).expect("valid shape")
}

/// Two-level U-Net: conv, pool, conv, unpool, skip concat, conv, 1x1 head.
pub fn toy_unet(
    c_in: usize,
    c_out: usize,
    width: usize,
    seed: u64,
) -> (NetworkSpec, WeightStore) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    let mut add_conv = |name: &str, ci: usize, co: usize, rng: &mut ChaCha8Rng| {
        entries.push((name.to_string(), random_tensor(LayerKind::Conv3x3, vec![3, 3, ci, co], 9 * ci, rng)));
        entries.push((
            format!("{name}.bias"),
            random_tensor(LayerKind::Bias, vec![co], 9 * ci, rng),
        ));
    };
    add_conv("enc0", c_in, width, &mut rng);
    add_conv("enc1", width, 2 * width, &mut rng);
    add_conv("dec0", 3 * width, width, &mut rng);
    entries.push((
        "head".into(),
        random_tensor(LayerKind::Conv1x1, vec![width, c_out], width, &mut rng),
    ));
    let spec = NetworkSpec {
        input_channels: c_in,
        layers: vec![
            conv("enc0"),
            Layer::Relu,
            Layer::Pool {
                mode: PoolMode::Mean,
            },
            conv("enc1"),
            Layer::Relu,
            Layer::Unpool,
            Layer::ConcatSkip { level: 0 },
            conv("dec0"),
            Layer::Relu,
            Layer::Conv1x1 {
                name: "head".into(),
            },
        ],
    };
    (spec, store(entries))
}

/// Looks up a preset by name with default sizes for `channels`.
pub fn by_name(name: &str, channels: usize, seed: u64) -> Option<(NetworkSpec, WeightStore)> {
    match name {
        "identity" => Some(identity(channels)),
        "average" => Some(average(channels)),
        "smooth3" => Some(smooth3(channels, seed)),
        "toy_unet" => Some(toy_unet(channels, channels, 8, seed)),
        _ => None,
    }
}
