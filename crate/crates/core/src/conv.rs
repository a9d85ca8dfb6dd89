//! Selection convolution `X' = sum_m S_m X W_m + b` and 1x1 convolution.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::SelectionEdges;
use crate::interp::Selection;
use crate::weights::{LayerKind, Tensor};

/// Selection for kernel position `(row, col)`, rows growing downward.
pub fn kernel_selection(row: usize, col: usize) -> Selection {
    let dx = col as i32 - 1;
    let dy = 1 - row as i32;
    Selection::from_step(dx, dy).expect("3x3 position")
}

/// Nine `c_in x c_out` matrices (row-major) indexed by selection, plus bias.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionWeights {
    pub c_in: usize,
    pub c_out: usize,
    pub w: [Vec<f64>; 9],
    pub bias: Option<Vec<f64>>,
}

impl SelectionWeights {
    pub fn zeros(c_in: usize, c_out: usize) -> Self {
        SelectionWeights {
            c_in,
            c_out,
            w: std::array::from_fn(|_| vec![0.0; c_in * c_out]),
            bias: None,
        }
    }

    /// `W_0 = I`, all other selections zero.
    pub fn identity(c: usize) -> Self {
        let mut s = Self::zeros(c, c);
        for i in 0..c {
            s.w[0][i * c + i] = 1.0;
        }
        s
    }

    pub fn with_bias(mut self, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != self.c_out {
            return Err(Error::Shape(format!(
                "bias of length {} for {} output channels",
                bias.len(),
                self.c_out
            )));
        }
        self.bias = Some(bias);
        Ok(self)
    }
}

/// Maps a planar `[3, 3, c_in, c_out]` kernel onto selection matrices.
pub fn transfer_kernel(kernel: &Tensor) -> Result<SelectionWeights> {
    if kernel.kind != LayerKind::Conv3x3 {
        return Err(Error::Shape(format!("expected a 3x3 kernel, got {:?}", kernel.kind)));
    }
    kernel.validate()?;
    let (c_in, c_out) = (kernel.shape[2], kernel.shape[3]);
    let mut out = SelectionWeights::zeros(c_in, c_out);
    let slice = c_in * c_out;
    for r in 0..3 {
        for c in 0..3 {
            let m = kernel_selection(r, c).index();
            let start = (r * 3 + c) * slice;
            out.w[m] = kernel.data[start..start + slice]
                .iter()
                .map(|&v| v as f64)
                .collect();
        }
    }
    Ok(out)
}

/// Edges grouped by destination node, each group in original edge order.
#[derive(Clone, Debug)]
pub struct EdgeIndex {
    offsets: Vec<usize>,
    src: Vec<u32>,
    selection: Vec<u8>,
    weight: Vec<f64>,
}

impl EdgeIndex {
    pub fn new(edges: &SelectionEdges, node_count: usize) -> Result<Self> {
        edges.validate(node_count)?;
        let mut counts = vec![0usize; node_count + 1];
        for &d in &edges.dst {
            counts[d as usize + 1] += 1;
        }
        for i in 0..node_count {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let n = edges.len();
        let (mut src, mut selection, mut weight) = (vec![0; n], vec![0; n], vec![0.0; n]);
        for (s, d, m, w) in edges.iter() {
            let slot = cursor[d];
            cursor[d] += 1;
            src[slot] = s as u32;
            selection[slot] = m as u8;
            weight[slot] = w;
        }
        Ok(EdgeIndex {
            offsets,
            src,
            selection,
            weight,
        })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }
}

/// Selection convolution over a prebuilt edge index.
pub fn sel_conv_indexed(
    x: &FeatureMatrix,
    index: &EdgeIndex,
    weights: &SelectionWeights,
) -> Result<FeatureMatrix> {
    let n = index.node_count();
    if x.rows() != n {
        return Err(Error::Shape(format!("{} feature rows for {n} nodes", x.rows())));
    }
    if x.cols() != weights.c_in {
        return Err(Error::Shape(format!(
            "{} input channels, weights expect {}",
            x.cols(),
            weights.c_in
        )));
    }
    let (c_in, c_out) = (weights.c_in, weights.c_out);
    let mut out = FeatureMatrix::zeros(n, c_out);
    out.data_mut()
        .par_chunks_mut(c_out.max(1))
        .enumerate()
        .for_each_init(
            || vec![0.0; 9 * c_in],
            |agg, (i, row)| {
                agg.iter_mut().for_each(|v| *v = 0.0);
                let mut used = [false; 9];
                for e in index.offsets[i]..index.offsets[i + 1] {
                    let m = index.selection[e] as usize;
                    used[m] = true;
                    let w = index.weight[e];
                    let xs = x.row(index.src[e] as usize);
                    for (a, &v) in agg[m * c_in..(m + 1) * c_in].iter_mut().zip(xs) {
                        *a += w * v;
                    }
                }
                if let Some(b) = &weights.bias {
                    row.copy_from_slice(b);
                }
                for m in (0..9).filter(|&m| used[m]) {
                    let wm = &weights.w[m];
                    for (ci, &a) in agg[m * c_in..(m + 1) * c_in].iter().enumerate() {
                        if a == 0.0 {
                            continue;
                        }
                        for (o, &wv) in row.iter_mut().zip(&wm[ci * c_out..(ci + 1) * c_out]) {
                            *o += a * wv;
                        }
                    }
                }
            },
        );
    Ok(out)
}

/// Selection convolution; builds the edge index on the fly.
pub fn sel_conv(
    x: &FeatureMatrix,
    edges: &SelectionEdges,
    weights: &SelectionWeights,
) -> Result<FeatureMatrix> {
    sel_conv_indexed(x, &EdgeIndex::new(edges, x.rows())?, weights)
}

/// Pointwise `X W + b` with `W` row-major `c_in x c_out`.
pub fn conv1x1(
    x: &FeatureMatrix,
    w: &[f64],
    c_out: usize,
    bias: Option<&[f64]>,
) -> Result<FeatureMatrix> {
    let c_in = x.cols();
    if w.len() != c_in * c_out || bias.is_some_and(|b| b.len() != c_out) {
        return Err(Error::Shape(format!(
            "1x1 weights of length {} do not fit {c_in} -> {c_out}",
            w.len()
        )));
    }
    let mut out = FeatureMatrix::zeros(x.rows(), c_out);
    out.data_mut()
        .par_chunks_mut(c_out.max(1))
        .zip(x.data().par_chunks(c_in.max(1)))
        .for_each(|(row, xs)| {
            if let Some(b) = bias {
                row.copy_from_slice(b);
            }
            for (ci, &v) in xs.iter().enumerate() {
                for (o, &wv) in row.iter_mut().zip(&w[ci * c_out..(ci + 1) * c_out]) {
                    *o += v * wv;
                }
            }
        });
    Ok(out)
}

pub fn relu(x: &FeatureMatrix) -> FeatureMatrix {
    x.map(|v| v.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{add_replicate_padding, normalize_interpolation, normalize_rows};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mapping_table() {
        use Selection::*;
        let expect = [[NW, N, NE], [W, Center, E], [SW, S, SE]];
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(kernel_selection(r, c), expect[r][c]);
            }
        }
    }

    fn kernel_with(pos: Option<(usize, usize)>, c: usize, v: f32) -> Tensor {
        let mut data = vec![0.0; 9 * c * c];
        if let Some((r, col)) = pos {
            for i in 0..c {
                data[(r * 3 + col) * c * c + i * c + i] = v;
            }
        }
        Tensor::new(LayerKind::Conv3x3, vec![3, 3, c, c], data).unwrap()
    }

    #[test]
    fn identity_kernel_transfers_to_center() {
        let w = transfer_kernel(&kernel_with(Some((1, 1)), 2, 1.0)).unwrap();
        assert_eq!(w.w[0], vec![1.0, 0.0, 0.0, 1.0]);
        assert!(w.w[1..].iter().all(|m| m.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn top_middle_is_north() {
        let w = transfer_kernel(&kernel_with(Some((0, 1)), 1, 0.5)).unwrap();
        for m in 0..9 {
            let expect = if m == Selection::N.index() { 0.5 } else { 0.0 };
            assert_eq!(w.w[m], vec![expect]);
        }
    }

    #[test]
    fn wrong_kind() {
        let t = Tensor::new(LayerKind::Conv1x1, vec![1, 1], vec![1.0]).unwrap();
        assert!(matches!(transfer_kernel(&t), Err(Error::Shape(_))));
    }

    fn random_graph(n: usize, seed: u64) -> SelectionEdges {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut e = SelectionEdges::default();
        for _ in 0..n * 4 {
            let s = rng.gen_range(0..n);
            let d = rng.gen_range(0..n);
            let m = Selection::from_index(rng.gen_range(0..9)).unwrap();
            e.push(s, d, m, rng.gen_range(0.1..1.0));
        }
        let e = normalize_rows(&normalize_interpolation(&e).unwrap()).unwrap();
        add_replicate_padding(&e, n)
    }

    fn random_weights(c_in: usize, c_out: usize, seed: u64) -> SelectionWeights {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = SelectionWeights::zeros(c_in, c_out);
        for m in &mut w.w {
            m.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        }
        w
    }

    fn random_features(n: usize, c: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FeatureMatrix::from_fn(n, c, |_, _| rng.gen_range(-1.0..1.0))
    }

    /// Dense reference: builds each S_m as a matrix.
    fn dense_reference(x: &FeatureMatrix, e: &SelectionEdges, w: &SelectionWeights) -> FeatureMatrix {
        let n = x.rows();
        let mut out = FeatureMatrix::zeros(n, w.c_out);
        for m in 0..9 {
            let mut s = vec![0.0; n * n];
            for (src, dst, sel, wt) in e.iter() {
                if sel == m {
                    s[dst * n + src] += wt;
                }
            }
            for i in 0..n {
                for o in 0..w.c_out {
                    let mut acc = 0.0;
                    for j in 0..n {
                        for c in 0..w.c_in {
                            acc += s[i * n + j] * x.get(j, c) * w.w[m][c * w.c_out + o];
                        }
                    }
                    out.set(i, o, out.get(i, o) + acc);
                }
            }
        }
        out
    }

    #[test]
    fn matches_dense_matrix_form() {
        let e = random_graph(30, 1);
        let x = random_features(30, 3, 2);
        let w = random_weights(3, 4, 3);
        let got = sel_conv(&x, &e, &w).unwrap();
        assert!(got.max_abs_diff(&dense_reference(&x, &e, &w)) < 1e-12);
    }

    #[test]
    fn identity_plus_bias() {
        let e = random_graph(20, 4);
        let x = random_features(20, 2, 5);
        let w = SelectionWeights::identity(2).with_bias(vec![0.5, -1.0]).unwrap();
        let y = sel_conv(&x, &e, &w).unwrap();
        for i in 0..20 {
            // the center group of a padded graph is a convex mix; with a pure
            // self center tap it is exactly the input
            let center: Vec<_> = e.iter().filter(|&(_, d, m, _)| d == i && m == 0).collect();
            if center.len() == 1 && center[0].0 == i {
                assert!((y.get(i, 0) - x.get(i, 0) - 0.5).abs() < 1e-12);
                assert!((y.get(i, 1) - x.get(i, 1) + 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn averaging_preserves_constant() {
        let e = random_graph(25, 6);
        let x = FeatureMatrix::from_vec(25, 2, vec![0.3; 50]).unwrap();
        let mut w = SelectionWeights::zeros(2, 2);
        for m in &mut w.w {
            m[0] = 1.0 / 9.0;
            m[3] = 1.0 / 9.0;
        }
        let y = sel_conv(&x, &e, &w).unwrap();
        assert!(y.data().iter().all(|&v| (v - 0.3).abs() < 1e-12));
    }

    #[test]
    fn shape_errors() {
        let e = random_graph(5, 7);
        let w = SelectionWeights::identity(2);
        assert!(sel_conv(&random_features(5, 3, 1), &e, &w).is_err());
        assert!(sel_conv(&random_features(4, 2, 1), &e, &w).is_err());
        assert!(conv1x1(&random_features(4, 2, 1), &[1.0; 3], 2, None).is_err());
    }

    #[test]
    fn conv1x1_matches_hand() {
        let x = FeatureMatrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = conv1x1(&x, &[1.0, 0.5, -1.0, 2.0], 2, Some(&[0.0, 1.0])).unwrap();
        assert_eq!(y.data(), &[-1.0, 5.5, -1.0, 10.5]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn linearity(seed in 0u64..1000, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let e = random_graph(15, seed);
            let w = random_weights(2, 3, seed + 1);
            let x = random_features(15, 2, seed + 2);
            let y = random_features(15, 2, seed + 3);
            let mix = FeatureMatrix::from_fn(15, 2, |r, c| a * x.get(r, c) + b * y.get(r, c));
            let lhs = sel_conv(&mix, &e, &w).unwrap();
            let (fx, fy) = (sel_conv(&x, &e, &w).unwrap(), sel_conv(&y, &e, &w).unwrap());
            let rhs = FeatureMatrix::from_fn(15, 3, |r, c| a * fx.get(r, c) + b * fy.get(r, c));
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-6);
        }

        #[test]
        fn permutation_equivariance(seed in 0u64..1000) {
            let n = 12;
            let e = random_graph(n, seed);
            let w = random_weights(2, 2, seed + 1);
            let x = random_features(n, 2, seed + 2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 3);
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let mut pe = SelectionEdges::default();
            let mut order: Vec<usize> = (0..e.len()).collect();
            order.reverse();
            for k in order {
                let (s, d, m, wt) = (e.src[k] as usize, e.dst[k] as usize, e.selection[k], e.weight[k]);
                pe.push(perm[s], perm[d], Selection::from_index(m as usize).unwrap(), wt);
            }
            let mut px = FeatureMatrix::zeros(n, 2);
            for i in 0..n {
                px.row_mut(perm[i]).copy_from_slice(x.row(i));
            }
            let y = sel_conv(&x, &e, &w).unwrap();
            let py = sel_conv(&px, &pe, &w).unwrap();
            for i in 0..n {
                for c in 0..2 {
                    prop_assert!((py.get(perm[i], c) - y.get(i, c)).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn averaging_is_convex(seed in 0u64..1000) {
            let e = random_graph(20, seed);
            let x = random_features(20, 1, seed + 1);
            let mut w = SelectionWeights::zeros(1, 1);
            for m in &mut w.w {
                m[0] = 1.0 / 9.0;
            }
            let y = sel_conv(&x, &e, &w).unwrap();
            let lo = x.data().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = x.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(y.data().iter().all(|&v| v >= lo - 1e-9 && v <= hi + 1e-9));
        }
    }
}
