//! Scalar neural-network plumbing: linear maps, MLPs, layer norm, softmax,
//! and a small post-norm transformer layer for invariant node features.
//!
//! All forwards are pure and use fixed-order reductions, so repeated runs
//! are bit-identical.

use rand::Rng;

use crate::tensor::Tensor;

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Dot product with eight independent accumulators so the reduction
/// vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    const LANES: usize = 8;
    let mut acc = [0.0f64; LANES];
    let chunks = a.len() / LANES;
    for c in 0..chunks {
        let av = &a[c * LANES..(c + 1) * LANES];
        let bv = &b[c * LANES..(c + 1) * LANES];
        for l in 0..LANES {
            acc[l] += av[l] * bv[l];
        }
    }
    let mut tail = 0.0;
    for k in chunks * LANES..a.len() {
        tail += a[k] * b[k];
    }
    acc.iter().sum::<f64>() + tail
}

/// In-place stable softmax over a slice.
pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Dense affine map `y = W x (+ b)` with `W` stored as `[out, in]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub w: Tensor,
    pub b: Option<Tensor>,
}

impl Linear {
    pub fn new(in_dim: usize, out_dim: usize, bias: bool, rng: &mut impl Rng) -> Self {
        let scale = 1.0 / (in_dim as f64).sqrt();
        Linear {
            w: Tensor::uniform(&[out_dim, in_dim], scale, rng),
            b: bias.then(|| Tensor::uniform(&[out_dim], scale, rng)),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.dims()[1]
    }

    pub fn out_dim(&self) -> usize {
        self.w.dims()[0]
    }

    pub fn parameter_count(&self) -> usize {
        self.w.len() + self.b.as_ref().map_or(0, Tensor::len)
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.out_dim()];
        self.forward_into(x, &mut out);
        out
    }

    pub fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        let (o, i) = (self.out_dim(), self.in_dim());
        debug_assert_eq!(x.len(), i);
        debug_assert_eq!(out.len(), o);
        let w = self.w.data();
        for (n, slot) in out.iter_mut().enumerate() {
            *slot = dot(&w[n * i..(n + 1) * i], x);
        }
        if let Some(b) = &self.b {
            for (slot, bv) in out.iter_mut().zip(b.data()) {
                *slot += bv;
            }
        }
    }

    /// Batched forward over `rows` contiguous input vectors, tiled so each
    /// weight row is streamed once per tile of inputs.
    pub fn forward_batch(&self, xs: &[f64], rows: usize) -> Vec<f64> {
        let (o, i) = (self.out_dim(), self.in_dim());
        debug_assert_eq!(xs.len(), rows * i);
        let w = self.w.data();
        let mut out = vec![0.0; rows * o];
        const TILE: usize = 8;
        for tile_start in (0..rows).step_by(TILE) {
            let tile_end = (tile_start + TILE).min(rows);
            for n in 0..o {
                let row = &w[n * i..(n + 1) * i];
                for r in tile_start..tile_end {
                    out[r * o + n] = dot(row, &xs[r * i..(r + 1) * i]);
                }
            }
        }
        if let Some(b) = &self.b {
            let bd = b.data();
            for r in 0..rows {
                for (slot, bv) in out[r * o..(r + 1) * o].iter_mut().zip(bd) {
                    *slot += bv;
                }
            }
        }
        out
    }
}

/// Fully connected network with ReLU between layers (not after the last).
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Linear>,
}

impl Mlp {
    pub fn new(dims: &[usize], rng: &mut impl Rng) -> Self {
        assert!(dims.len() >= 2);
        let layers = dims
            .windows(2)
            .map(|w| Linear::new(w[0], w[1], true, rng))
            .collect();
        Mlp { layers }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(Linear::parameter_count).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_batch(x, 1)
    }

    /// Batched forward over `rows` contiguous input vectors.
    pub fn forward_batch(&self, xs: &[f64], rows: usize) -> Vec<f64> {
        let mut cur = xs.to_vec();
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            let mut next = layer.forward_batch(&cur, rows);
            if li != last {
                for v in &mut next {
                    *v = relu(*v);
                }
            }
            cur = next;
        }
        cur
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerNorm {
    pub gamma: Tensor,
    pub beta: Tensor,
    pub eps: f64,
}

impl LayerNorm {
    pub fn new(dim: usize) -> Self {
        LayerNorm {
            gamma: Tensor::from_data(&[dim], vec![1.0; dim]),
            beta: Tensor::zeros(&[dim]),
            eps: 1e-5,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.gamma.len() + self.beta.len()
    }

    pub fn forward_in_place(&self, x: &mut [f64]) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let inv = 1.0 / (var + self.eps).sqrt();
        for (v, (g, b)) in x
            .iter_mut()
            .zip(self.gamma.data().iter().zip(self.beta.data()))
        {
            *v = (*v - mean) * inv * g + b;
        }
    }
}

/// Post-norm transformer layer on per-node scalar features: multi-head
/// self-attention plus a feed-forward block, each followed by an additive
/// residual and layer norm.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformerLayer {
    pub n_heads: usize,
    pub wq: Linear,
    pub wk: Linear,
    pub wv: Linear,
    pub wo: Linear,
    pub ln_attn: LayerNorm,
    pub ffn: Mlp,
    pub ln_ffn: LayerNorm,
}

impl TransformerLayer {
    pub fn new(dim: usize, n_heads: usize, ffn_hidden: usize, rng: &mut impl Rng) -> Self {
        assert_eq!(dim % n_heads, 0, "model dim must divide across heads");
        TransformerLayer {
            n_heads,
            wq: Linear::new(dim, dim, true, rng),
            wk: Linear::new(dim, dim, true, rng),
            wv: Linear::new(dim, dim, true, rng),
            wo: Linear::new(dim, dim, true, rng),
            ln_attn: LayerNorm::new(dim),
            ffn: Mlp::new(&[dim, ffn_hidden, dim], rng),
            ln_ffn: LayerNorm::new(dim),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.wq.parameter_count()
            + self.wk.parameter_count()
            + self.wv.parameter_count()
            + self.wo.parameter_count()
            + self.ln_attn.parameter_count()
            + self.ffn.parameter_count()
            + self.ln_ffn.parameter_count()
    }

    /// `features` is row-major `[n_nodes, dim]`, updated in place.
    pub fn forward_in_place(&self, features: &mut [f64], n_nodes: usize) {
        let dim = self.wq.in_dim();
        debug_assert_eq!(features.len(), n_nodes * dim);
        let head_dim = dim / self.n_heads;
        let scale = 1.0 / (head_dim as f64).sqrt();

        let q = self.wq.forward_batch(features, n_nodes);
        let k = self.wk.forward_batch(features, n_nodes);
        let v = self.wv.forward_batch(features, n_nodes);

        let mut attended = vec![0.0; n_nodes * dim];
        let mut logits = vec![0.0; n_nodes];
        for h in 0..self.n_heads {
            let off = h * head_dim;
            for i in 0..n_nodes {
                for (j, slot) in logits.iter_mut().enumerate() {
                    let qi = &q[i * dim + off..i * dim + off + head_dim];
                    let kj = &k[j * dim + off..j * dim + off + head_dim];
                    *slot = dot(qi, kj) * scale;
                }
                softmax_in_place(&mut logits);
                let out = &mut attended[i * dim + off..i * dim + off + head_dim];
                for (j, a) in logits.iter().enumerate() {
                    let vj = &v[j * dim + off..j * dim + off + head_dim];
                    for (slot, value) in out.iter_mut().zip(vj) {
                        *slot += a * value;
                    }
                }
            }
        }

        let projected = self.wo.forward_batch(&attended, n_nodes);
        for i in 0..n_nodes {
            let row = &mut features[i * dim..(i + 1) * dim];
            for (slot, p) in row.iter_mut().zip(&projected[i * dim..(i + 1) * dim]) {
                *slot += p;
            }
            self.ln_attn.forward_in_place(row);
        }

        for i in 0..n_nodes {
            let row = &mut features[i * dim..(i + 1) * dim];
            let ff = self.ffn.forward(row);
            for (slot, f) in row.iter_mut().zip(&ff) {
                *slot += f;
            }
            self.ln_ffn.forward_in_place(row);
        }
    }
}
