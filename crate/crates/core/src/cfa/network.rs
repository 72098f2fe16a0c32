//! The full denoising network: feature embedding plus a stack of update
//! blocks, each running attention, scalar mixing, edge updates, and frame
//! updates. Scalar features stay SE(3)-invariant throughout; frames carry
//! all the geometry, so a global rigid motion of the input frames moves the
//! output frames the same way.

use nalgebra::Vector3;

use crate::motor::{Frame, Motor};
use crate::nn::relu;
use crate::pga::Multivector;

use super::attention::{backbone_update, cfa_forward, ensure_finite, CfaInputs};
use super::weights::{
    NetworkWeights, DIST_RBF_DIM, EDGE_EMBED_IN, NODE_EMBED_IN, NODE_PE_DIM, RELPOS_DIM,
    SELF_COND_RBF_DIM, TIME_EMB_DIM,
};
use super::CfaError;

/// Sinusoidal encoding of a scalar position into `dim` values.
fn sinusoidal(pos: f64, dim: usize, out: &mut [f64]) {
    debug_assert_eq!(out.len(), dim);
    let pairs = dim / 2;
    for i in 0..pairs {
        let freq = 1.0 / 10_000f64.powf(i as f64 / pairs as f64);
        out[2 * i] = (pos * freq).sin();
        out[2 * i + 1] = (pos * freq).cos();
    }
}

/// Gaussian radial basis over distances, centers spanning 0..20.
fn rbf(dist: f64, dim: usize, out: &mut [f64]) {
    debug_assert_eq!(out.len(), dim);
    let spacing = 20.0 / dim as f64;
    let inv_two_sigma2 = 1.0 / (2.0 * spacing * spacing);
    for (k, slot) in out.iter_mut().enumerate() {
        let center = spacing * k as f64;
        *slot = (-(dist - center) * (dist - center) * inv_two_sigma2).exp();
    }
}

fn embed_nodes(w: &NetworkWeights, n: usize, t: f64) -> Vec<f64> {
    let mut features = vec![0.0; NODE_EMBED_IN];
    let mut out = vec![0.0; n * w.config.node_dim];
    let mut time_emb = vec![0.0; TIME_EMB_DIM];
    sinusoidal(t * 1000.0, TIME_EMB_DIM, &mut time_emb);
    for i in 0..n {
        if w.config.use_positional_encoding {
            sinusoidal(i as f64, NODE_PE_DIM, &mut features[..NODE_PE_DIM]);
        } else {
            features[..NODE_PE_DIM].fill(0.0);
        }
        features[NODE_PE_DIM..].copy_from_slice(&time_emb);
        w.node_embed
            .forward_into(&features, &mut out[i * w.config.node_dim..(i + 1) * w.config.node_dim]);
    }
    out
}

fn embed_edges(
    w: &NetworkWeights,
    positions: &[Vector3<f64>],
    self_cond: Option<&[Vector3<f64>]>,
) -> Vec<f64> {
    let n = positions.len();
    let edge_dim = w.config.edge_dim;
    let w_embed = w.edge_embed.w.data();
    let bias = w.edge_embed.b.as_ref().expect("edge embed bias").data();

    // the relative-position block of the linear only depends on j - i, so
    // project it once per offset instead of once per pair
    let offsets = 2 * n.saturating_sub(1) + 1;
    let mut rel_proj = vec![0.0f64; offsets * edge_dim];
    let mut pe = vec![0.0f64; RELPOS_DIM];
    if w.config.use_positional_encoding {
        for o in 0..offsets {
            let rel = o as f64 - (n as f64 - 1.0);
            sinusoidal(rel, RELPOS_DIM, &mut pe);
            let row = &mut rel_proj[o * edge_dim..(o + 1) * edge_dim];
            for (k, slot) in row.iter_mut().enumerate() {
                *slot = crate::nn::dot(&w_embed[k * EDGE_EMBED_IN..k * EDGE_EMBED_IN + RELPOS_DIM], &pe);
            }
        }
    }

    let mut out = vec![0.0; n * n * edge_dim];
    let mut dist_feat = vec![0.0f64; DIST_RBF_DIM];
    let mut sc_feat = vec![0.0f64; SELF_COND_RBF_DIM];
    for i in 0..n {
        for j in 0..n {
            let d = (positions[i] - positions[j]).norm();
            rbf(d, DIST_RBF_DIM, &mut dist_feat);
            if let Some(prev) = self_cond {
                rbf((prev[i] - prev[j]).norm(), SELF_COND_RBF_DIM, &mut sc_feat);
            }
            let slot = &mut out[(i * n + j) * edge_dim..(i * n + j + 1) * edge_dim];
            let offset = (j + n - 1) - i;
            for (k, s) in slot.iter_mut().enumerate() {
                let row = &w_embed[k * EDGE_EMBED_IN..(k + 1) * EDGE_EMBED_IN];
                let mut acc = bias[k] + crate::nn::dot(&row[RELPOS_DIM..RELPOS_DIM + DIST_RBF_DIM], &dist_feat);
                if self_cond.is_some() {
                    acc += crate::nn::dot(&row[RELPOS_DIM + DIST_RBF_DIM..], &sc_feat);
                }
                if w.config.use_positional_encoding {
                    acc += rel_proj[offset * edge_dim + k];
                }
                *s = acc;
            }
        }
    }
    out
}

/// Two-layer edge MLP on `concat(z_ij, s_i, s_j)`, with the node
/// contributions to the first layer hoisted out of the pair loop.
fn edge_update(
    w: &crate::cfa::weights::BlockWeights,
    cfg: &super::CfaConfig,
    s: &[f64],
    z: &mut [f64],
    n: usize,
) {
    let edge_dim = cfg.edge_dim;
    let node_dim = cfg.node_dim;
    let hidden = cfg.edge_hidden_dim;
    let w_in = w.edge_mlp_in.w.data();
    let b_in = w.edge_mlp_in.b.as_ref().expect("edge mlp bias").data();
    let in_dim = edge_dim + 2 * node_dim;

    // per-node pieces of the first layer
    let mut u = vec![0.0; n * hidden]; // role i
    let mut vv = vec![0.0; n * hidden]; // role j
    for node in 0..n {
        let sv = &s[node * node_dim..(node + 1) * node_dim];
        for k in 0..hidden {
            let row = &w_in[k * in_dim..(k + 1) * in_dim];
            let mut acc_u = 0.0;
            let mut acc_v = 0.0;
            for d in 0..node_dim {
                acc_u += row[edge_dim + d] * sv[d];
                acc_v += row[edge_dim + node_dim + d] * sv[d];
            }
            u[node * hidden + k] = acc_u;
            vv[node * hidden + k] = acc_v;
        }
    }

    let mut h = vec![0.0; hidden];
    let mut delta = vec![0.0; edge_dim];
    for i in 0..n {
        for j in 0..n {
            let zij = &z[(i * n + j) * edge_dim..(i * n + j + 1) * edge_dim];
            for (k, slot) in h.iter_mut().enumerate() {
                let row = &w_in[k * in_dim..k * in_dim + edge_dim];
                *slot = relu(
                    b_in[k] + u[i * hidden + k] + vv[j * hidden + k] + crate::nn::dot(row, zij),
                );
            }
            w.edge_mlp_out.forward_into(&h, &mut delta);
            let zij = &mut z[(i * n + j) * edge_dim..(i * n + j + 1) * edge_dim];
            for (slot, dv) in zij.iter_mut().zip(&delta) {
                *slot += dv;
            }
        }
    }
}

/// Run the denoising network on noisy frames at flow time `t`. Optional
/// self-conditioning passes the previous prediction's CA positions as an
/// extra pairwise-distance feature (zeros when absent). Returns the
/// predicted clean frames.
pub fn network_forward(
    w: &NetworkWeights,
    frames_in: &[Frame],
    t: f64,
    self_cond: Option<&[Vector3<f64>]>,
) -> Result<Vec<Frame>, CfaError> {
    let n = frames_in.len();
    if n < 2 {
        return Err(CfaError::TooFewResidues { n, min: 2 });
    }
    if !(0.0..=1.0).contains(&t) || !t.is_finite() {
        return Err(CfaError::InvalidTime { t });
    }
    if let Some(prev) = self_cond {
        if prev.len() != n {
            return Err(CfaError::ShapeMismatch { what: "self-conditioning positions" });
        }
    }
    let cfg = &w.config;
    let n_geo = cfg.n_geo_channels();

    let mut motors = Vec::with_capacity(n);
    for f in frames_in {
        motors.push(Motor::from_frame(f).map_err(|_| CfaError::InvalidFrame)?);
    }
    let mut frames = frames_in.to_vec();

    let positions: Vec<Vector3<f64>> = frames.iter().map(|f| f.translation).collect();
    let mut s = embed_nodes(w, n, t);
    let mut z = embed_edges(w, &positions, self_cond);
    let mut geo = vec![Multivector::ZERO; n * n_geo];

    for block in &w.blocks {
        let out = cfa_forward(
            &block.cfa,
            cfg,
            &CfaInputs {
                s: &s,
                z: &z,
                geo: &geo,
                motors: &motors,
                frames: &frames,
            },
        )?;

        for (slot, dv) in s.iter_mut().zip(&out.s_update) {
            *slot += dv;
        }
        let mlp_out = block.post_mlp.forward_batch(&s, n);
        for (slot, m) in s.iter_mut().zip(&mlp_out) {
            *slot += m;
        }
        block.transformer.forward_in_place(&mut s, n);
        let mlp_out = block.node_mlp.forward_batch(&s, n);
        for (slot, m) in s.iter_mut().zip(&mlp_out) {
            *slot += m;
        }
        ensure_finite("node_update", &s)?;

        for (slot, dv) in geo.iter_mut().zip(&out.geo_update) {
            *slot += *dv;
        }

        edge_update(block, cfg, &s, &mut z, n);
        ensure_finite("edge_update", &z)?;

        for i in 0..n {
            motors[i] = backbone_update(
                &block.bb_mlp,
                &s[i * cfg.node_dim..(i + 1) * cfg.node_dim],
                &geo[i * n_geo..(i + 1) * n_geo],
                &out.t_rel[i * cfg.n_heads..(i + 1) * cfg.n_heads],
                &motors[i],
            )?;
            frames[i] = motors[i].to_frame();
        }
    }

    Ok(frames)
}
